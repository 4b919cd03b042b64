use rand::seq::SliceRandom;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use super::split::apportion;
use super::LabeledDataset;
use crate::error::{Error, Result};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PartitionScheme {
    Iid,
    Dirichlet { alpha: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PartitionPlan {
    pub scheme: PartitionScheme,
    pub clients: usize,
    pub seed: u64,
}

/// Splits `ds` into `plan.clients` disjoint, non-empty parts.
///
/// `Iid` deals a shuffled copy round-robin, so sizes differ by at most one.
/// `Dirichlet { alpha }` draws, per class, the share each client receives
/// from a symmetric Dirichlet(alpha). Empty clients then take one sample
/// from the currently largest client until every client holds data.
pub fn partition_clients(ds: &LabeledDataset, plan: &PartitionPlan) -> Result<Vec<LabeledDataset>> {
    let k = plan.clients;
    if k == 0 {
        return Err(Error::Config("client count must be positive".into()));
    }
    if ds.len() < k {
        return Err(Error::Config(format!(
            "cannot give {k} clients at least one sample from {} samples",
            ds.len()
        )));
    }
    let mut rng = seed::rng(plan.seed, &[seed::TAG_PARTITION]);
    let mut assignment: Vec<Vec<usize>> = vec![Vec::new(); k];

    match plan.scheme {
        PartitionScheme::Iid => {
            let mut order: Vec<usize> = (0..ds.len()).collect();
            order.shuffle(&mut rng);
            for (pos, idx) in order.into_iter().enumerate() {
                assignment[pos % k].push(idx);
            }
        }
        PartitionScheme::Dirichlet { alpha } => {
            if !(alpha > 0.0 && alpha.is_finite()) {
                return Err(Error::Config(format!("dirichlet alpha must be positive, got {alpha}")));
            }
            let gamma = Gamma::new(alpha, 1.0).map_err(|e| Error::Config(e.to_string()))?;
            for mut members in ds.indices_by_class() {
                members.shuffle(&mut rng);
                let draws: Vec<f64> = (0..k).map(|_| gamma.sample(&mut rng)).collect();
                let total: f64 = draws.iter().sum();
                let shares: Vec<f64> = if total > 0.0 && total.is_finite() {
                    draws.iter().map(|d| d / total).collect()
                } else {
                    // every draw underflowed: hand the class to the largest draw
                    let best = draws
                        .iter()
                        .enumerate()
                        .fold(0, |b, (i, &d)| if d > draws[b] { i } else { b });
                    (0..k).map(|i| if i == best { 1.0 } else { 0.0 }).collect()
                };
                let mut start = 0;
                for (client, size) in apportion(members.len(), &shares).into_iter().enumerate() {
                    assignment[client].extend_from_slice(&members[start..start + size]);
                    start += size;
                }
            }
            while let Some(empty) = assignment.iter().position(Vec::is_empty) {
                let donor = (0..k)
                    .max_by(|&a, &b| assignment[a].len().cmp(&assignment[b].len()).then(b.cmp(&a)))
                    .expect("k > 0");
                let moved = assignment[donor].pop().expect("donor holds samples");
                assignment[empty].push(moved);
            }
        }
    }

    Ok(assignment
        .into_iter()
        .map(|mut idx| {
            idx.sort_unstable();
            ds.subset(&idx)
        })
        .collect())
}
