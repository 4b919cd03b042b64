use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::nn::WeightVector;

/// One client's contribution to an aggregation round.
#[derive(Debug, Clone, PartialEq)]
pub struct ClientUpdate {
    pub client_id: u32,
    pub weights: WeightVector,
    /// Local sample count `d_k`.
    pub samples: usize,
}

fn canonical(a: &ClientUpdate, b: &ClientUpdate) -> Ordering {
    a.client_id
        .cmp(&b.client_id)
        .then(a.samples.cmp(&b.samples))
        .then_with(|| {
            a.weights
                .values()
                .iter()
                .zip(b.weights.values())
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(Ordering::Equal)
        })
}

/// Sample-weighted average `sum_k (d_k / D) w_k` with `D = sum_k d_k`.
///
/// Updates are accumulated in ascending client id order (ties broken by
/// sample count, then by parameter values), so the result is bit-identical
/// for every permutation of `updates`. Each coordinate is clamped into the
/// range spanned by the inputs.
pub fn fed_avg(updates: &[ClientUpdate]) -> Result<WeightVector> {
    let first = updates
        .first()
        .ok_or_else(|| Error::Protocol("no client updates to aggregate".into()))?;
    for u in updates {
        if u.weights.shapes() != first.weights.shapes() {
            return Err(Error::Shape(format!(
                "client {} sent shapes {:?}, expected {:?}",
                u.client_id,
                u.weights.shapes(),
                first.weights.shapes()
            )));
        }
        if u.samples == 0 {
            return Err(Error::Protocol(format!("client {} reports zero samples", u.client_id)));
        }
    }
    let mut ordered: Vec<&ClientUpdate> = updates.iter().collect();
    ordered.sort_by(|a, b| canonical(a, b));

    let total: u64 = ordered.iter().map(|u| u.samples as u64).sum();
    let coeffs: Vec<f64> = ordered.iter().map(|u| u.samples as f64 / total as f64).collect();
    debug_assert!((coeffs.iter().sum::<f64>() - 1.0).abs() <= 1e-12);

    let mut out: Vec<f64> = ordered[0].weights.values().iter().map(|v| coeffs[0] * v).collect();
    for (u, &c) in ordered.iter().zip(&coeffs).skip(1) {
        out.iter_mut().zip(u.weights.values()).for_each(|(o, v)| *o += c * v);
    }
    for (i, o) in out.iter_mut().enumerate() {
        let (lo, hi) = ordered.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), u| {
            let v = u.weights.values()[i];
            (lo.min(v), hi.max(v))
        });
        *o = o.clamp(lo, hi);
    }
    WeightVector::new(out, first.weights.shapes().to_vec())
}

/// [`fed_avg`] over anonymous `(weights, d_k)` pairs.
pub fn fed_avg_weighted(updates: &[(WeightVector, usize)]) -> Result<WeightVector> {
    let tagged: Vec<ClientUpdate> = updates
        .iter()
        .map(|(w, d)| ClientUpdate {
            client_id: 0,
            weights: w.clone(),
            samples: *d,
        })
        .collect();
    fed_avg(&tagged)
}
