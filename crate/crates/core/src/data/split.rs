use rand::seq::SliceRandom;

use super::LabeledDataset;
use crate::error::{Error, Result};
use crate::seed;

pub const DEFAULT_SPLIT: [f64; 3] = [0.7, 0.2, 0.1];

/// Splits `total` into integer parts proportional to `fractions` using the
/// largest-remainder rule (ties go to the earlier part).
pub(crate) fn apportion(total: usize, fractions: &[f64]) -> Vec<usize> {
    let raw: Vec<f64> = fractions.iter().map(|f| f * total as f64).collect();
    let mut sizes: Vec<usize> = raw.iter().map(|r| r.floor() as usize).collect();
    let assigned: usize = sizes.iter().sum();
    let mut order: Vec<usize> = (0..fractions.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = raw[a] - raw[a].floor();
        let rb = raw[b] - raw[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &i in order.iter().take(total.saturating_sub(assigned)) {
        sizes[i] += 1;
    }
    sizes
}

/// Stratified split into parts with the given fractions.
///
/// Part sizes follow the largest-remainder rule on the total. Each class
/// contributes `floor(f * n_c)` or one more sample to every part, so class
/// proportions stay within one sample of the global ones. Which classes
/// receive the extra sample is a bipartite degree problem (classes owe their
/// leftover samples, parts need theirs filled) solved greedily by serving the
/// neediest part first from the classes with the most left over.
pub fn split_stratified(ds: &LabeledDataset, fractions: &[f64], seed: u64) -> Result<Vec<LabeledDataset>> {
    if fractions.is_empty() || fractions.iter().any(|&f| f.is_nan() || f <= 0.0) {
        return Err(Error::Config(format!("split fractions must be positive, got {fractions:?}")));
    }
    let sum: f64 = fractions.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::Config(format!("split fractions sum to {sum}, not 1")));
    }
    let by_class = ds.indices_by_class();
    for (class, members) in by_class.iter().enumerate() {
        if !members.is_empty() && members.len() < fractions.len() {
            return Err(Error::Data(format!(
                "class {} has {} samples, fewer than the {} requested splits",
                ds.class_names()[class],
                members.len(),
                fractions.len()
            )));
        }
    }

    let parts = fractions.len();
    let mut counts: Vec<Vec<usize>> = by_class
        .iter()
        .map(|m| fractions.iter().map(|f| (f * m.len() as f64).floor() as usize).collect())
        .collect();
    let mut owed: Vec<usize> = by_class
        .iter()
        .zip(&counts)
        .map(|(m, c)| m.len() - c.iter().sum::<usize>())
        .collect();
    let sizes = apportion(ds.len(), fractions);
    let mut need: Vec<usize> = (0..parts)
        .map(|j| {
            let floors: usize = counts.iter().map(|c| c[j]).sum();
            sizes[j].checked_sub(floors).expect("apportioned size below the sum of floors")
        })
        .collect();
    let mut part_order: Vec<usize> = (0..parts).collect();
    part_order.sort_by(|&a, &b| need[b].cmp(&need[a]).then(a.cmp(&b)));
    for j in part_order {
        let residual = |c: usize| fractions[j] * by_class[c].len() as f64 - counts[c][j] as f64;
        let mut donors: Vec<usize> = (0..by_class.len()).filter(|&c| owed[c] > 0).collect();
        donors.sort_by(|&a, &b| {
            owed[b]
                .cmp(&owed[a])
                .then(residual(b).total_cmp(&residual(a)))
                .then(a.cmp(&b))
        });
        if donors.len() < need[j] {
            return Err(Error::Data("no stratified split satisfies the requested fractions".into()));
        }
        for &c in &donors[..need[j]] {
            counts[c][j] += 1;
            owed[c] -= 1;
        }
        need[j] = 0;
    }

    let mut chosen: Vec<Vec<usize>> = vec![Vec::new(); parts];
    for (class, mut members) in by_class.into_iter().enumerate() {
        members.shuffle(&mut seed::rng(seed, &[seed::TAG_SPLIT, class as u64]));
        let mut start = 0;
        for (j, &n) in counts[class].iter().enumerate() {
            chosen[j].extend_from_slice(&members[start..start + n]);
            start += n;
        }
    }
    Ok(chosen
        .into_iter()
        .map(|mut idx| {
            idx.sort_unstable();
            ds.subset(&idx)
        })
        .collect())
}

pub fn split_train_val_test(
    ds: &LabeledDataset,
    fractions: [f64; 3],
    seed: u64,
) -> Result<(LabeledDataset, LabeledDataset, LabeledDataset)> {
    let mut parts = split_stratified(ds, &fractions, seed)?.into_iter();
    match (parts.next(), parts.next(), parts.next()) {
        (Some(a), Some(b), Some(c)) => Ok((a, b, c)),
        _ => unreachable!("three fractions give three parts"),
    }
}
