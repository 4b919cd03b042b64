use std::collections::BTreeMap;

use serde::Serialize;

use super::frame::Subset;
use super::mass::MassFunction;
use super::TOTAL_CONFLICT_MARGIN;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CombinationResult {
    pub combined: MassFunction,
    /// Conflict K in `[0, 1)`. For folds this is the cumulative
    /// `1 - prod(1 - K_step)`.
    pub conflict: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Decision {
    pub class_index: usize,
    pub label: String,
    pub belief: f64,
}

fn check_frames(a: &MassFunction, b: &MassFunction) -> Result<()> {
    if a.frame() != b.frame() {
        return Err(Error::Evidence(format!(
            "frame mismatch: {:?} vs {:?}",
            a.frame().labels(),
            b.frame().labels()
        )));
    }
    Ok(())
}

fn normalize(
    m: &MassFunction,
    mut acc: BTreeMap<Subset, f64>,
    conflict: f64,
    step: usize,
) -> Result<CombinationResult> {
    if conflict >= 1.0 - TOTAL_CONFLICT_MARGIN {
        return Err(Error::TotalConflict { step, conflict });
    }
    acc.retain(|_, v| *v > 0.0);
    if conflict > 0.0 {
        // equals 1 - K, but summing what survives keeps the total at 1 when
        // K is close to 1
        let scale: f64 = acc.values().sum();
        acc.values_mut().for_each(|v| *v /= scale);
    }
    Ok(CombinationResult {
        combined: MassFunction::from_normalized(m.frame().clone(), acc),
        conflict,
    })
}

fn dempster(m1: &MassFunction, m2: &MassFunction, step: usize) -> Result<CombinationResult> {
    check_frames(m1, m2)?;
    let mut acc: BTreeMap<Subset, f64> = BTreeMap::new();
    let mut conflict = 0.0;
    for (a, ma) in m1.focal_elements() {
        for (b, mb) in m2.focal_elements() {
            let product = ma * mb;
            let meet = a.intersect(b);
            if meet.is_empty() {
                conflict += product;
            } else {
                *acc.entry(meet).or_insert(0.0) += product;
            }
        }
    }
    normalize(m1, acc, conflict, step)
}

/// Dempster's rule of combination, `m1 ⊕ m2`.
pub fn ds_combine(m1: &MassFunction, m2: &MassFunction) -> Result<CombinationResult> {
    dempster(m1, m2, 1)
}

/// Left fold of [`ds_combine`]. A total-conflict error carries the index of
/// the mass whose combination failed.
pub fn combine_all(masses: &[MassFunction]) -> Result<CombinationResult> {
    let (first, rest) = masses
        .split_first()
        .ok_or_else(|| Error::Evidence("nothing to combine".into()))?;
    let mut acc = CombinationResult {
        combined: first.clone(),
        conflict: 0.0,
    };
    let mut agreement = 1.0;
    for (i, m) in rest.iter().enumerate() {
        let step = dempster(&acc.combined, m, i + 1)?;
        agreement *= 1.0 - step.conflict;
        acc = CombinationResult {
            combined: step.combined,
            conflict: 1.0 - agreement,
        };
    }
    Ok(acc)
}

/// All sources combined at once: the conjunctive products of every focal
/// tuple are accumulated and normalized a single time by `1 - K`, where `K`
/// is the mass of all tuples with empty intersection.
pub fn combine_joint(masses: &[MassFunction]) -> Result<CombinationResult> {
    let first = masses
        .first()
        .ok_or_else(|| Error::Evidence("nothing to combine".into()))?;
    let mut acc: BTreeMap<Subset, f64> = BTreeMap::from([(first.frame().omega(), 1.0)]);
    for m in masses {
        check_frames(first, m)?;
        let mut next: BTreeMap<Subset, f64> = BTreeMap::new();
        for (&a, &ma) in &acc {
            for (b, mb) in m.focal_elements() {
                *next.entry(a.intersect(b)).or_insert(0.0) += ma * mb;
            }
        }
        acc = next;
    }
    let conflict = acc.remove(&Subset::EMPTY).unwrap_or(0.0);
    normalize(first, acc, conflict, masses.len() - 1)
}

/// Max-belief decision over singleton classes; the lowest frame index wins
/// ties.
pub fn decide_max_belief(result: &CombinationResult) -> Decision {
    let m = &result.combined;
    let frame = m.frame();
    let mut best = (0, m.mass(Subset::singleton(0)));
    for i in 1..frame.len() {
        let bel = m.mass(Subset::singleton(i));
        if bel > best.1 {
            best = (i, bel);
        }
    }
    Decision {
        class_index: best.0,
        label: frame.label(best.0).to_string(),
        belief: best.1,
    }
}
