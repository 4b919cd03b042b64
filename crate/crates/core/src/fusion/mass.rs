use std::collections::BTreeMap;

use super::frame::{FrameOfDiscernment, Subset};
use crate::error::{Error, Result};

pub const MASS_SUM_TOLERANCE: f64 = 1e-9;

/// Probabilities below this share are dropped when building Bayesian masses.
const PROB_DROP: f64 = 1e-12;

/// Basic probability assignment. Only focal elements (positive mass) are
/// stored; the empty set never carries mass.
#[derive(Debug, Clone, PartialEq)]
pub struct MassFunction {
    frame: FrameOfDiscernment,
    focal: BTreeMap<Subset, f64>,
}

impl MassFunction {
    /// Builds a mass function from `(subset, mass)` pairs. Zero masses are
    /// discarded; repeated subsets are an error.
    pub fn new(frame: FrameOfDiscernment, entries: impl IntoIterator<Item = (Subset, f64)>) -> Result<Self> {
        let mut focal = BTreeMap::new();
        for (set, mass) in entries {
            if !frame.contains_subset(set) {
                return Err(Error::Evidence(format!("subset {:#b} lies outside the frame", set.0)));
            }
            if !(mass.is_finite() && (0.0..=1.0 + MASS_SUM_TOLERANCE).contains(&mass)) {
                return Err(Error::Evidence(format!("mass {mass} is outside [0, 1]")));
            }
            if mass == 0.0 {
                continue;
            }
            if set.is_empty() {
                return Err(Error::Evidence("the empty set cannot carry mass".into()));
            }
            if focal.insert(set, mass).is_some() {
                return Err(Error::Evidence(format!(
                    "subset {} assigned twice",
                    frame.display_subset(set)
                )));
            }
        }
        let total: f64 = focal.values().sum();
        if (total - 1.0).abs() > MASS_SUM_TOLERANCE {
            return Err(Error::Evidence(format!("masses sum to {total}, not 1")));
        }
        Ok(Self { frame, focal })
    }

    pub(crate) fn from_normalized(frame: FrameOfDiscernment, focal: BTreeMap<Subset, f64>) -> Self {
        debug_assert!(!focal.contains_key(&Subset::EMPTY));
        debug_assert!((focal.values().sum::<f64>() - 1.0).abs() <= MASS_SUM_TOLERANCE);
        Self { frame, focal }
    }

    /// Total ignorance: all mass on the whole frame.
    pub fn vacuous(frame: FrameOfDiscernment) -> Self {
        let omega = frame.omega();
        Self {
            frame,
            focal: BTreeMap::from([(omega, 1.0)]),
        }
    }

    pub fn frame(&self) -> &FrameOfDiscernment {
        &self.frame
    }

    /// Focal elements in ascending bitmask order.
    pub fn focal_elements(&self) -> impl Iterator<Item = (Subset, f64)> + '_ {
        self.focal.iter().map(|(&s, &m)| (s, m))
    }

    pub fn num_focal(&self) -> usize {
        self.focal.len()
    }

    pub fn mass(&self, set: Subset) -> f64 {
        self.focal.get(&set).copied().unwrap_or(0.0)
    }

    pub fn is_bayesian(&self) -> bool {
        self.focal.keys().all(|s| s.len() == 1)
    }
}

/// Bayesian mass from a (not necessarily normalized) probability vector.
pub fn mass_from_probs(frame: &FrameOfDiscernment, probs: &[f64]) -> Result<MassFunction> {
    if probs.len() != frame.len() {
        return Err(Error::Evidence(format!(
            "{} probabilities for a frame of {} labels",
            probs.len(),
            frame.len()
        )));
    }
    if let Some(p) = probs.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
        return Err(Error::Evidence(format!("probability {p} is negative or not finite")));
    }
    let total: f64 = probs.iter().sum();
    if !(total > 0.0 && total.is_finite()) {
        return Err(Error::Evidence("probability vector carries no mass".into()));
    }
    let kept: Vec<(usize, f64)> = probs
        .iter()
        .enumerate()
        .filter(|(_, &p)| p / total >= PROB_DROP)
        .map(|(i, &p)| (i, p))
        .collect();
    let kept_total: f64 = kept.iter().map(|(_, p)| p).sum();
    let focal = kept
        .into_iter()
        .map(|(i, p)| (Subset::singleton(i), p / kept_total))
        .collect();
    Ok(MassFunction::from_normalized(frame.clone(), focal))
}

/// Bel(A): total mass of non-empty subsets of `a`.
pub fn belief(m: &MassFunction, a: Subset) -> f64 {
    if a == m.frame.omega() {
        return 1.0;
    }
    m.focal_elements()
        .filter(|(b, _)| b.is_subset_of(a))
        .map(|(_, v)| v)
        .sum()
}

/// Pl(A) = 1 - Bel(complement of A), evaluated as the total mass of focal
/// elements that intersect `a`.
pub fn plausibility(m: &MassFunction, a: Subset) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    if a == m.frame.omega() {
        return 1.0;
    }
    m.focal_elements()
        .filter(|(b, _)| !b.intersect(a).is_empty())
        .map(|(_, v)| v)
        .sum::<f64>()
        .min(1.0)
}
