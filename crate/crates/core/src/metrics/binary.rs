use serde::Serialize;

use crate::error::{Error, Result};

/// One-vs-rest metrics for a single positive class.
///
/// Ratios whose denominator is zero are reported as 0 and their names are
/// listed in `degenerate`; no field is ever NaN.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BinaryMetrics {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub specificity: f64,
    pub mcc: f64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub degenerate: Vec<&'static str>,
}

struct Ratios(Vec<&'static str>);

impl Ratios {
    fn div(&mut self, name: &'static str, num: f64, den: f64) -> f64 {
        if den == 0.0 {
            self.0.push(name);
            0.0
        } else {
            num / den
        }
    }
}

pub(crate) fn harmonic(name: &'static str, p: f64, r: f64, flags: &mut Vec<&'static str>) -> f64 {
    let mut ratios = Ratios(std::mem::take(flags));
    let f1 = ratios.div(name, 2.0 * p * r, p + r);
    *flags = ratios.0;
    f1
}

pub fn binary_metrics(tp: u64, fp: u64, fn_: u64, tn: u64) -> Result<BinaryMetrics> {
    let total = tp + fp + fn_ + tn;
    if total == 0 {
        return Err(Error::Data("confusion counts are all zero".into()));
    }
    let (tp, fp, fn_, tn) = (tp as f64, fp as f64, fn_ as f64, tn as f64);
    let mut r = Ratios(Vec::new());
    let accuracy = (tp + tn) / total as f64;
    let precision = r.div("precision", tp, tp + fp);
    let recall = r.div("recall", tp, tp + fn_);
    let specificity = r.div("specificity", tn, tn + fp);
    let den = ((tp + fp) * (tp + fn_) * (tn + fp) * (tn + fn_)).sqrt();
    let mcc = r.div("mcc", tp * tn - fp * fn_, den).clamp(-1.0, 1.0);
    let mut degenerate = r.0;
    let f1 = harmonic("f1", precision, recall, &mut degenerate);
    Ok(BinaryMetrics {
        accuracy,
        precision,
        recall,
        f1,
        specificity,
        mcc,
        degenerate,
    })
}
