use std::io::Write;

use serde::Serialize;

use super::binary::{binary_metrics, harmonic, BinaryMetrics};
use super::confusion::ConfusionMatrix;
use crate::error::{Error, Result};

/// Averaging applied to the multi-class summary.
pub const AVERAGING: &str = "macro";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassMetrics {
    pub class: usize,
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
    #[serde(flatten)]
    pub metrics: BinaryMetrics,
}

/// Unweighted means over classes. `accuracy` is trace/total and `f1` is the
/// harmonic mean of the macro precision and recall.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MacroMetrics {
    pub averaging: &'static str,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub specificity: f64,
    pub mcc: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricReport {
    pub per_class: Vec<ClassMetrics>,
    #[serde(rename = "macro")]
    pub macro_avg: MacroMetrics,
}

pub fn macro_report(cm: &ConfusionMatrix) -> Result<MetricReport> {
    let total = cm.total();
    if total == 0 || cm.num_classes() == 0 {
        return Err(Error::Data("confusion matrix is empty".into()));
    }
    let per_class = (0..cm.num_classes())
        .map(|c| {
            let (tp, fp, fn_, tn) = cm.one_vs_rest(c);
            Ok(ClassMetrics {
                class: c,
                tp,
                fp,
                fn_,
                tn,
                metrics: binary_metrics(tp, fp, fn_, tn)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let n = per_class.len() as f64;
    let mean = |f: fn(&BinaryMetrics) -> f64| per_class.iter().map(|c| f(&c.metrics)).sum::<f64>() / n;
    let precision = mean(|m| m.precision);
    let recall = mean(|m| m.recall);
    let f1 = harmonic("f1", precision, recall, &mut Vec::new());
    let macro_avg = MacroMetrics {
        averaging: AVERAGING,
        accuracy: cm.trace() as f64 / total as f64,
        precision,
        recall,
        f1,
        specificity: mean(|m| m.specificity),
        mcc: mean(|m| m.mcc),
    };
    Ok(MetricReport { per_class, macro_avg })
}

/// CSV with one row per class followed by a `macro` row (counts left blank).
pub fn write_metrics_csv<W: Write>(report: &MetricReport, class_names: &[String], out: W) -> Result<()> {
    let io = |e: csv::Error| Error::Data(format!("writing metrics csv: {e}"));
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["class", "tp", "fp", "fn", "tn", "precision", "recall", "f1", "specificity", "mcc"])
        .map_err(io)?;
    for c in &report.per_class {
        let name = class_names.get(c.class).cloned().unwrap_or_else(|| c.class.to_string());
        let m = &c.metrics;
        w.write_record([
            name,
            c.tp.to_string(),
            c.fp.to_string(),
            c.fn_.to_string(),
            c.tn.to_string(),
            m.precision.to_string(),
            m.recall.to_string(),
            m.f1.to_string(),
            m.specificity.to_string(),
            m.mcc.to_string(),
        ])
        .map_err(io)?;
    }
    let m = &report.macro_avg;
    w.write_record([
        AVERAGING.to_string(),
        String::new(),
        String::new(),
        String::new(),
        String::new(),
        m.precision.to_string(),
        m.recall.to_string(),
        m.f1.to_string(),
        m.specificity.to_string(),
        m.mcc.to_string(),
    ])
    .map_err(io)?;
    w.flush().map_err(|e| Error::Data(format!("writing metrics csv: {e}")))
}
