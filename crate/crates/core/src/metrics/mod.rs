//! Confusion matrices and classification metrics.

mod binary;
mod confusion;
mod report;

pub use binary::{binary_metrics, BinaryMetrics};
pub use confusion::{confusion_from_predictions, ConfusionMatrix};
pub use report::{macro_report, write_metrics_csv, ClassMetrics, MacroMetrics, MetricReport, AVERAGING};
