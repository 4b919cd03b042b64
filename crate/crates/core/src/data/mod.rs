//! Labeled datasets: synthetic generation, feature files, stratified splits
//! and client partitioning.

mod dataset;
mod feature_file;
mod partition;
mod split;
mod synth;

pub use dataset::LabeledDataset;
pub use feature_file::{load_feature_file, parse_feature_text, write_feature_file};
pub use partition::{partition_clients, PartitionPlan, PartitionScheme};
pub use split::{split_stratified, split_train_val_test, DEFAULT_SPLIT};
pub use synth::{generate_synthetic, SyntheticSpec};
