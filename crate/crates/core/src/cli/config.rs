//! Experiment configuration file.
//!
//! A single TOML document with one table per module. Every seed in the run
//! is derived from the top-level `seed`, so `--seed` changes the whole
//! experiment consistently.

use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::data::{
    load_feature_file, split_train_val_test, LabeledDataset, PartitionScheme, SyntheticSpec, DEFAULT_SPLIT,
};
use crate::error::{Error, Result};
use crate::federation::{FederationConfig, ModelConfig};
use crate::nn::{Optimizer, TrainConfig};
use crate::seed;

const STREAM_DATA: u64 = 1;
const STREAM_SOURCE: u64 = 2;
const STREAM_TRANSFER: u64 = 3;
const STREAM_SCALING: u64 = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: u64,
    pub dataset: DatasetSection,
    pub federation: FederationSection,
    #[serde(default)]
    pub centralized: CentralizedSection,
    #[serde(default)]
    pub transfer: TransferSection,
    #[serde(default)]
    pub fusion: FusionSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub scaling: ScalingSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSection {
    pub source: DatasetSource,
    #[serde(default = "default_split")]
    pub split: [f64; 3],
}

fn default_split() -> [f64; 3] {
    DEFAULT_SPLIT
}

/// Where samples come from. A relative feature-file path is resolved against
/// the directory holding the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum DatasetSource {
    Synthetic(SyntheticSection),
    File { path: PathBuf },
}

/// Gaussian clusters. Centers come from `center_seed`, or from the
/// experiment seed when absent, so a transfer source task configured without
/// its own `center_seed` shares its leading class centers with the target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSection {
    pub classes: usize,
    pub dim: usize,
    pub samples_per_class: usize,
    pub cluster_spread: f64,
    #[serde(default)]
    pub label_noise: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center_seed: Option<u64>,
    #[serde(default = "one_cluster")]
    pub clusters_per_class: usize,
}

fn one_cluster() -> usize {
    1
}

impl SyntheticSection {
    pub fn spec(&self, experiment_seed: u64, stream: u64) -> SyntheticSpec {
        SyntheticSpec {
            classes: self.classes,
            dim: self.dim,
            samples_per_class: self.samples_per_class,
            cluster_spread: self.cluster_spread,
            label_noise: self.label_noise,
            seed: seed::derive(experiment_seed, &[stream]),
            center_seed: Some(self.center_seed.unwrap_or(experiment_seed)),
            clusters_per_class: self.clusters_per_class,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainSection {
    #[serde(default = "default_epochs")]
    pub epochs: usize,
    #[serde(default = "default_batch")]
    pub batch_size: usize,
    #[serde(default = "default_lr")]
    pub learning_rate: f64,
    #[serde(default = "Optimizer::adam")]
    pub optimizer: Optimizer,
}

fn default_epochs() -> usize {
    TrainConfig::default().epochs
}

fn default_batch() -> usize {
    TrainConfig::default().batch_size
}

fn default_lr() -> f64 {
    TrainConfig::default().learning_rate
}

impl Default for TrainSection {
    fn default() -> Self {
        Self {
            epochs: default_epochs(),
            batch_size: default_batch(),
            learning_rate: default_lr(),
            optimizer: Optimizer::adam(),
        }
    }
}

impl TrainSection {
    pub fn with_seed(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            epochs: self.epochs,
            batch_size: self.batch_size,
            learning_rate: self.learning_rate,
            optimizer: self.optimizer,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FederationSection {
    pub num_clients: usize,
    pub rounds: usize,
    #[serde(default = "one")]
    pub client_fraction: f64,
    #[serde(default = "iid")]
    pub partition: PartitionScheme,
    #[serde(default)]
    pub train: TrainSection,
    pub models: Vec<ModelConfig>,
}

fn one() -> f64 {
    1.0
}

fn iid() -> PartitionScheme {
    PartitionScheme::Iid
}

/// Pooled-data baseline trained with the federation's total epoch budget.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CentralizedSection {
    #[serde(default)]
    pub enabled: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransferSection {
    #[serde(default)]
    pub enabled: bool,
    /// Source task. Must have the target's feature dimension.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<DatasetSource>,
    #[serde(default)]
    pub train: TrainSection,
    /// Overrides every model's `head_start`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub head_start: Option<usize>,
    /// Also run a random-init federation and report rounds to
    /// `target_accuracy` for both.
    #[serde(default)]
    pub compare_random: bool,
    #[serde(default = "default_target")]
    pub target_accuracy: f64,
}

fn default_target() -> f64 {
    0.85
}

impl Default for TransferSection {
    fn default() -> Self {
        Self {
            enabled: false,
            source: None,
            train: TrainSection::default(),
            head_start: None,
            compare_random: false,
            target_accuracy: default_target(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FusionSection {
    #[serde(default = "yes")]
    pub enabled: bool,
    /// Models to fuse; empty means all of them.
    #[serde(default)]
    pub models: Vec<String>,
}

fn yes() -> bool {
    true
}

impl Default for FusionSection {
    fn default() -> Self {
        Self {
            enabled: true,
            models: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_out")]
    pub dir: PathBuf,
    /// Also checkpoint every N rounds. 0 writes only the final models.
    #[serde(default)]
    pub checkpoint_every: usize,
    /// Fill the round log's `duration_ms` column. Off by default because
    /// wall time makes otherwise identical logs differ.
    #[serde(default)]
    pub record_wall_time: bool,
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: default_out(),
            checkpoint_every: 0,
            record_wall_time: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingSection {
    #[serde(default = "default_counts")]
    pub client_counts: Vec<usize>,
    #[serde(default = "default_per_client")]
    pub samples_per_client: usize,
    #[serde(default = "default_scaling_rounds")]
    pub rounds: usize,
    /// Upper bound on time(largest count) / time(smallest count).
    #[serde(default = "default_threshold")]
    pub threshold: f64,
}

fn default_counts() -> Vec<usize> {
    vec![10, 15, 20, 25, 30]
}

fn default_per_client() -> usize {
    100
}

fn default_scaling_rounds() -> usize {
    3
}

fn default_threshold() -> f64 {
    3.0
}

impl Default for ScalingSection {
    fn default() -> Self {
        Self {
            client_counts: default_counts(),
            samples_per_client: default_per_client(),
            rounds: default_scaling_rounds(),
            threshold: default_threshold(),
        }
    }
}

/// Train, validation and test sets of an experiment.
#[derive(Debug, Clone)]
pub struct Splits {
    pub train: LabeledDataset,
    pub val: LabeledDataset,
    pub test: LabeledDataset,
}

impl ExperimentConfig {
    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let mut cfg: Self = toml::from_str(text).map_err(|e| {
            let line = e
                .span()
                .map(|s| text[..s.start.min(text.len())].lines().count().max(1))
                .unwrap_or(0);
            Error::parse(origin, line, e.message().to_string())
        })?;
        let base = origin.parent().unwrap_or(Path::new(""));
        cfg.resolve_paths(base);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |src: &mut DatasetSource| {
            if let DatasetSource::File { path } = src {
                if path.is_relative() {
                    *path = base.join(&*path);
                }
            }
        };
        fix(&mut self.dataset.source);
        if let Some(src) = &mut self.transfer.source {
            fix(src);
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.federation_config().validate()?;
        if let DatasetSource::Synthetic(s) = &self.dataset.source {
            s.spec(self.seed, STREAM_DATA).validate()?;
        }
        for name in &self.fusion.models {
            if !self.federation.models.iter().any(|m| &m.name == name) {
                return Err(Error::Config(format!("fusion references unknown model '{name}'")));
            }
        }
        if self.transfer.enabled {
            match &self.transfer.source {
                None => return Err(Error::Config("transfer is enabled but has no source task".into())),
                Some(DatasetSource::Synthetic(s)) => s.spec(self.seed, STREAM_SOURCE).validate()?,
                Some(DatasetSource::File { .. }) => {}
            }
            self.transfer_train_config().validate()?;
            for m in &self.models_for_transfer() {
                m.spec.validate()?;
            }
            if !(self.transfer.target_accuracy > 0.0 && self.transfer.target_accuracy <= 1.0) {
                return Err(Error::Config("transfer target_accuracy must lie in (0, 1]".into()));
            }
        }
        if self.scaling.client_counts.is_empty() || self.scaling.client_counts.contains(&0) {
            return Err(Error::Config("scaling client_counts must be non-empty and positive".into()));
        }
        if self.scaling.samples_per_client == 0 || self.scaling.rounds == 0 {
            return Err(Error::Config("scaling samples_per_client and rounds must be positive".into()));
        }
        if self.scaling.threshold.is_nan() || self.scaling.threshold <= 0.0 {
            return Err(Error::Config("scaling threshold must be positive".into()));
        }
        Ok(())
    }

    /// Model list after the transfer `head_start` override.
    pub fn models_for_transfer(&self) -> Vec<ModelConfig> {
        let mut models = self.federation.models.clone();
        if let Some(h) = self.transfer.head_start {
            for m in &mut models {
                m.spec.head_start = h;
            }
        }
        models
    }

    pub fn federation_config(&self) -> FederationConfig {
        let f = &self.federation;
        FederationConfig {
            num_clients: f.num_clients,
            rounds: f.rounds,
            client_fraction: f.client_fraction,
            models: f.models.clone(),
            train: f.train.with_seed(self.seed),
            partition: f.partition,
            seed: self.seed,
        }
    }

    pub fn transfer_train_config(&self) -> TrainConfig {
        self.transfer
            .train
            .with_seed(seed::derive(self.seed, &[STREAM_TRANSFER]))
    }

    /// Models whose decisions are fused, in configuration order.
    pub fn fused_models(&self) -> Vec<String> {
        if self.fusion.models.is_empty() {
            self.federation.models.iter().map(|m| m.name.clone()).collect()
        } else {
            self.fusion.models.clone()
        }
    }

    pub fn load_splits(&self) -> Result<Splits> {
        let all = load_source(&self.dataset.source, self.seed, STREAM_DATA)?;
        let (train, val, test) = split_train_val_test(&all, self.dataset.split, self.seed)?;
        Ok(Splits { train, val, test })
    }

    pub fn load_transfer_source(&self) -> Result<Option<LabeledDataset>> {
        match (&self.transfer.source, self.transfer.enabled) {
            (Some(src), true) => load_source(src, self.seed, STREAM_SOURCE).map(Some),
            _ => Ok(None),
        }
    }

    /// Training pool of roughly `clients * samples_per_client` samples for
    /// one scaling run. Synthetic tasks are regenerated at the needed size
    /// from the experiment's centers; file datasets are subsampled.
    pub fn scaling_pool(&self, clients: usize, splits: &Splits) -> Result<LabeledDataset> {
        let wanted = clients * self.scaling.samples_per_client;
        match &self.dataset.source {
            DatasetSource::Synthetic(s) => {
                let mut spec = s.spec(self.seed, STREAM_DATA);
                spec.samples_per_class = wanted.div_ceil(s.classes);
                spec.seed = seed::derive(self.seed, &[STREAM_SCALING, clients as u64]);
                let pool = spec.generate()?;
                Ok(take_random(&pool, wanted, self.seed, clients))
            }
            DatasetSource::File { path } => {
                if splits.train.len() < wanted {
                    return Err(Error::Config(format!(
                        "{} has {} training samples, scaling to {clients} clients needs {wanted}",
                        path.display(),
                        splits.train.len()
                    )));
                }
                Ok(take_random(&splits.train, wanted, self.seed, clients))
            }
        }
    }
}

/// `n` samples drawn without replacement, kept in their original order.
fn take_random(ds: &LabeledDataset, n: usize, seed: u64, clients: usize) -> LabeledDataset {
    let mut idx: Vec<usize> = (0..ds.len()).collect();
    idx.shuffle(&mut seed::rng(seed, &[STREAM_SCALING, clients as u64]));
    idx.truncate(n);
    idx.sort_unstable();
    ds.subset(&idx)
}

fn load_source(src: &DatasetSource, experiment_seed: u64, stream: u64) -> Result<LabeledDataset> {
    match src {
        DatasetSource::Synthetic(s) => s.spec(experiment_seed, stream).generate(),
        DatasetSource::File { path } => load_feature_file(path),
    }
}
