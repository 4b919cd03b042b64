use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::LabeledDataset;
use crate::error::{Error, Result};
use crate::seed;

/// Gaussian-cluster classification task.
///
/// There are `classes * clusters_per_class` clusters; cluster `k` belongs to
/// class `k % classes`. Centers are drawn uniformly from `[-1, 1]^dim`, one
/// after another, from a stream keyed by `center_seed` (or `seed` when
/// absent). Two specs sharing a `center_seed` therefore share their leading
/// centers, which is how related source and target tasks are built: a
/// six-class source and a three-class target with two clusters per class see
/// the same six clusters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub classes: usize,
    pub dim: usize,
    pub samples_per_class: usize,
    pub cluster_spread: f64,
    pub label_noise: f64,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center_seed: Option<u64>,
    #[serde(default = "one")]
    pub clusters_per_class: usize,
}

fn one() -> usize {
    1
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if self.classes < 2 {
            return Err(Error::Config(format!("need at least 2 classes, got {}", self.classes)));
        }
        if self.dim < 2 {
            return Err(Error::Config(format!("need at least 2 dimensions, got {}", self.dim)));
        }
        if self.clusters_per_class == 0 {
            return Err(Error::Config("clusters_per_class must be at least 1".into()));
        }
        if self.samples_per_class == 0 {
            return Err(Error::Config("samples_per_class must be positive".into()));
        }
        if !(self.cluster_spread > 0.0 && self.cluster_spread.is_finite()) {
            return Err(Error::Config(format!(
                "cluster spread must be positive, got {}",
                self.cluster_spread
            )));
        }
        if !(0.0..0.5).contains(&self.label_noise) {
            return Err(Error::Config(format!(
                "label noise must lie in [0, 0.5), got {}",
                self.label_noise
            )));
        }
        Ok(())
    }

    pub fn centers(&self) -> Vec<Vec<f64>> {
        let mut rng = seed::rng(self.center_seed.unwrap_or(self.seed), &[seed::TAG_CENTERS]);
        (0..self.classes * self.clusters_per_class)
            .map(|_| (0..self.dim).map(|_| rng.random_range(-1.0..=1.0)).collect())
            .collect()
    }

    /// Samples are emitted class by class, cycling through the class's
    /// clusters. Each label is independently
    /// replaced, with probability `label_noise`, by a different class chosen
    /// uniformly.
    pub fn generate(&self) -> Result<LabeledDataset> {
        self.validate()?;
        let centers = self.centers();
        let noise = Normal::new(0.0, self.cluster_spread).map_err(|e| Error::Config(e.to_string()))?;
        let mut sample_rng = seed::rng(self.seed, &[seed::TAG_SAMPLES]);
        let mut flip_rng = seed::rng(self.seed, &[seed::TAG_NOISE]);

        let n = self.classes * self.samples_per_class;
        let mut features = Vec::with_capacity(n * self.dim);
        let mut labels = Vec::with_capacity(n);
        for class in 0..self.classes {
            for i in 0..self.samples_per_class {
                let center = &centers[class + self.classes * (i % self.clusters_per_class)];
                features.extend(center.iter().map(|c| c + noise.sample(&mut sample_rng)));
                let mut label = class;
                if flip_rng.random::<f64>() < self.label_noise {
                    let other = flip_rng.random_range(0..self.classes - 1);
                    label = if other >= class { other + 1 } else { other };
                }
                labels.push(label);
            }
        }
        let names = (0..self.classes).map(|c| format!("class_{c}")).collect();
        LabeledDataset::new(features, self.dim, labels, names)
    }
}

pub fn generate_synthetic(
    classes: usize,
    dim: usize,
    samples_per_class: usize,
    cluster_spread: f64,
    label_noise: f64,
    seed: u64,
) -> Result<LabeledDataset> {
    SyntheticSpec {
        classes,
        dim,
        samples_per_class,
        cluster_spread,
        label_noise,
        seed,
        center_seed: None,
        clusters_per_class: 1,
    }
    .generate()
}
