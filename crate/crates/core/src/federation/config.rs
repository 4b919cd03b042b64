use serde::{Deserialize, Serialize};

use crate::data::PartitionScheme;
use crate::error::{Error, Result};
use crate::nn::{MlpSpec, TrainConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub name: String,
    #[serde(flatten)]
    pub spec: MlpSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FederationConfig {
    pub num_clients: usize,
    pub rounds: usize,
    pub client_fraction: f64,
    pub models: Vec<ModelConfig>,
    pub train: TrainConfig,
    pub partition: PartitionScheme,
    pub seed: u64,
}

impl FederationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_clients == 0 {
            return Err(Error::Config("num_clients must be at least 1".into()));
        }
        if self.num_clients > u32::MAX as usize {
            return Err(Error::Config("too many clients".into()));
        }
        if self.rounds == 0 {
            return Err(Error::Config("rounds must be at least 1".into()));
        }
        if !(self.client_fraction > 0.0 && self.client_fraction <= 1.0) {
            return Err(Error::Config(format!(
                "client_fraction must lie in (0, 1], got {}",
                self.client_fraction
            )));
        }
        if self.models.is_empty() {
            return Err(Error::Config("at least one model is required".into()));
        }
        for (i, m) in self.models.iter().enumerate() {
            if m.name.is_empty() || m.name.contains([',', '/', '\\']) {
                return Err(Error::Config(format!("invalid model name '{}'", m.name)));
            }
            if self.models[..i].iter().any(|o| o.name == m.name) {
                return Err(Error::Config(format!("duplicate model name '{}'", m.name)));
            }
            m.spec
                .validate()
                .map_err(|e| Error::Config(format!("model '{}': {e}", m.name)))?;
        }
        self.train.validate()
    }

    /// Clients trained per round: `max(1, round(client_fraction * K))`.
    pub fn selected_per_round(&self) -> usize {
        ((self.client_fraction * self.num_clients as f64).round() as usize).clamp(1, self.num_clients)
    }
}
