use serde::{Deserialize, Serialize};

use super::weights::LayerShape;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Tanh,
}

impl Activation {
    #[inline]
    pub(crate) fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::Tanh => z.tanh(),
        }
    }

    /// Derivative expressed in terms of the pre-activation `z` and the
    /// activation output `a`.
    #[inline]
    pub(crate) fn derivative(self, z: f64, a: f64) -> f64 {
        match self {
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => 1.0 - a * a,
        }
    }
}

/// Architecture of a fully connected classifier. The last width is the class
/// count; hidden layers use `activation` and the output layer is a softmax.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MlpSpec {
    pub layer_widths: Vec<usize>,
    pub activation: Activation,
    /// Index of the first layer of the trainable head. Layers below it form
    /// the backbone that transfer learning freezes.
    #[serde(default)]
    pub head_start: usize,
}

impl MlpSpec {
    pub fn new(layer_widths: Vec<usize>, activation: Activation, head_start: usize) -> Result<Self> {
        let spec = Self {
            layer_widths,
            activation,
            head_start,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.layer_widths.len() < 2 {
            return Err(Error::Config(format!(
                "an MLP needs at least two layer widths, got {}",
                self.layer_widths.len()
            )));
        }
        if let Some(pos) = self.layer_widths.iter().position(|&w| w == 0) {
            return Err(Error::Config(format!("layer width {pos} is zero")));
        }
        if self.head_start >= self.num_layers() {
            return Err(Error::Config(format!(
                "head_start {} must be below the layer count {}",
                self.head_start,
                self.num_layers()
            )));
        }
        Ok(())
    }

    pub fn num_layers(&self) -> usize {
        self.layer_widths.len().saturating_sub(1)
    }

    pub fn input_dim(&self) -> usize {
        self.layer_widths[0]
    }

    pub fn num_classes(&self) -> usize {
        *self.layer_widths.last().expect("validated spec")
    }

    pub fn layer_shapes(&self) -> Vec<LayerShape> {
        self.layer_widths
            .windows(2)
            .map(|w| LayerShape {
                rows: w[1],
                cols: w[0],
            })
            .collect()
    }

    pub fn num_params(&self) -> usize {
        self.layer_shapes().iter().map(LayerShape::num_params).sum()
    }

    /// Same architecture with a different output width.
    pub fn with_classes(&self, classes: usize) -> Self {
        let mut spec = self.clone();
        if let Some(last) = spec.layer_widths.last_mut() {
            *last = classes;
        }
        spec
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Optimizer {
    Sgd,
    Adam { beta1: f64, beta2: f64, epsilon: f64 },
}

impl Optimizer {
    pub fn adam() -> Self {
        Optimizer::Adam {
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-7,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub optimizer: Optimizer,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 10,
            batch_size: 32,
            learning_rate: 1e-3,
            optimizer: Optimizer::adam(),
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config(format!(
                "learning rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch size must be at least 1".into()));
        }
        if let Optimizer::Adam {
            beta1,
            beta2,
            epsilon,
        } = self.optimizer
        {
            let open_unit = |b: f64| b > 0.0 && b < 1.0;
            if !open_unit(beta1) || !open_unit(beta2) {
                return Err(Error::Config(format!(
                    "adam betas must lie in (0, 1), got ({beta1}, {beta2})"
                )));
            }
            if epsilon.is_nan() || epsilon <= 0.0 {
                return Err(Error::Config(format!("adam epsilon must be positive, got {epsilon}")));
            }
        }
        Ok(())
    }
}
