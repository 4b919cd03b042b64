use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::model::{accumulate_gradient, cross_entropy, trace};
use super::spec::{MlpSpec, Optimizer, TrainConfig};
use super::weights::WeightVector;
use crate::data::LabeledDataset;
use crate::error::{Error, Result};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub loss: f64,
    pub accuracy: f64,
}

fn check_data(spec: &MlpSpec, data: &LabeledDataset) -> Result<()> {
    if data.is_empty() {
        return Err(Error::Data("dataset is empty".into()));
    }
    if data.dim() != spec.input_dim() {
        return Err(Error::Shape(format!(
            "dataset has {} features, model expects {}",
            data.dim(),
            spec.input_dim()
        )));
    }
    if let Some(bad) = data.labels().iter().position(|&y| y >= spec.num_classes()) {
        return Err(Error::Data(format!(
            "sample {bad} has label {} but the model has {} classes",
            data.labels()[bad],
            spec.num_classes()
        )));
    }
    Ok(())
}

pub(crate) fn argmax(p: &[f64]) -> usize {
    // first index wins ties
    p.iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, &v)| if v > best.1 { (i, v) } else { best })
        .0
}

/// Mean cross-entropy and argmax accuracy of `w` on `data`.
pub fn evaluate(w: &WeightVector, spec: &MlpSpec, data: &LabeledDataset) -> Result<Evaluation> {
    w.check_spec(spec)?;
    check_data(spec, data)?;
    let mut loss = 0.0;
    let mut correct = 0usize;
    for i in 0..data.len() {
        let t = trace(w, spec, data.features(i));
        let y = data.label(i);
        loss += cross_entropy(t.probs(), y);
        if argmax(t.probs()) == y {
            correct += 1;
        }
    }
    Ok(Evaluation {
        loss: loss / data.len() as f64,
        accuracy: correct as f64 / data.len() as f64,
    })
}

enum Stepper {
    Sgd {
        lr: f64,
    },
    Adam {
        lr: f64,
        beta1: f64,
        beta2: f64,
        epsilon: f64,
        step: i32,
        m: Vec<f64>,
        v: Vec<f64>,
    },
}

impl Stepper {
    fn new(cfg: &TrainConfig, trainable: usize) -> Self {
        match cfg.optimizer {
            Optimizer::Sgd => Stepper::Sgd {
                lr: cfg.learning_rate,
            },
            Optimizer::Adam {
                beta1,
                beta2,
                epsilon,
            } => Stepper::Adam {
                lr: cfg.learning_rate,
                beta1,
                beta2,
                epsilon,
                step: 0,
                m: vec![0.0; trainable],
                v: vec![0.0; trainable],
            },
        }
    }

    fn apply(&mut self, params: &mut [f64], grad: &[f64]) {
        match self {
            Stepper::Sgd { lr } => {
                params.iter_mut().zip(grad).for_each(|(p, g)| *p -= *lr * g);
            }
            Stepper::Adam {
                lr,
                beta1,
                beta2,
                epsilon,
                step,
                m,
                v,
            } => {
                *step += 1;
                let c1 = 1.0 - beta1.powi(*step);
                let c2 = 1.0 - beta2.powi(*step);
                for i in 0..params.len() {
                    let g = grad[i];
                    m[i] = *beta1 * m[i] + (1.0 - *beta1) * g;
                    v[i] = *beta2 * v[i] + (1.0 - *beta2) * g * g;
                    let m_hat = m[i] / c1;
                    let v_hat = v[i] / c2;
                    params[i] -= *lr * m_hat / (v_hat.sqrt() + *epsilon);
                }
            }
        }
    }
}

/// Mini-batch training on one client's data.
///
/// Layers with index below `frozen_below` are never touched. Optimizer state
/// starts fresh on every call. Each epoch visits the samples in an order
/// drawn from a stream keyed by `(cfg.seed, epoch)`. The returned loss is the
/// mean per-sample cross-entropy observed during the final epoch, or the
/// evaluation loss of the input weights when `cfg.epochs == 0`.
pub fn train_local(
    w: &WeightVector,
    spec: &MlpSpec,
    data: &LabeledDataset,
    cfg: &TrainConfig,
    frozen_below: usize,
) -> Result<(WeightVector, f64)> {
    spec.validate()?;
    cfg.validate()?;
    w.check_spec(spec)?;
    check_data(spec, data)?;
    if frozen_below > spec.num_layers() {
        return Err(Error::Config(format!(
            "cannot freeze {frozen_below} layers of a {}-layer model",
            spec.num_layers()
        )));
    }
    if cfg.epochs == 0 {
        return Ok((w.clone(), evaluate(w, spec, data)?.loss));
    }

    let mut current = w.clone();
    let trainable_start = current.layer_offset(frozen_below);
    let total = current.len();
    let mut stepper = Stepper::new(cfg, total - trainable_start);
    let mut grad = vec![0.0; total];
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut epoch_loss = 0.0;

    for epoch in 0..cfg.epochs {
        order.sort_unstable();
        order.shuffle(&mut seed::rng(cfg.seed, &[seed::TAG_SHUFFLE, epoch as u64]));
        let mut loss_sum = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            grad[trainable_start..].iter_mut().for_each(|g| *g = 0.0);
            for &i in batch {
                loss_sum += accumulate_gradient(
                    &current,
                    spec,
                    data.features(i),
                    data.label(i),
                    frozen_below,
                    &mut grad,
                );
            }
            let scale = 1.0 / batch.len() as f64;
            grad[trainable_start..].iter_mut().for_each(|g| *g *= scale);
            if trainable_start < total {
                stepper.apply(&mut current.values_mut()[trainable_start..], &grad[trainable_start..]);
            }
        }
        epoch_loss = loss_sum / data.len() as f64;
        if !epoch_loss.is_finite() {
            return Err(Error::Divergence { epoch });
        }
    }
    if !current.is_finite() {
        return Err(Error::Divergence {
            epoch: cfg.epochs - 1,
        });
    }
    Ok((current, epoch_loss))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{init_model, Activation, LayerShape};

    fn blobs() -> LabeledDataset {
        let mut features = Vec::new();
        let mut labels = Vec::new();
        for i in 0..40 {
            let t = i as f64 / 40.0;
            features.push(vec![2.0 + t, 1.5 - t]);
            labels.push(0);
            features.push(vec![-2.0 - t, -1.0 + t]);
            labels.push(1);
        }
        LabeledDataset::from_rows(features, labels, vec!["a".into(), "b".into()]).unwrap()
    }

    fn sgd(epochs: usize) -> TrainConfig {
        TrainConfig {
            epochs,
            batch_size: 8,
            learning_rate: 0.05,
            optimizer: Optimizer::Sgd,
            seed: 3,
        }
    }

    #[test]
    fn fully_frozen_model_is_unchanged() {
        let data = blobs();
        let spec = MlpSpec::new(vec![2, 4, 2], Activation::Tanh, 0).unwrap();
        let w = init_model(&spec, 1).unwrap();
        let (out, _) = train_local(&w, &spec, &data, &sgd(5), 2).unwrap();
        assert_eq!(out, w);
    }

    #[test]
    fn partial_freeze_keeps_lower_layers_bit_identical() {
        let data = blobs();
        let spec = MlpSpec::new(vec![2, 4, 3, 2], Activation::Relu, 0).unwrap();
        let w = init_model(&spec, 5).unwrap();
        let (out, _) = train_local(&w, &spec, &data, &sgd(3), 2).unwrap();
        let cut = w.layer_offset(2);
        let same = w.values()[..cut]
            .iter()
            .zip(&out.values()[..cut])
            .all(|(a, b)| a.to_bits() == b.to_bits());
        assert!(same);
        assert_ne!(w.values()[cut..], out.values()[cut..]);
    }

    #[test]
    fn loss_decreases_on_separable_blobs() {
        let data = blobs();
        let spec = MlpSpec::new(vec![2, 2], Activation::Relu, 0).unwrap();
        let w = init_model(&spec, 2).unwrap();
        let initial = evaluate(&w, &spec, &data).unwrap().loss;
        let (out, last_epoch) = train_local(&w, &spec, &data, &sgd(20), 0).unwrap();
        assert!(last_epoch < initial);
        let after = evaluate(&out, &spec, &data).unwrap();
        assert!(after.loss < initial);
        assert_eq!(after.accuracy, 1.0);
    }

    #[test]
    fn zero_epochs_is_a_no_op() {
        let data = blobs();
        let spec = MlpSpec::new(vec![2, 3, 2], Activation::Tanh, 0).unwrap();
        let w = init_model(&spec, 9).unwrap();
        let (out, loss) = train_local(&w, &spec, &data, &sgd(0), 0).unwrap();
        assert_eq!(out, w);
        assert_eq!(loss, evaluate(&w, &spec, &data).unwrap().loss);
    }

    #[test]
    fn training_is_deterministic() {
        let data = blobs();
        let spec = MlpSpec::new(vec![2, 5, 2], Activation::Relu, 0).unwrap();
        let w = init_model(&spec, 4).unwrap();
        let cfg = TrainConfig {
            optimizer: Optimizer::adam(),
            ..sgd(4)
        };
        let a = train_local(&w, &spec, &data, &cfg, 0).unwrap();
        let b = train_local(&w, &spec, &data, &cfg, 0).unwrap();
        assert_eq!(a.0, b.0);
        assert_eq!(a.1.to_bits(), b.1.to_bits());
    }

    #[test]
    fn exploding_learning_rate_reports_divergence() {
        let data = blobs();
        let spec = MlpSpec::new(vec![2, 8, 2], Activation::Relu, 0).unwrap();
        let w = init_model(&spec, 4).unwrap();
        let cfg = TrainConfig {
            learning_rate: 1e300,
            ..sgd(5)
        };
        let err = train_local(&w, &spec, &data, &cfg, 0).unwrap_err();
        assert!(matches!(err, Error::Divergence { .. }), "{err}");
    }

    #[test]
    fn empty_dataset_is_rejected() {
        let spec = MlpSpec::new(vec![2, 2], Activation::Relu, 0).unwrap();
        let w = init_model(&spec, 1).unwrap();
        let empty = LabeledDataset::from_rows(vec![], vec![], vec!["a".into(), "b".into()]).unwrap();
        assert!(matches!(train_local(&w, &spec, &empty, &sgd(1), 0), Err(Error::Data(_))));
        assert!(matches!(evaluate(&w, &spec, &empty), Err(Error::Data(_))));
    }

    #[test]
    fn uniform_model_loss_is_log_class_count() {
        let data = blobs();
        let spec = MlpSpec::new(vec![2, 2], Activation::Relu, 0).unwrap();
        let w = WeightVector::zeros(vec![LayerShape { rows: 2, cols: 2 }]);
        let e = evaluate(&w, &spec, &data).unwrap();
        assert!((e.loss - 2f64.ln()).abs() < 1e-6);
    }

    #[test]
    fn accuracy_counts_argmax_hits() {
        // x = (s, -s) under an identity layer predicts class 0 iff s > 0.
        let spec = MlpSpec::new(vec![2, 2], Activation::Relu, 0).unwrap();
        let w = WeightVector::new(vec![1.0, 0.0, 0.0, 1.0, 0.0, 0.0], spec.layer_shapes()).unwrap();
        let signs = [1.0, 1.0, 1.0, 1.0, 1.0, -1.0, -1.0, 1.0, -1.0, 1.0];
        let labels = vec![0, 0, 0, 0, 0, 1, 1, 1, 0, 1];
        // hits: 5 + 2 (indices 5, 6) = 7
        let feats = signs.iter().map(|&s| vec![s * 10.0, -s * 10.0]).collect();
        let data = LabeledDataset::from_rows(feats, labels, vec!["a".into(), "b".into()]).unwrap();
        assert!((evaluate(&w, &spec, &data).unwrap().accuracy - 0.7).abs() < 1e-15);
    }

    #[test]
    fn one_hot_predictions_are_perfect() {
        let spec = MlpSpec::new(vec![2, 2], Activation::Relu, 0).unwrap();
        let w = WeightVector::new(vec![100.0, 0.0, 0.0, 100.0, 0.0, 0.0], spec.layer_shapes()).unwrap();
        let data = LabeledDataset::from_rows(
            vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            vec![0, 1],
            vec!["a".into(), "b".into()],
        )
        .unwrap();
        let e = evaluate(&w, &spec, &data).unwrap();
        assert_eq!(e.accuracy, 1.0);
        assert!(e.loss < 1e-12);
    }
}
