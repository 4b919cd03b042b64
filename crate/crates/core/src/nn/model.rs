use super::spec::MlpSpec;
use super::weights::WeightVector;
use super::PROB_FLOOR;
use crate::data::LabeledDataset;
use crate::error::{Error, Result};

/// Pre-activations and activations of every layer for one input.
pub(crate) struct Trace {
    /// `acts[0]` is the input; `acts[l + 1]` is the output of layer `l`
    /// (softmax probabilities for the last layer).
    acts: Vec<Vec<f64>>,
    pre: Vec<Vec<f64>>,
}

impl Trace {
    pub(crate) fn probs(&self) -> &[f64] {
        self.acts.last().expect("trace has at least the input")
    }
}

pub(crate) fn softmax_in_place(z: &mut [f64]) {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for v in z.iter_mut() {
        *v = (*v - max).exp();
        sum += *v;
    }
    for v in z.iter_mut() {
        *v /= sum;
    }
}

pub(crate) fn trace(w: &WeightVector, spec: &MlpSpec, x: &[f64]) -> Trace {
    let layers = w.shapes().len();
    let mut acts = Vec::with_capacity(layers + 1);
    let mut pre = Vec::with_capacity(layers);
    acts.push(x.to_vec());
    for l in 0..layers {
        let shape = w.shapes()[l];
        let (weights, bias) = w.layer(l);
        let input = &acts[l];
        let z: Vec<f64> = (0..shape.rows)
            .map(|r| {
                let row = &weights[r * shape.cols..(r + 1) * shape.cols];
                row.iter().zip(input).fold(bias[r], |acc, (a, b)| acc + a * b)
            })
            .collect();
        let mut a = z.clone();
        if l + 1 == layers {
            softmax_in_place(&mut a);
        } else {
            a.iter_mut().for_each(|v| *v = spec.activation.apply(*v));
        }
        pre.push(z);
        acts.push(a);
    }
    Trace { acts, pre }
}

pub(crate) fn cross_entropy(probs: &[f64], label: usize) -> f64 {
    let p = probs[label];
    if p.is_nan() {
        return f64::NAN;
    }
    -p.max(PROB_FLOOR).ln()
}

/// Backpropagates one sample and adds its loss gradient into `grad`
/// (indexed like the full weight vector). Layers below `trainable_from` are
/// skipped. Returns the sample loss.
pub(crate) fn accumulate_gradient(
    w: &WeightVector,
    spec: &MlpSpec,
    x: &[f64],
    label: usize,
    trainable_from: usize,
    grad: &mut [f64],
) -> f64 {
    let t = trace(w, spec, x);
    let loss = cross_entropy(t.probs(), label);
    let layers = w.shapes().len();

    let mut delta: Vec<f64> = t.probs().to_vec();
    delta[label] -= 1.0;

    for l in (trainable_from..layers).rev() {
        let shape = w.shapes()[l];
        let offset = w.layer_offset(l);
        let input = &t.acts[l];
        let (gw, gb) = grad[offset..offset + shape.num_params()].split_at_mut(shape.rows * shape.cols);
        for r in 0..shape.rows {
            let d = delta[r];
            if d != 0.0 {
                let row = &mut gw[r * shape.cols..(r + 1) * shape.cols];
                row.iter_mut().zip(input).for_each(|(g, a)| *g += d * a);
            }
            gb[r] += d;
        }
        if l > trainable_from {
            let (weights, _) = w.layer(l);
            let mut next = vec![0.0; shape.cols];
            for r in 0..shape.rows {
                let d = delta[r];
                let row = &weights[r * shape.cols..(r + 1) * shape.cols];
                next.iter_mut().zip(row).for_each(|(n, wv)| *n += wv * d);
            }
            let z = &t.pre[l - 1];
            let a = &t.acts[l];
            for (i, n) in next.iter_mut().enumerate() {
                *n *= spec.activation.derivative(z[i], a[i]);
            }
            delta = next;
        }
    }
    loss
}

fn check_input(w: &WeightVector, spec: &MlpSpec, x: &[f64]) -> Result<()> {
    w.check_spec(spec)?;
    if x.len() != spec.input_dim() {
        return Err(Error::Shape(format!(
            "input has {} features, model expects {}",
            x.len(),
            spec.input_dim()
        )));
    }
    Ok(())
}

/// Class probabilities for one feature vector.
pub fn forward(w: &WeightVector, spec: &MlpSpec, x: &[f64]) -> Result<Vec<f64>> {
    check_input(w, spec, x)?;
    Ok(trace(w, spec, x).acts.pop().expect("output layer"))
}

/// Cross-entropy loss of one labeled sample and its gradient with respect to
/// every parameter.
pub fn loss_and_gradient(
    w: &WeightVector,
    spec: &MlpSpec,
    x: &[f64],
    label: usize,
) -> Result<(f64, Vec<f64>)> {
    check_input(w, spec, x)?;
    if label >= spec.num_classes() {
        return Err(Error::Data(format!(
            "label {label} is outside the {} model classes",
            spec.num_classes()
        )));
    }
    let mut grad = vec![0.0; w.len()];
    let loss = accumulate_gradient(w, spec, x, label, 0, &mut grad);
    Ok((loss, grad))
}

/// Class probabilities for every sample of a dataset.
pub fn predict_proba(w: &WeightVector, spec: &MlpSpec, data: &LabeledDataset) -> Result<Vec<Vec<f64>>> {
    if data.dim() != spec.input_dim() {
        return Err(Error::Shape(format!(
            "dataset has {} features, model expects {}",
            data.dim(),
            spec.input_dim()
        )));
    }
    w.check_spec(spec)?;
    Ok((0..data.len())
        .map(|i| trace(w, spec, data.features(i)).acts.pop().expect("output layer"))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{init_model, Activation, LayerShape};
    use proptest::prelude::*;

    #[test]
    fn zero_weights_give_uniform_probabilities() {
        let spec = MlpSpec::new(vec![3, 5, 4], Activation::Relu, 0).unwrap();
        let w = WeightVector::zeros(spec.layer_shapes());
        let p = forward(&w, &spec, &[1.0, -2.0, 3.5]).unwrap();
        for v in p {
            assert_eq!(v, 0.25);
        }
    }

    #[test]
    fn identity_layer_is_confident() {
        let spec = MlpSpec::new(vec![2, 2], Activation::Relu, 0).unwrap();
        let w = WeightVector::new(vec![1.0, 0.0, 0.0, 1.0, 0.0, 0.0], vec![LayerShape { rows: 2, cols: 2 }])
            .unwrap();
        let p = forward(&w, &spec, &[10.0, 0.0]).unwrap();
        // 1 / (1 + e^-10)
        assert!(p[0] > 0.99);
        assert!((p[0] - 1.0 / (1.0 + (-10.0f64).exp())).abs() < 1e-15);
    }

    #[test]
    fn dimension_mismatch_is_shape_error() {
        let spec = MlpSpec::new(vec![2, 2], Activation::Relu, 0).unwrap();
        let w = init_model(&spec, 1).unwrap();
        assert!(matches!(forward(&w, &spec, &[1.0]), Err(Error::Shape(_))));
        let other = MlpSpec::new(vec![2, 3], Activation::Relu, 0).unwrap();
        assert!(matches!(forward(&w, &other, &[1.0, 2.0]), Err(Error::Shape(_))));
    }

    proptest! {
        #[test]
        fn softmax_is_a_distribution(
            seed in any::<u64>(),
            x in prop::collection::vec(-1e3f64..1e3, 4),
            act in prop_oneof![Just(Activation::Relu), Just(Activation::Tanh)],
        ) {
            let spec = MlpSpec::new(vec![4, 6, 3], act, 0).unwrap();
            let w = init_model(&spec, seed).unwrap();
            let p = forward(&w, &spec, &x).unwrap();
            prop_assert_eq!(p.len(), 3);
            prop_assert!(p.iter().all(|v| (0.0..=1.0).contains(v)));
            prop_assert!((p.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
        }
    }
}
