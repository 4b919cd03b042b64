use std::ops::Range;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::spec::MlpSpec;
use crate::error::{Error, Result};
use crate::seed;

/// One dense layer: a `rows x cols` weight matrix (outputs x inputs, stored
/// row-major) followed by `rows` biases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LayerShape {
    pub rows: usize,
    pub cols: usize,
}

impl LayerShape {
    pub fn num_params(&self) -> usize {
        self.rows * self.cols + self.rows
    }
}

/// Flat parameter vector of an MLP, the unit exchanged between clients and
/// the aggregation server.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightVector {
    values: Vec<f64>,
    shapes: Vec<LayerShape>,
}

impl WeightVector {
    pub fn new(values: Vec<f64>, shapes: Vec<LayerShape>) -> Result<Self> {
        let expected: usize = shapes.iter().map(LayerShape::num_params).sum();
        if values.len() != expected {
            return Err(Error::Shape(format!(
                "{} values do not fill layer shapes needing {expected}",
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Shape(format!("parameter {i} is not finite")));
        }
        Ok(Self { values, shapes })
    }

    pub fn zeros(shapes: Vec<LayerShape>) -> Self {
        let n = shapes.iter().map(LayerShape::num_params).sum();
        Self {
            values: vec![0.0; n],
            shapes,
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn shapes(&self) -> &[LayerShape] {
        &self.shapes
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Offset of the first parameter of `layer`. `layer == num_layers` gives
    /// the total length.
    pub fn layer_offset(&self, layer: usize) -> usize {
        self.shapes[..layer.min(self.shapes.len())]
            .iter()
            .map(LayerShape::num_params)
            .sum()
    }

    pub fn layer_range(&self, layer: usize) -> Range<usize> {
        let start = self.layer_offset(layer);
        start..start + self.shapes[layer].num_params()
    }

    /// Weight matrix and bias slices of one layer.
    pub fn layer(&self, layer: usize) -> (&[f64], &[f64]) {
        let shape = self.shapes[layer];
        let block = &self.values[self.layer_range(layer)];
        block.split_at(shape.rows * shape.cols)
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn matches(&self, spec: &MlpSpec) -> bool {
        self.shapes == spec.layer_shapes()
    }

    pub(crate) fn check_spec(&self, spec: &MlpSpec) -> Result<()> {
        if self.matches(spec) {
            Ok(())
        } else {
            Err(Error::Shape(format!(
                "weight shapes {:?} do not match architecture {:?}",
                self.shapes, spec.layer_widths
            )))
        }
    }

    /// Copies one layer (weights and biases) from `other`, which must have the
    /// same shape at that index.
    pub(crate) fn copy_layer_from(&mut self, other: &WeightVector, layer: usize) {
        let range = self.layer_range(layer);
        let src = other.layer_range(layer);
        self.values[range].copy_from_slice(&other.values[src]);
    }
}

/// Glorot-uniform weights, zero biases, fully determined by `(spec, seed)`.
pub fn init_model(spec: &MlpSpec, seed: u64) -> Result<WeightVector> {
    spec.validate()?;
    let shapes = spec.layer_shapes();
    let mut w = WeightVector::zeros(shapes.clone());
    for (layer, shape) in shapes.iter().enumerate() {
        let mut rng = seed::rng(seed, &[seed::TAG_INIT, layer as u64]);
        let limit = (6.0 / (shape.rows + shape.cols) as f64).sqrt();
        let start = w.layer_offset(layer);
        for v in &mut w.values[start..start + shape.rows * shape.cols] {
            *v = rng.random_range(-limit..=limit);
        }
    }
    Ok(w)
}
