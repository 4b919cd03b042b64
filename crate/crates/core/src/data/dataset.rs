use crate::error::{Error, Result};

/// Dense feature matrix with one integer class label per row.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    features: Vec<f64>,
    dim: usize,
    labels: Vec<usize>,
    class_names: Vec<String>,
}

impl LabeledDataset {
    pub fn new(features: Vec<f64>, dim: usize, labels: Vec<usize>, class_names: Vec<String>) -> Result<Self> {
        if class_names.is_empty() {
            return Err(Error::Data("a dataset needs at least one class".into()));
        }
        if dim == 0 && !labels.is_empty() {
            return Err(Error::Data("feature dimension must be positive".into()));
        }
        if features.len() != dim * labels.len() {
            return Err(Error::Data(format!(
                "{} feature values cannot form {} rows of dimension {dim}",
                features.len(),
                labels.len()
            )));
        }
        if let Some(i) = labels.iter().position(|&y| y >= class_names.len()) {
            return Err(Error::Data(format!(
                "sample {i} has label {} outside {} classes",
                labels[i],
                class_names.len()
            )));
        }
        Ok(Self {
            features,
            dim,
            labels,
            class_names,
        })
    }

    pub fn from_rows(rows: Vec<Vec<f64>>, labels: Vec<usize>, class_names: Vec<String>) -> Result<Self> {
        if rows.len() != labels.len() {
            return Err(Error::Data(format!(
                "{} feature rows but {} labels",
                rows.len(),
                labels.len()
            )));
        }
        let dim = rows.first().map_or(0, Vec::len);
        if let Some(i) = rows.iter().position(|r| r.len() != dim) {
            return Err(Error::Data(format!("row {i} has {} features, expected {dim}", rows[i].len())));
        }
        Self::new(rows.concat(), dim, labels, class_names)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn features(&self, i: usize) -> &[f64] {
        &self.features[i * self.dim..(i + 1) * self.dim]
    }

    pub fn label(&self, i: usize) -> usize {
        self.labels[i]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.num_classes()];
        for &y in &self.labels {
            counts[y] += 1;
        }
        counts
    }

    /// Row indices grouped by label, each group in ascending order.
    pub fn indices_by_class(&self) -> Vec<Vec<usize>> {
        let mut groups = vec![Vec::new(); self.num_classes()];
        for (i, &y) in self.labels.iter().enumerate() {
            groups[y].push(i);
        }
        groups
    }

    pub fn subset(&self, indices: &[usize]) -> Self {
        let mut features = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            features.extend_from_slice(self.features(i));
        }
        Self {
            features,
            dim: self.dim,
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            class_names: self.class_names.clone(),
        }
    }

    /// Rows of all parts in order. Parts must share dimension and classes.
    pub fn concat(parts: &[LabeledDataset]) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::Data("nothing to concatenate".into()))?;
        let mut features = Vec::new();
        let mut labels = Vec::new();
        for p in parts {
            if p.dim != first.dim || p.class_names != first.class_names {
                return Err(Error::Data("datasets differ in dimension or classes".into()));
            }
            features.extend_from_slice(&p.features);
            labels.extend_from_slice(&p.labels);
        }
        Self::new(features, first.dim, labels, first.class_names.clone())
    }
}
