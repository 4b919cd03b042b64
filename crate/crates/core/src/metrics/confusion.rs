use serde::Serialize;

use crate::error::{Error, Result};

/// Rows are true classes, columns predicted classes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConfusionMatrix {
    n: usize,
    counts: Vec<u64>,
}

impl ConfusionMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            counts: vec![0; n * n],
        }
    }

    pub fn from_counts(rows: Vec<Vec<u64>>) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Data("confusion matrix must be square".into()));
        }
        Ok(Self {
            n,
            counts: rows.concat(),
        })
    }

    pub fn num_classes(&self) -> usize {
        self.n
    }

    pub fn get(&self, truth: usize, predicted: usize) -> u64 {
        self.counts[truth * self.n + predicted]
    }

    pub fn record(&mut self, truth: usize, predicted: usize) {
        self.counts[truth * self.n + predicted] += 1;
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn rows(&self) -> Vec<Vec<u64>> {
        self.counts.chunks(self.n.max(1)).map(<[u64]>::to_vec).collect()
    }

    /// `(tp, fp, fn, tn)` treating `class` as positive.
    pub fn one_vs_rest(&self, class: usize) -> (u64, u64, u64, u64) {
        let tp = self.get(class, class);
        let predicted: u64 = (0..self.n).map(|t| self.get(t, class)).sum();
        let actual: u64 = (0..self.n).map(|p| self.get(class, p)).sum();
        let fp = predicted - tp;
        let fn_ = actual - tp;
        (tp, fp, fn_, self.total() - tp - fp - fn_)
    }
}

pub fn confusion_from_predictions(truth: &[usize], predicted: &[usize], n: usize) -> Result<ConfusionMatrix> {
    if truth.len() != predicted.len() {
        return Err(Error::Data(format!(
            "{} true labels but {} predictions",
            truth.len(),
            predicted.len()
        )));
    }
    let mut cm = ConfusionMatrix::zeros(n);
    for (i, (&t, &p)) in truth.iter().zip(predicted).enumerate() {
        if t >= n || p >= n {
            return Err(Error::Data(format!(
                "sample {i} has labels ({t}, {p}) outside {n} classes"
            )));
        }
        cm.record(t, p);
    }
    Ok(cm)
}
