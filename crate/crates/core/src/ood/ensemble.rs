use alloc::vec::Vec;

use crate::error::{bail, Result};
use crate::tensor::{LogitMatrix, Matrix};

/// Incremental element-wise mean, `mean += (x - mean) / n`.
///
/// Identical inputs reproduce themselves bit-for-bit, which a plain
/// sum-then-divide does not guarantee.
#[derive(Debug, Clone)]
pub struct RunningMean {
    mean: Vec<f64>,
    count: usize,
}

impl RunningMean {
    pub fn new(len: usize) -> Self {
        Self { mean: alloc::vec![0.0; len], count: 0 }
    }

    pub fn push(&mut self, x: &[f64]) {
        debug_assert_eq!(x.len(), self.mean.len());
        self.count += 1;
        let n = self.count as f64;
        for (m, &v) in self.mean.iter_mut().zip(x) {
            *m += (v - *m) / n;
        }
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn into_mean(self) -> Vec<f64> {
        self.mean
    }
}

/// Element-wise mean of several models' logits for the same samples.
pub fn ensemble_logits(per_model: &[LogitMatrix]) -> Result<LogitMatrix> {
    let Some(first) = per_model.first() else {
        bail!(Domain, "ensemble needs at least one model");
    };
    let (rows, cols) = (first.rows(), first.cols());
    let mut acc = RunningMean::new(rows * cols);
    for (i, m) in per_model.iter().enumerate() {
        if (m.rows(), m.cols()) != (rows, cols) {
            bail!(Shape, "model {i} logits are {}x{}, expected {rows}x{cols}", m.rows(), m.cols());
        }
        acc.push(m.data());
    }
    Matrix::new(rows, cols, acc.into_mean())?.try_into()
}
