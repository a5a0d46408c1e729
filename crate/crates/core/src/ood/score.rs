use alloc::vec::Vec;
use core::ops::Deref;

use crate::error::{bail, Result};
use crate::tensor::LogitMatrix;

/// Per-sample OOD scores. Larger means more in-distribution.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScoreVector(Vec<f64>);

impl ScoreVector {
    pub fn new(scores: Vec<f64>) -> Result<Self> {
        if let Some(i) = scores.iter().position(|s| !s.is_finite()) {
            bail!(NonFinite, "score {i} is {}", scores[i]);
        }
        Ok(Self(scores))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for ScoreVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// `log(sum(exp(x)))` with max-shift stabilization. Empty input gives `-inf`.
pub fn log_sum_exp(x: &[f64]) -> f64 {
    let a = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !a.is_finite() {
        return a;
    }
    let sum: f64 = x.iter().map(|&v| libm::exp(v - a)).sum();
    a + libm::log(sum)
}

/// Energy score `logsumexp(logits)` per row.
pub fn energy_score(logits: &LogitMatrix) -> ScoreVector {
    ScoreVector(logits.row_iter().map(log_sum_exp).collect())
}

/// Maximum softmax probability per row; a baseline score.
pub fn max_softmax_score(logits: &LogitMatrix) -> ScoreVector {
    ScoreVector(
        logits
            .row_iter()
            .map(|row| {
                let a = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let sum: f64 = row.iter().map(|&v| libm::exp(v - a)).sum();
                1.0 / sum
            })
            .collect(),
    )
}
