use alloc::vec::Vec;

use super::score::ScoreVector;
use crate::error::{bail, Result};
use crate::quantile;
use crate::tensor::{argmax, LogitMatrix};

/// Fraction of training samples kept as ID when none is given.
pub const DEFAULT_RETENTION: f64 = 0.99;

/// A calibration is flagged when achieved retention falls this far below target.
pub const RETENTION_WARN_SLACK: f64 = 0.005;

/// Fitted OOD threshold together with how well it met its target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Calibration {
    pub tau: f64,
    pub target_retention: f64,
    /// Fraction of calibration scores strictly above `tau`.
    pub achieved_retention: f64,
    pub n_calibration: usize,
}

impl Calibration {
    /// True when ties at `tau` pushed retention noticeably under target.
    pub fn retention_warning(&self) -> bool {
        self.achieved_retention < self.target_retention - RETENTION_WARN_SLACK
    }
}

/// Picks `tau` so that at least `retention_q` of `train_scores` stay strictly above it.
///
/// With `k = floor(N * (1 - q))` the threshold is the `k`-th smallest score, or
/// `-inf` when `k = 0`.
pub fn calibrate_tau(train_scores: &ScoreVector, retention_q: f64) -> Result<Calibration> {
    let (tau, _) = quantile::retention_cut(train_scores, retention_q)?;
    Ok(Calibration {
        tau,
        target_retention: retention_q,
        achieved_retention: quantile::fraction_above(train_scores, tau),
        n_calibration: train_scores.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    Id,
    Ood,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Id => "ID",
            Verdict::Ood => "OOD",
        }
    }
}

impl core::fmt::Display for Verdict {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decision {
    pub verdict: Verdict,
    pub score: f64,
    /// Argmax class; only meaningful for [`Verdict::Id`].
    pub predicted_class: usize,
}

/// ID iff `score > tau`; ties at `tau` are OOD.
pub fn decide(scores: &ScoreVector, logits: &LogitMatrix, tau: f64) -> Result<Vec<Decision>> {
    if scores.len() != logits.rows() {
        bail!(Shape, "{} scores for {} logit rows", scores.len(), logits.rows());
    }
    if tau.is_nan() {
        bail!(Domain, "threshold is NaN");
    }
    Ok(scores
        .iter()
        .zip(logits.row_iter())
        .map(|(&score, row)| Decision {
            verdict: if score > tau { Verdict::Id } else { Verdict::Ood },
            score,
            predicted_class: argmax(row),
        })
        .collect())
}
