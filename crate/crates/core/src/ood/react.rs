use alloc::vec::Vec;

use crate::error::{bail, Result};
use crate::quantile;
use crate::tensor::{FeatureMatrix, LinearHead, LogitMatrix, Matrix};

/// Percentile used for the ReAct cutoff when none is given.
pub const DEFAULT_PERCENTILE: f64 = 90.0;

/// ReAct settings: the percentile `p` and, once fitted, the cutoff `c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReactConfig {
    pub percentile_p: f64,
    /// `None` until fitted. `+inf` disables clipping.
    pub cutoff_c: Option<f64>,
}

impl Default for ReactConfig {
    fn default() -> Self {
        Self { percentile_p: DEFAULT_PERCENTILE, cutoff_c: None }
    }
}

impl ReactConfig {
    pub fn new(percentile_p: f64) -> Result<Self> {
        if !(percentile_p > 0.0 && percentile_p <= 100.0) {
            bail!(Domain, "percentile {percentile_p} outside (0, 100]");
        }
        Ok(Self { percentile_p, cutoff_c: None })
    }

    /// Fits `cutoff_c` on in-distribution activations.
    pub fn fit(mut self, id_features: &FeatureMatrix) -> Result<Self> {
        self.cutoff_c = Some(fit_react_threshold(id_features, self.percentile_p)?);
        Ok(self)
    }

    /// Fitted cutoff, or `+inf` when unfitted.
    pub fn cutoff(&self) -> f64 {
        self.cutoff_c.unwrap_or(f64::INFINITY)
    }
}

fn check_cutoff(c: f64) -> Result<()> {
    if c.is_nan() {
        bail!(Domain, "ReAct cutoff is NaN");
    }
    if c == f64::NEG_INFINITY {
        bail!(Domain, "ReAct cutoff is -inf");
    }
    Ok(())
}

/// Element-wise `min(x, c)`.
pub fn react_clip(features: &FeatureMatrix, c: f64) -> Result<FeatureMatrix> {
    check_cutoff(c)?;
    let data: Vec<f64> = features.data().iter().map(|&x| x.min(c)).collect();
    Matrix::from_parts_unchecked(features.rows(), features.cols(), data).try_into()
}

/// Nearest-rank `p`-th percentile over every activation of every sample.
pub fn fit_react_threshold(id_features: &FeatureMatrix, p: f64) -> Result<f64> {
    if id_features.rows() == 0 {
        bail!(Calibration, "cannot fit ReAct cutoff on an empty feature matrix");
    }
    quantile::percentile(id_features.data(), p)
}

/// Logits after clipping activations at `c`; `c = +inf` is the plain forward pass.
pub fn rectified_forward(features: &FeatureMatrix, head: &LinearHead, c: f64) -> Result<LogitMatrix> {
    check_cutoff(c)?;
    head.forward_with(features, |x| x.min(c))
}
