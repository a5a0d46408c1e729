//! Test-time augmentation: average rectified logits over augmented views.

use alloc::vec::Vec;

use crate::augment::{augment, AugmentSpec};
use crate::error::{bail, Result};
use crate::image::ImageBuffer;
use crate::ood::{rectified_forward, RunningMean};
use crate::tensor::{FeatureMatrix, LinearHead, LogitMatrix};

/// Number of views fused per prediction when none is given.
pub const DEFAULT_ITERATIONS: usize = 32;

/// Maps an image to a fixed-length feature vector; stands in for a backbone.
///
/// Implementations must be deterministic and return finite values of
/// length [`Featurizer::dim`].
pub trait Featurizer {
    fn dim(&self) -> usize;
    fn featurize(&self, img: &ImageBuffer) -> Result<Vec<f64>>;
}

/// Mean intensity over a `grid x grid` partition of the image.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockMeanFeaturizer {
    pub grid: usize,
}

impl BlockMeanFeaturizer {
    pub fn new(grid: usize) -> Result<Self> {
        if grid == 0 {
            bail!(Domain, "grid must be at least 1");
        }
        Ok(Self { grid })
    }
}

impl Featurizer for BlockMeanFeaturizer {
    fn dim(&self) -> usize {
        self.grid * self.grid
    }

    fn featurize(&self, img: &ImageBuffer) -> Result<Vec<f64>> {
        let g = self.grid;
        let (h, w) = (img.height(), img.width());
        if h < g || w < g {
            bail!(Shape, "{h}x{w} image is smaller than the {g}x{g} grid");
        }
        let mut out = Vec::with_capacity(g * g);
        for by in 0..g {
            let (r0, r1) = (by * h / g, (by + 1) * h / g);
            for bx in 0..g {
                let (c0, c1) = (bx * w / g, (bx + 1) * w / g);
                let mut sum = 0.0;
                for r in r0..r1 {
                    sum += img.pixels()[r * w + c0..r * w + c1].iter().sum::<f64>();
                }
                out.push(sum / ((r1 - r0) * (c1 - c0)) as f64);
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TtaConfig {
    pub iterations: usize,
    /// Use the unaugmented image as the first view.
    pub include_identity: bool,
    pub seed: u64,
}

impl Default for TtaConfig {
    fn default() -> Self {
        Self { iterations: DEFAULT_ITERATIONS, include_identity: true, seed: 0 }
    }
}

/// Rectified logits for one view.
pub fn view_logits<F: Featurizer + ?Sized>(
    img: &ImageBuffer,
    featurizer: &F,
    head: &LinearHead,
    react_c: f64,
) -> Result<LogitMatrix> {
    let h = featurizer.featurize(img)?;
    if h.len() != featurizer.dim() {
        bail!(Shape, "featurizer returned {} values, declared {}", h.len(), featurizer.dim());
    }
    rectified_forward(&FeatureMatrix::new(1, h.len(), h)?, head, react_c)
}

/// Mean of the rectified logits over `cfg.iterations` views, as a 1×K matrix.
///
/// Views are generated from a generator seeded with `cfg.seed` and reduced in
/// view order.
pub fn tta_predict<F: Featurizer + ?Sized>(
    img: &ImageBuffer,
    featurizer: &F,
    head: &LinearHead,
    react_c: f64,
    cfg: &TtaConfig,
    spec: &AugmentSpec,
) -> Result<LogitMatrix> {
    if cfg.iterations == 0 {
        bail!(Domain, "TTA needs at least one view");
    }
    if featurizer.dim() != head.feature_dim() {
        bail!(Shape, "featurizer dim {} != head feature dim {}", featurizer.dim(), head.feature_dim());
    }
    spec.validate()?;
    let mut rng = crate::seeded_rng(cfg.seed);
    let mut acc = RunningMean::new(head.num_classes());
    for view in 0..cfg.iterations {
        let logits = if view == 0 && cfg.include_identity {
            view_logits(img, featurizer, head, react_c)?
        } else {
            view_logits(&augment(img, spec, &mut rng)?, featurizer, head, react_c)?
        };
        acc.push(logits.data());
    }
    LogitMatrix::new(1, head.num_classes(), acc.into_mean())
}
