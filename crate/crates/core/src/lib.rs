//! Allocation-only core of the OOD toolkit.
//!
//! Everything here is pure computation over in-memory buffers: activation
//! rectification (ReAct), energy scoring and threshold calibration, EMA
//! weight smoothing with a small softmax-regression trainer, single-channel
//! image augmentation with test-time augmentation, and evaluation metrics.
//! File IO, CLI and text formats live in the `oodkit` crate.
//!
//! All arithmetic runs in `f64`; the on-disk FVEC payload is `f32`.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod augment;
pub mod ema;
pub mod error;
pub mod fvec;
pub mod image;
pub mod metrics;
pub mod ood;
pub mod quantile;
pub mod synth;
pub mod tensor;
pub mod train;
pub mod tta;

pub use error::{Error, Result};
pub use image::ImageBuffer;
pub use tensor::{FeatureMatrix, LabelVector, LinearHead, LogitMatrix, Matrix};

/// Deterministic, platform-independent generator used for every seeded operation.
pub type SeededRng = rand_chacha::ChaCha8Rng;

/// Builds the toolkit's seeded generator.
pub fn seeded_rng(seed: u64) -> SeededRng {
    use rand::SeedableRng;
    SeededRng::seed_from_u64(seed)
}
