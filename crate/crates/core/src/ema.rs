//! Exponential moving average of model parameters.
//!
//! `shadow <- decay * shadow + (1 - decay) * current`, applied once per
//! epoch by the trainer. The shadow starts at the step-0 weights.

use alloc::vec::Vec;

use crate::error::{bail, Result};

/// Decay used by the trainer when none is configured.
pub const DEFAULT_DECAY: f64 = 0.99;

/// Flat parameter vector: head weights row-major, then bias.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamVector(Vec<f64>);

impl ParamVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            bail!(NonFinite, "parameter vector contains a non-finite value");
        }
        Ok(Self(values))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub(crate) fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmaState {
    decay: f64,
    shadow: ParamVector,
    step_count: u64,
}

impl EmaState {
    pub fn new(decay: f64, initial: ParamVector) -> Result<Self> {
        if !(0.0..=1.0).contains(&decay) {
            bail!(Domain, "EMA decay {decay} outside [0, 1]");
        }
        Ok(Self { decay, shadow: initial, step_count: 0 })
    }

    pub fn decay(&self) -> f64 {
        self.decay
    }

    pub fn shadow(&self) -> &ParamVector {
        &self.shadow
    }

    pub fn into_shadow(self) -> ParamVector {
        self.shadow
    }

    pub fn step_count(&self) -> u64 {
        self.step_count
    }

    pub fn update(&mut self, current: &ParamVector) -> Result<()> {
        if current.len() != self.shadow.len() {
            bail!(Shape, "EMA shadow has {} parameters, model has {}", self.shadow.len(), current.len());
        }
        let beta = self.decay;
        for (s, &c) in self.shadow.as_mut_slice().iter_mut().zip(current.as_slice()) {
            *s = beta * *s + (1.0 - beta) * c;
        }
        self.step_count += 1;
        Ok(())
    }
}
