//! Full-batch softmax-regression trainer for a linear head, with per-epoch
//! EMA smoothing and plateau-driven learning-rate halving.
//!
//! Sums run sequentially in sample order, so a given config and dataset
//! always produce bit-identical parameters and history.

use alloc::vec::Vec;

use rand_distr::{Distribution, Normal};

use crate::ema::{EmaState, ParamVector, DEFAULT_DECAY};
use crate::error::{bail, Result};
use crate::tensor::{FeatureMatrix, LabelVector, LinearHead, LogitMatrix, Matrix};

/// Smallest loss decrease that counts as an improvement for the scheduler.
pub const IMPROVEMENT_EPS: f64 = 1e-12;

/// Standard deviation of the seeded initial weights.
const INIT_STD: f64 = 0.01;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    /// Epochs without improvement before the learning rate is halved.
    pub lr_halving_patience: usize,
    pub ema_decay: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self { learning_rate: 0.1, epochs: 50, lr_halving_patience: 3, ema_decay: DEFAULT_DECAY, seed: 0 }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            bail!(Domain, "learning rate must be positive, got {}", self.learning_rate);
        }
        if self.lr_halving_patience == 0 {
            bail!(Domain, "lr halving patience must be at least 1");
        }
        if !(0.0..=1.0).contains(&self.ema_decay) {
            bail!(Domain, "EMA decay {} outside [0, 1]", self.ema_decay);
        }
        Ok(())
    }
}

/// Halves the learning rate after `patience` consecutive epochs in which the
/// best loss seen so far did not improve.
#[derive(Debug, Clone, PartialEq)]
pub struct PlateauHalving {
    lr: f64,
    patience: usize,
    best: f64,
    stale: usize,
}

impl PlateauHalving {
    /// `initial_loss` is the loss before the first update.
    pub fn new(lr: f64, patience: usize, initial_loss: f64) -> Self {
        Self { lr, patience, best: initial_loss, stale: 0 }
    }

    pub fn lr(&self) -> f64 {
        self.lr
    }

    /// Records an epoch's loss and returns the learning rate for the next epoch.
    pub fn observe(&mut self, loss: f64) -> f64 {
        if loss < self.best - IMPROVEMENT_EPS {
            self.best = loss;
            self.stale = 0;
        } else {
            self.stale += 1;
            if self.stale >= self.patience {
                self.lr *= 0.5;
                self.stale = 0;
            }
        }
        self.lr
    }
}

/// Gradient of the mean cross-entropy with respect to the logits, and the loss.
///
/// Row `i` of the gradient is `(softmax(z_i) - onehot(y_i)) / N`.
pub fn softmax_xent_grad(logits: &LogitMatrix, labels: &LabelVector) -> Result<(LogitMatrix, f64)> {
    let (n, k) = (logits.rows(), logits.cols());
    if labels.len() != n {
        bail!(Shape, "{} labels for {n} logit rows", labels.len());
    }
    labels.check_range(k)?;
    if n == 0 {
        return Ok((LogitMatrix::new(0, k, Vec::new())?, 0.0));
    }
    let inv_n = 1.0 / n as f64;
    let mut grad = Vec::with_capacity(n * k);
    let mut loss = 0.0;
    for (row, &y) in logits.row_iter().zip(labels.as_slice()) {
        let a = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let start = grad.len();
        grad.extend(row.iter().map(|&z| libm::exp(z - a)));
        let sum: f64 = grad[start..].iter().sum();
        for g in &mut grad[start..] {
            *g /= sum;
        }
        // -log softmax_y = log(sum) - (z_y - a)
        loss += libm::log(sum) - (row[y] - a);
        grad[start + y] -= 1.0;
        for g in &mut grad[start..] {
            *g *= inv_n;
        }
    }
    Ok((LogitMatrix::new(n, k, grad)?, loss * inv_n))
}

pub fn head_to_params(head: &LinearHead) -> ParamVector {
    let mut v = head.weights().data().to_vec();
    v.extend_from_slice(head.bias());
    ParamVector::new(v).expect("head values are finite")
}

pub fn params_to_head(params: &ParamVector, feature_dim: usize, num_classes: usize) -> Result<LinearHead> {
    let nw = feature_dim * num_classes;
    if params.len() != nw + num_classes {
        bail!(Shape, "{} parameters do not fit a {feature_dim}x{num_classes} head", params.len());
    }
    let v = params.as_slice();
    LinearHead::new(Matrix::new(feature_dim, num_classes, v[..nw].to_vec())?, v[nw..].to_vec())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochRecord {
    /// 1-based epoch index.
    pub epoch: usize,
    /// Training loss after this epoch's update.
    pub loss: f64,
    /// Learning rate used for this epoch's update.
    pub lr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub initial: LinearHead,
    pub final_head: LinearHead,
    pub ema_head: LinearHead,
    pub history: Vec<EpochRecord>,
}

impl TrainOutcome {
    pub fn final_params(&self) -> ParamVector {
        head_to_params(&self.final_head)
    }

    pub fn ema_params(&self) -> ParamVector {
        head_to_params(&self.ema_head)
    }
}

fn loss_and_param_grad(
    head: &LinearHead,
    features: &FeatureMatrix,
    labels: &LabelVector,
) -> Result<(f64, Vec<f64>)> {
    let logits = head.forward(features)?;
    let (g, loss) = softmax_xent_grad(&logits, labels)?;
    let (m, k) = (head.feature_dim(), head.num_classes());
    let mut grad = alloc::vec![0.0; m * k + k];
    let (gw, gb) = grad.split_at_mut(m * k);
    for (h, gz) in features.row_iter().zip(g.row_iter()) {
        for (j, &x) in h.iter().enumerate() {
            for (w, &dz) in gw[j * k..(j + 1) * k].iter_mut().zip(gz) {
                *w += x * dz;
            }
        }
        for (b, &dz) in gb.iter_mut().zip(gz) {
            *b += dz;
        }
    }
    Ok((loss, grad))
}

/// Trains a linear head with full-batch gradient descent.
///
/// Weights start from a seeded N(0, 0.01²) draw, bias from zero. Each epoch
/// takes one gradient step, folds the new weights into the EMA shadow, then
/// lets the plateau scheduler look at the post-update loss.
pub fn train_head(features: &FeatureMatrix, labels: &LabelVector, cfg: &TrainConfig) -> Result<TrainOutcome> {
    cfg.validate()?;
    if labels.len() != features.rows() {
        bail!(Shape, "{} labels for {} feature rows", labels.len(), features.rows());
    }
    let k = labels.implied_classes();
    if k < 2 {
        bail!(Domain, "training needs at least two classes, found {k}");
    }
    let mut counts = alloc::vec![0usize; k];
    for &y in labels.as_slice() {
        counts[y] += 1;
    }
    if let Some(empty) = counts.iter().position(|&c| c == 0) {
        bail!(Domain, "class {empty} has no training samples");
    }

    let m = features.cols();
    let mut rng = crate::seeded_rng(cfg.seed);
    let normal = Normal::new(0.0, INIT_STD).expect("valid init distribution");
    let mut w: Vec<f64> = (0..m * k).map(|_| normal.sample(&mut rng)).collect();
    w.extend(core::iter::repeat_n(0.0, k));
    let mut params = ParamVector::new(w)?;
    let initial = params_to_head(&params, m, k)?;

    let mut ema = EmaState::new(cfg.ema_decay, params.clone())?;
    let (initial_loss, mut grad) = loss_and_param_grad(&initial, features, labels)?;
    let mut sched = PlateauHalving::new(cfg.learning_rate, cfg.lr_halving_patience, initial_loss);
    let mut history = Vec::with_capacity(cfg.epochs);

    for epoch in 1..=cfg.epochs {
        let lr = sched.lr();
        for (p, g) in params.as_mut_slice().iter_mut().zip(&grad) {
            *p -= lr * g;
        }
        if params.as_slice().iter().any(|v| !v.is_finite()) {
            bail!(NonFinite, "parameters diverged at epoch {epoch}; lower the learning rate");
        }
        ema.update(&params)?;
        let head = params_to_head(&params, m, k)?;
        let (loss, next_grad) = loss_and_param_grad(&head, features, labels)?;
        grad = next_grad;
        history.push(EpochRecord { epoch, loss, lr });
        sched.observe(loss);
    }

    Ok(TrainOutcome {
        initial,
        final_head: params_to_head(&params, m, k)?,
        ema_head: params_to_head(ema.shadow(), m, k)?,
        history,
    })
}
