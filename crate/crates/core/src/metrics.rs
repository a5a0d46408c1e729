//! Classification accuracy and OOD separation metrics.

use alloc::vec::Vec;

use crate::error::{bail, Result};
use crate::quantile;
use crate::tensor::LabelVector;

/// TPR target for the reported FPR when none is given.
pub const DEFAULT_TPR: f64 = 0.95;

pub fn accuracy(pred: &LabelVector, truth: &LabelVector) -> Result<f64> {
    if pred.len() != truth.len() {
        bail!(Shape, "{} predictions for {} labels", pred.len(), truth.len());
    }
    if truth.is_empty() {
        bail!(Domain, "accuracy of an empty set");
    }
    let hits = pred.as_slice().iter().zip(truth.as_slice()).filter(|(p, t)| p == t).count();
    Ok(hits as f64 / truth.len() as f64)
}

/// Counts indexed `[truth][pred]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionMatrix {
    classes: usize,
    counts: Vec<u64>,
}

impl ConfusionMatrix {
    pub fn new(pred: &LabelVector, truth: &LabelVector, classes: usize) -> Result<Self> {
        if pred.len() != truth.len() {
            bail!(Shape, "{} predictions for {} labels", pred.len(), truth.len());
        }
        pred.check_range(classes)?;
        truth.check_range(classes)?;
        let mut counts = alloc::vec![0u64; classes * classes];
        for (&p, &t) in pred.as_slice().iter().zip(truth.as_slice()) {
            counts[t * classes + p] += 1;
        }
        Ok(Self { classes, counts })
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn get(&self, truth: usize, pred: usize) -> u64 {
        self.counts[truth * self.classes + pred]
    }

    pub fn row(&self, truth: usize) -> &[u64] {
        &self.counts[truth * self.classes..(truth + 1) * self.classes]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.classes).map(|k| self.get(k, k)).sum()
    }
}

/// Probability that a random ID score beats a random OOD score, ties ½.
///
/// Computed from mid-ranks of the pooled scores (Mann-Whitney U).
pub fn auroc(id_scores: &[f64], ood_scores: &[f64]) -> Result<f64> {
    if id_scores.is_empty() || ood_scores.is_empty() {
        bail!(Domain, "AUROC needs both ID and OOD scores");
    }
    let mut pooled: Vec<(f64, bool)> = id_scores
        .iter()
        .map(|&s| (s, true))
        .chain(ood_scores.iter().map(|&s| (s, false)))
        .collect();
    pooled.sort_by(|a, b| a.0.total_cmp(&b.0));
    // twice the rank sum keeps mid-ranks integral
    let mut twice_rank_sum: u128 = 0;
    let mut i = 0;
    while i < pooled.len() {
        let mut j = i;
        while j + 1 < pooled.len() && pooled[j + 1].0 == pooled[i].0 {
            j += 1;
        }
        // ranks i+1..=j+1 share the mid-rank (i + j + 2) / 2
        let twice_mid = (i + j + 2) as u128;
        let id_in_group = pooled[i..=j].iter().filter(|p| p.1).count() as u128;
        twice_rank_sum += twice_mid * id_in_group;
        i = j + 1;
    }
    let n = id_scores.len() as u128;
    let m = ood_scores.len() as u128;
    let twice_u = twice_rank_sum - n * (n + 1);
    Ok(twice_u as f64 / (2 * n * m) as f64)
}

/// Fraction of OOD scores above the threshold that keeps `tpr_target` of ID scores.
///
/// The threshold follows the same nearest-rank rule as `calibrate_tau`.
pub fn fpr_at_tpr(id_scores: &[f64], ood_scores: &[f64], tpr_target: f64) -> Result<f64> {
    if id_scores.is_empty() || ood_scores.is_empty() {
        bail!(Domain, "FPR needs both ID and OOD scores");
    }
    if !(tpr_target > 0.0 && tpr_target <= 1.0) {
        bail!(Domain, "TPR target {tpr_target} outside (0, 1]");
    }
    let (t, _) = quantile::retention_cut(id_scores, tpr_target)?;
    Ok(quantile::fraction_above(ood_scores, t))
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub accuracy: f64,
    pub confusion: ConfusionMatrix,
    pub auroc: f64,
    pub fpr_at_tpr: f64,
    pub tpr_target: f64,
    pub n_id: usize,
    pub n_ood: usize,
}

/// Accuracy on labelled ID samples plus ID-vs-OOD separation.
pub fn evaluate(
    id_pred: &LabelVector,
    id_truth: &LabelVector,
    classes: usize,
    id_scores: &[f64],
    ood_scores: &[f64],
    tpr_target: f64,
) -> Result<EvalReport> {
    if id_scores.len() != id_truth.len() {
        bail!(Shape, "{} ID scores for {} labels", id_scores.len(), id_truth.len());
    }
    let confusion = ConfusionMatrix::new(id_pred, id_truth, classes)?;
    Ok(EvalReport {
        accuracy: accuracy(id_pred, id_truth)?,
        confusion,
        auroc: auroc(id_scores, ood_scores)?,
        fpr_at_tpr: fpr_at_tpr(id_scores, ood_scores, tpr_target)?,
        tpr_target,
        n_id: id_scores.len(),
        n_ood: ood_scores.len(),
    })
}
