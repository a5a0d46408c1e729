//! Evaluation report as key=value text plus a confusion-matrix CSV.

use std::path::Path;

use oodkit_core::metrics::{ConfusionMatrix, EvalReport};

use crate::error::FileError;
use crate::keyvalue::render;

/// Threshold-dependent figures, present when a calibration was supplied.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdStats {
    pub tau: f64,
    /// Fraction of ID samples with score > tau.
    pub id_retention: f64,
    /// Fraction of OOD samples with score <= tau.
    pub ood_rejection: f64,
}

pub fn report_text(report: &EvalReport, threshold: Option<&ThresholdStats>) -> String {
    let mut pairs = vec![
        ("accuracy", report.accuracy.to_string()),
        ("auroc", report.auroc.to_string()),
        ("fpr_at_tpr", report.fpr_at_tpr.to_string()),
        ("tpr_target", report.tpr_target.to_string()),
        ("n_id", report.n_id.to_string()),
        ("n_ood", report.n_ood.to_string()),
        ("classes", report.confusion.classes().to_string()),
    ];
    if let Some(t) = threshold {
        pairs.push(("tau", t.tau.to_string()));
        pairs.push(("id_retention", t.id_retention.to_string()));
        pairs.push(("ood_rejection", t.ood_rejection.to_string()));
    }
    render(&pairs)
}

/// Rows are true classes, columns predicted classes.
pub fn confusion_csv(c: &ConfusionMatrix) -> String {
    let k = c.classes();
    let mut out = String::from("truth");
    for j in 0..k {
        out.push_str(&format!(",pred{j}"));
    }
    out.push('\n');
    for t in 0..k {
        out.push_str(&t.to_string());
        for v in c.row(t) {
            out.push_str(&format!(",{v}"));
        }
        out.push('\n');
    }
    out
}

pub fn write_report(
    report: &EvalReport,
    threshold: Option<&ThresholdStats>,
    path: &Path,
    confusion_path: Option<&Path>,
) -> Result<(), FileError> {
    crate::write_atomic(path, report_text(report, threshold).as_bytes())?;
    if let Some(cp) = confusion_path {
        crate::write_atomic(cp, confusion_csv(&report.confusion).as_bytes())?;
    }
    Ok(())
}
