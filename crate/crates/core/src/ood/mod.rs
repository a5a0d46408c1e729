//! Post-hoc OOD detection: ReAct rectification, energy scoring, threshold
//! calibration, ID/OOD decisions and logit-level ensembling.

mod calibration;
mod ensemble;
mod react;
mod score;

pub use calibration::{calibrate_tau, decide, Calibration, Decision, Verdict, DEFAULT_RETENTION, RETENTION_WARN_SLACK};
pub use ensemble::{ensemble_logits, RunningMean};
pub use react::{fit_react_threshold, react_clip, rectified_forward, ReactConfig, DEFAULT_PERCENTILE};
pub use score::{energy_score, log_sum_exp, max_softmax_score, ScoreVector};
