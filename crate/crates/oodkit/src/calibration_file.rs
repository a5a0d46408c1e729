//! Persisted calibration: ReAct cutoff plus OOD threshold.

use std::path::Path;

use oodkit_core::ood::Calibration;

use crate::error::FileError;
use crate::keyvalue::{render, KeyValues};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationRecord {
    /// `inf` when clipping is disabled.
    pub cutoff_c: f64,
    pub percentile_p: f64,
    pub tau: f64,
    pub target_retention: f64,
    pub achieved_retention: f64,
    pub n_calibration: usize,
}

impl CalibrationRecord {
    pub fn new(cutoff_c: f64, percentile_p: f64, cal: &Calibration) -> Self {
        Self {
            cutoff_c,
            percentile_p,
            tau: cal.tau,
            target_retention: cal.target_retention,
            achieved_retention: cal.achieved_retention,
            n_calibration: cal.n_calibration,
        }
    }

    pub fn to_text(&self) -> String {
        render(&[
            ("tau", self.tau.to_string()),
            ("cutoff_c", self.cutoff_c.to_string()),
            ("percentile_p", self.percentile_p.to_string()),
            ("target_retention", self.target_retention.to_string()),
            ("achieved_retention", self.achieved_retention.to_string()),
            ("n_calibration", self.n_calibration.to_string()),
        ])
    }

    pub fn from_key_values(kv: &KeyValues) -> Result<Self, FileError> {
        Ok(Self {
            tau: kv.require("tau")?,
            cutoff_c: kv.require("cutoff_c")?,
            percentile_p: kv.require("percentile_p")?,
            target_retention: kv.require("target_retention")?,
            achieved_retention: kv.require("achieved_retention")?,
            n_calibration: kv.require("n_calibration")?,
        })
    }

    pub fn read(path: &Path) -> Result<Self, FileError> {
        let rec = Self::from_key_values(&KeyValues::read(path)?)?;
        if rec.cutoff_c.is_nan() || rec.tau.is_nan() {
            return Err(FileError::data(path, oodkit_core::Error::Domain("NaN in calibration".into())));
        }
        Ok(rec)
    }

    pub fn write(&self, path: &Path) -> Result<(), FileError> {
        crate::write_atomic(path, self.to_text().as_bytes())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_with_infinities() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("cal.txt");
        let rec = CalibrationRecord {
            cutoff_c: f64::INFINITY,
            percentile_p: 90.0,
            tau: f64::NEG_INFINITY,
            target_retention: 0.99,
            achieved_retention: 1.0,
            n_calibration: 3,
        };
        rec.write(&p).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        assert!(text.starts_with("tau=-inf\ncutoff_c=inf\n"));
        assert_eq!(CalibrationRecord::read(&p).unwrap(), rec);
    }

    #[test]
    fn missing_key() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("cal.txt");
        std::fs::write(&p, "tau=1\n").unwrap();
        assert!(CalibrationRecord::read(&p).is_err());
    }
}
