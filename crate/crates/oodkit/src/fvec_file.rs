//! FVEC files on disk. See [`oodkit_core::fvec`] for the byte layout.

use std::path::Path;

use oodkit_core::{fvec, FeatureMatrix, LinearHead, LogitMatrix, Matrix};

use crate::error::{read, FileError};

pub fn read_fvec(path: &Path) -> Result<Matrix, FileError> {
    fvec::decode(&read(path)?).map_err(|e| FileError::data(path, e))
}

pub fn write_fvec(matrix: &Matrix, path: &Path) -> Result<(), FileError> {
    let bytes = fvec::encode(matrix).map_err(|e| FileError::data(path, e))?;
    crate::write_atomic(path, &bytes)
}

pub fn read_features(path: &Path) -> Result<FeatureMatrix, FileError> {
    FeatureMatrix::try_from(read_fvec(path)?).map_err(|e| FileError::data(path, e))
}

pub fn read_logits(path: &Path) -> Result<LogitMatrix, FileError> {
    LogitMatrix::try_from(read_fvec(path)?).map_err(|e| FileError::data(path, e))
}

/// Reads a head stored as `W` (m×K) and `b` (1×K).
pub fn read_head(weights: &Path, bias: &Path) -> Result<LinearHead, FileError> {
    let w = read_fvec(weights)?;
    let b = read_fvec(bias)?;
    if b.rows() != 1 {
        return Err(FileError::data(
            bias,
            oodkit_core::Error::Shape(format!("bias must be 1xK, got {}x{}", b.rows(), b.cols())),
        ));
    }
    LinearHead::new(w, b.into_data()).map_err(|e| FileError::data(bias, e))
}

pub fn write_head(head: &LinearHead, weights: &Path, bias: &Path) -> Result<(), FileError> {
    write_fvec(head.weights(), weights)?;
    write_fvec(&head.bias_matrix(), bias)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_roundtrip_and_determinism() {
        let dir = tempfile::tempdir().unwrap();
        let m = Matrix::from_rows(&[[1.5, -2.0, 0.25], [3.0, 4.0, 5.0]]).unwrap();
        let a = dir.path().join("a.fvec");
        let b = dir.path().join("b.fvec");
        write_fvec(&m, &a).unwrap();
        write_fvec(&m, &b).unwrap();
        assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
        assert_eq!(read_fvec(&a).unwrap(), m);
    }

    #[test]
    fn missing_file() {
        let err = read_fvec(Path::new("/nonexistent/x.fvec")).unwrap_err();
        assert!(matches!(err, FileError::NotFound { .. }));
        assert!(err.to_string().contains("file not found"));
    }

    #[test]
    fn head_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let head = LinearHead::new(Matrix::from_rows(&[[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]]).unwrap(), vec![0.5, -0.5]).unwrap();
        let (w, b) = (dir.path().join("w.fvec"), dir.path().join("b.fvec"));
        write_head(&head, &w, &b).unwrap();
        assert_eq!(read_head(&w, &b).unwrap(), head);
        assert!(read_head(&w, &w).is_err());
    }
}
