//! File formats and command-line pipeline for the OOD toolkit.
//!
//! The numeric work lives in [`oodkit_core`]; this crate reads and writes
//! FVEC, CSV, PGM and key=value files and wires everything into the
//! `oodkit` binary.

pub mod calibration_file;
pub mod cli;
pub mod error;
pub mod fvec_file;
pub mod keyvalue;
pub mod manifest;
pub mod pgm;
pub mod report;
pub mod tables;

pub use error::FileError;

use std::io::Write;
use std::path::Path;

/// Writes `bytes` to a temporary file next to `path`, then renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), FileError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let io = |e| FileError::io(path, e);
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| FileError::io(path, e.error))?;
    Ok(())
}
