//! FVEC byte codec.
//!
//! Layout (all integers and floats little-endian):
//!
//! ```text
//! offset  size  field
//! 0       4     magic  b"FVEC"
//! 4       4     version u32 = 1
//! 8       4     rows    u32
//! 12      4     cols    u32
//! 16      4*n   rows*cols IEEE-754 binary32, row-major
//! ```
//!
//! Values are widened to `f64` on decode and narrowed to `f32` on encode.

use alloc::vec::Vec;

use crate::error::{bail, Error, Result};
use crate::tensor::Matrix;

pub const MAGIC: &[u8; 4] = b"FVEC";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 16;

pub fn encoded_len(rows: usize, cols: usize) -> usize {
    HEADER_LEN + rows * cols * 4
}

/// Serializes a matrix. Fails if a value does not fit a finite `f32`
/// or a dimension exceeds `u32`.
pub fn encode(m: &Matrix) -> Result<Vec<u8>> {
    let rows = u32::try_from(m.rows()).map_err(|_| Error::Format(alloc::format!("{} rows exceed u32", m.rows())))?;
    let cols = u32::try_from(m.cols()).map_err(|_| Error::Format(alloc::format!("{} cols exceed u32", m.cols())))?;
    let mut out = Vec::with_capacity(encoded_len(m.rows(), m.cols()));
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&rows.to_le_bytes());
    out.extend_from_slice(&cols.to_le_bytes());
    for (i, &v) in m.data().iter().enumerate() {
        let narrowed = v as f32;
        if !narrowed.is_finite() {
            bail!(NonFinite, "value {v} at flat index {i} overflows f32");
        }
        out.extend_from_slice(&narrowed.to_le_bytes());
    }
    Ok(out)
}

pub fn decode(bytes: &[u8]) -> Result<Matrix> {
    if bytes.len() < HEADER_LEN {
        if bytes.len() >= 4 && &bytes[..4] != MAGIC {
            bail!(Format, "bad magic {:?}", &bytes[..4]);
        }
        return Err(Error::Truncated { expected: HEADER_LEN, found: bytes.len() });
    }
    if &bytes[..4] != MAGIC {
        bail!(Format, "bad magic {:?}", &bytes[..4]);
    }
    let word = |at: usize| u32::from_le_bytes([bytes[at], bytes[at + 1], bytes[at + 2], bytes[at + 3]]);
    let version = word(4);
    if version != VERSION {
        bail!(Format, "unsupported version {version}");
    }
    let (rows, cols) = (word(8) as usize, word(12) as usize);
    let expected = rows
        .checked_mul(cols)
        .and_then(|n| n.checked_mul(4))
        .and_then(|n| n.checked_add(HEADER_LEN))
        .ok_or_else(|| Error::Format(alloc::format!("{rows}x{cols} payload size overflows")))?;
    if bytes.len() < expected {
        return Err(Error::Truncated { expected, found: bytes.len() });
    }
    if bytes.len() > expected {
        bail!(Format, "{} trailing bytes after payload", bytes.len() - expected);
    }
    let data = bytes[HEADER_LEN..]
        .chunks_exact(4)
        .map(|c| f64::from(f32::from_le_bytes([c[0], c[1], c[2], c[3]])))
        .collect();
    Matrix::new(rows, cols, data)
}
