use alloc::vec::Vec;

use crate::error::{bail, Result};
use crate::tensor::Matrix;

/// Single-channel image with intensities in `[0, 1]`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageBuffer {
    height: usize,
    width: usize,
    pixels: Vec<f64>,
}

impl ImageBuffer {
    pub fn new(height: usize, width: usize, pixels: Vec<f64>) -> Result<Self> {
        if height == 0 || width == 0 {
            bail!(Shape, "image must be at least 1x1, got {height}x{width}");
        }
        if pixels.len() != height * width {
            bail!(Shape, "{height}x{width} image needs {} pixels, got {}", height * width, pixels.len());
        }
        if let Some(i) = pixels.iter().position(|p| !(0.0..=1.0).contains(p)) {
            bail!(Domain, "pixel {i} = {} outside [0, 1]", pixels[i]);
        }
        Ok(Self { height, width, pixels })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let m = Matrix::from_rows(rows)?;
        Self::from_matrix(&m)
    }

    /// Image from a matrix with rows = height and cols = width.
    pub fn from_matrix(m: &Matrix) -> Result<Self> {
        Self::new(m.rows(), m.cols(), m.data().to_vec())
    }

    pub fn to_matrix(&self) -> Matrix {
        Matrix::from_parts_unchecked(self.height, self.width, self.pixels.clone())
    }

    pub fn filled(height: usize, width: usize, value: f64) -> Result<Self> {
        Self::new(height, width, alloc::vec![value; height * width])
    }

    /// Builds from arbitrary values, clamping each into `[0, 1]`.
    pub(crate) fn from_clamped(height: usize, width: usize, pixels: Vec<f64>) -> Self {
        debug_assert_eq!(pixels.len(), height * width);
        let pixels = pixels.into_iter().map(|p| p.clamp(0.0, 1.0)).collect();
        Self { height, width, pixels }
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.pixels[r * self.width + c]
    }

    pub fn mean(&self) -> f64 {
        self.pixels.iter().sum::<f64>() / self.pixels.len() as f64
    }
}
