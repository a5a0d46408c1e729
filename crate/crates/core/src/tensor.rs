//! Dense row-major containers shared by every other module.
//!
//! [`Matrix`] is the untyped carrier; [`FeatureMatrix`] and [`LogitMatrix`]
//! add the role-specific column constraints. All constructors reject
//! non-finite entries, so downstream code never has to re-check.

use alloc::vec::Vec;
use core::ops::Deref;

use crate::error::{bail, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        let expected = rows.checked_mul(cols);
        if expected != Some(data.len()) {
            bail!(Shape, "{rows}x{cols} matrix needs {} values, got {}", rows * cols, data.len());
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            bail!(NonFinite, "entry ({}, {}) is {}", pos / cols.max(1), pos % cols.max(1), data[pos]);
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: alloc::vec![0.0; rows * cols] }
    }

    /// Builds a matrix from equally long rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != cols {
                bail!(Shape, "row {i} has {} values, expected {cols}", r.len());
            }
            data.extend_from_slice(r);
        }
        Self::new(rows.len(), cols, data)
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn row_iter(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        (0..self.rows).map(move |i| self.row(i))
    }

    /// Returns a new matrix made of the selected rows, in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> Result<Self> {
        let mut data = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            if i >= self.rows {
                bail!(Shape, "row index {i} out of range for {} rows", self.rows);
            }
            data.extend_from_slice(self.row(i));
        }
        Ok(Self { rows: indices.len(), cols: self.cols, data })
    }

    pub(crate) fn from_parts_unchecked(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(rows * cols, data.len());
        debug_assert!(data.iter().all(|v| v.is_finite()));
        Self { rows, cols, data }
    }
}

/// Penultimate-layer activations, one sample per row.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix(Matrix);

impl FeatureMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        Matrix::new(rows, cols, data).and_then(Self::try_from)
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        Matrix::from_rows(rows).and_then(Self::try_from)
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }
}

impl TryFrom<Matrix> for FeatureMatrix {
    type Error = crate::Error;

    fn try_from(m: Matrix) -> Result<Self> {
        if m.cols == 0 {
            bail!(Shape, "feature matrix needs at least one column");
        }
        Ok(Self(m))
    }
}

impl Deref for FeatureMatrix {
    type Target = Matrix;
    fn deref(&self) -> &Matrix {
        &self.0
    }
}

/// Classifier outputs, one sample per row and one class per column (K >= 2).
#[derive(Debug, Clone, PartialEq)]
pub struct LogitMatrix(Matrix);

impl LogitMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        Matrix::new(rows, cols, data).and_then(Self::try_from)
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        Matrix::from_rows(rows).and_then(Self::try_from)
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }

    pub fn num_classes(&self) -> usize {
        self.0.cols
    }

    /// Index of the largest logit per row; ties go to the lowest class index.
    pub fn argmax(&self) -> LabelVector {
        LabelVector(self.row_iter().map(argmax).collect())
    }
}

impl TryFrom<Matrix> for LogitMatrix {
    type Error = crate::Error;

    fn try_from(m: Matrix) -> Result<Self> {
        if m.cols < 2 {
            bail!(Shape, "logit matrix needs at least 2 classes, got {}", m.cols);
        }
        Ok(Self(m))
    }
}

impl Deref for LogitMatrix {
    type Target = Matrix;
    fn deref(&self) -> &Matrix {
        &self.0
    }
}

pub(crate) fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (k, &v) in row.iter().enumerate().skip(1) {
        if v > row[best] {
            best = k;
        }
    }
    best
}

/// Linear classifier `logits = h · W + b` with `W` of shape m×K.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearHead {
    weights: Matrix,
    bias: Vec<f64>,
}

impl LinearHead {
    pub fn new(weights: Matrix, bias: Vec<f64>) -> Result<Self> {
        if weights.rows == 0 {
            bail!(Shape, "head weights need at least one feature row");
        }
        if weights.cols < 2 {
            bail!(Shape, "head needs at least 2 classes, got {}", weights.cols);
        }
        if bias.len() != weights.cols {
            bail!(Shape, "bias length {} != class count {}", bias.len(), weights.cols);
        }
        if bias.iter().any(|b| !b.is_finite()) {
            bail!(NonFinite, "bias contains a non-finite value");
        }
        Ok(Self { weights, bias })
    }

    pub fn weights(&self) -> &Matrix {
        &self.weights
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn feature_dim(&self) -> usize {
        self.weights.rows
    }

    pub fn num_classes(&self) -> usize {
        self.weights.cols
    }

    /// Bias as a 1×K matrix, the layout used when exporting the head.
    pub fn bias_matrix(&self) -> Matrix {
        Matrix::from_parts_unchecked(1, self.bias.len(), self.bias.clone())
    }

    /// Plain forward pass without any rectification.
    pub fn forward(&self, features: &FeatureMatrix) -> Result<LogitMatrix> {
        self.forward_with(features, |x| x)
    }

    /// Forward pass with an element-wise map applied to every activation first.
    pub(crate) fn forward_with(
        &self,
        features: &FeatureMatrix,
        act: impl Fn(f64) -> f64,
    ) -> Result<LogitMatrix> {
        let (m, k) = (self.weights.rows, self.weights.cols);
        if features.cols() != m {
            bail!(Shape, "features have {} columns but head expects {m}", features.cols());
        }
        let mut out = Vec::with_capacity(features.rows() * k);
        for h in features.row_iter() {
            out.extend_from_slice(&self.bias);
            let start = out.len() - k;
            let logits = &mut out[start..];
            for (j, &x) in h.iter().enumerate() {
                let x = act(x);
                for (z, &w) in logits.iter_mut().zip(self.weights.row(j)) {
                    *z += x * w;
                }
            }
        }
        LogitMatrix::new(features.rows(), k, out)
    }
}

/// Class indices in `[0, K)`, one per sample.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LabelVector(Vec<usize>);

impl LabelVector {
    pub fn new(labels: Vec<usize>) -> Self {
        Self(labels)
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Number of classes implied by the largest label.
    pub fn implied_classes(&self) -> usize {
        self.0.iter().max().map_or(0, |&m| m + 1)
    }

    pub fn check_range(&self, num_classes: usize) -> Result<()> {
        if let Some((i, &l)) = self.0.iter().enumerate().find(|(_, &l)| l >= num_classes) {
            bail!(Domain, "label {l} at position {i} is out of range for {num_classes} classes");
        }
        Ok(())
    }
}

impl From<Vec<usize>> for LabelVector {
    fn from(v: Vec<usize>) -> Self {
        Self(v)
    }
}
