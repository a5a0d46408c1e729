//! Seeded Gaussian stand-ins for penultimate-layer features.

use alloc::vec::Vec;

use rand_distr::{Distribution, StandardNormal};

use crate::error::{bail, Result};
use crate::tensor::{FeatureMatrix, LabelVector};
use crate::SeededRng;

/// Isotropic Gaussian clusters, one per class.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub means: Vec<Vec<f64>>,
    /// Per-coordinate standard deviation. Zero puts every sample on its mean.
    pub std: f64,
    pub per_class: usize,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn feature_dim(&self) -> usize {
        self.means.first().map_or(0, Vec::len)
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.feature_dim();
        if self.means.is_empty() || m == 0 {
            bail!(Domain, "need at least one class with a non-empty mean");
        }
        if let Some(i) = self.means.iter().position(|mu| mu.len() != m) {
            bail!(Shape, "mean {i} has {} coordinates, expected {m}", self.means[i].len());
        }
        if self.means.iter().flatten().any(|v| !v.is_finite()) {
            bail!(NonFinite, "class means must be finite");
        }
        for (i, a) in self.means.iter().enumerate() {
            if self.means[..i].contains(a) {
                bail!(Domain, "class mean {i} duplicates an earlier class");
            }
        }
        if !(self.std.is_finite() && self.std >= 0.0) {
            bail!(Domain, "std must be finite and non-negative, got {}", self.std);
        }
        if self.per_class == 0 {
            bail!(Domain, "per_class must be at least 1");
        }
        Ok(())
    }
}

fn draw(rng: &mut SeededRng, mean: &[f64], std: f64, out: &mut Vec<f64>) {
    out.extend(mean.iter().map(|&mu| {
        let z: f64 = StandardNormal.sample(rng);
        mu + std * z
    }));
}

/// Draws `per_class` samples per class, class-major (all of class 0 first).
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<(FeatureMatrix, LabelVector)> {
    spec.validate()?;
    let m = spec.feature_dim();
    let n = spec.means.len() * spec.per_class;
    let mut rng = crate::seeded_rng(spec.seed);
    let mut data = Vec::with_capacity(n * m);
    let mut labels = Vec::with_capacity(n);
    for (class, mean) in spec.means.iter().enumerate() {
        for _ in 0..spec.per_class {
            draw(&mut rng, mean, spec.std, &mut data);
            labels.push(class);
        }
    }
    Ok((FeatureMatrix::new(n, m, data)?, LabelVector::new(labels)))
}

/// Draws `count` samples around a single held-out mean.
pub fn generate_ood(mean: &[f64], std: f64, count: usize, seed: u64) -> Result<FeatureMatrix> {
    if mean.is_empty() {
        bail!(Domain, "OOD mean must be non-empty");
    }
    if !(std.is_finite() && std >= 0.0) {
        bail!(Domain, "std must be finite and non-negative, got {std}");
    }
    let mut rng = crate::seeded_rng(seed);
    let mut data = Vec::with_capacity(count * mean.len());
    for _ in 0..count {
        draw(&mut rng, mean, std, &mut data);
    }
    FeatureMatrix::new(count, mean.len(), data)
}

/// Class means `separation * e_k` on the first `classes` coordinate axes.
pub fn axis_means(classes: usize, dim: usize, separation: f64) -> Result<Vec<Vec<f64>>> {
    if classes == 0 || classes > dim {
        bail!(Domain, "axis layout needs 1 <= classes <= dim, got {classes} classes in dim {dim}");
    }
    Ok((0..classes)
        .map(|k| {
            let mut mu = alloc::vec![0.0; dim];
            mu[k] = separation;
            mu
        })
        .collect())
}

/// OOD mean `separation * e_classes`: the first axis no class uses.
///
/// Its distance to every class mean is `separation * sqrt(2)`.
pub fn held_out_axis_mean(classes: usize, dim: usize, separation: f64) -> Result<Vec<f64>> {
    if classes >= dim {
        bail!(Domain, "held-out axis needs dim > classes, got {classes} classes in dim {dim}");
    }
    let mut mu = alloc::vec![0.0; dim];
    mu[classes] = separation;
    Ok(mu)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn spec(std: f64, per_class: usize) -> SyntheticSpec {
        SyntheticSpec { means: vec![vec![1.0, -2.0, 0.5], vec![-3.0, 0.0, 4.0]], std, per_class, seed: 11 }
    }

    #[test]
    fn deterministic() {
        assert_eq!(generate_synthetic(&spec(1.0, 20)).unwrap(), generate_synthetic(&spec(1.0, 20)).unwrap());
        let mut other = spec(1.0, 20);
        other.seed = 12;
        assert_ne!(generate_synthetic(&other).unwrap().0, generate_synthetic(&spec(1.0, 20)).unwrap().0);
    }

    #[test]
    fn zero_std_hits_means() {
        let s = spec(0.0, 5);
        let (x, y) = generate_synthetic(&s).unwrap();
        for (row, &label) in x.row_iter().zip(y.as_slice()) {
            assert_eq!(row, s.means[label].as_slice());
        }
    }

    #[test]
    fn sample_mean_within_five_standard_errors() {
        let n = 10_000;
        let s = SyntheticSpec { means: vec![vec![1.0, -2.0, 0.5]], std: 2.0, per_class: n, seed: 5 };
        let (x, _) = generate_synthetic(&s).unwrap();
        let bound = 5.0 * s.std / libm::sqrt(n as f64);
        for j in 0..3 {
            let mean: f64 = x.row_iter().map(|r| r[j]).sum::<f64>() / n as f64;
            assert!((mean - s.means[0][j]).abs() < bound, "coord {j}: {mean}");
        }
    }

    #[test]
    fn validation() {
        let mut s = spec(1.0, 0);
        assert!(generate_synthetic(&s).is_err());
        s.per_class = 1;
        s.means[1] = s.means[0].clone();
        assert!(generate_synthetic(&s).is_err());
        assert!(generate_synthetic(&spec(-1.0, 3)).is_err());
        assert!(axis_means(3, 2, 1.0).is_err());
        assert!(held_out_axis_mean(3, 3, 1.0).is_err());
    }

    #[test]
    fn layouts() {
        let means = axis_means(3, 8, 6.0).unwrap();
        assert_eq!(means[2][2], 6.0);
        let ood = held_out_axis_mean(3, 8, 6.0).unwrap();
        assert_eq!(ood[3], 6.0);
        let x = generate_ood(&ood, 1.0, 7, 1).unwrap();
        assert_eq!((x.rows(), x.cols()), (7, 8));
    }
}
