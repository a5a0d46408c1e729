//! Brute-force reference implementations used to check the fast paths.
//!
//! Shared by the integration tests here and by the acceptance runner in the
//! `oodkit` crate (included there with `#[path]`).

#![allow(dead_code)]

use oodkit_core::image::ImageBuffer;

/// Nearest-rank percentile by full sort and linear scan for the smallest
/// 1-based rank `r` with `100 r >= p n`.
pub fn percentile(values: &[f64], p: f64) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len();
    let target = p * n as f64;
    for r in 1..=n {
        if r as f64 * 100.0 >= target {
            return sorted[r - 1];
        }
    }
    sorted[n - 1]
}

/// Largest threshold among all scores and `-inf` that keeps at least a
/// fraction `q` of the scores strictly above it.
pub fn tau(scores: &[f64], q: f64) -> f64 {
    let n = scores.len() as f64;
    let mut best = f64::NEG_INFINITY;
    for &t in scores {
        let kept = scores.iter().filter(|&&s| s > t).count() as f64;
        if kept / n >= q && t > best {
            best = t;
        }
    }
    best
}

/// Pairwise AUROC: P(id > ood) + ½ P(id = ood).
pub fn auroc(id: &[f64], ood: &[f64]) -> f64 {
    let mut wins = 0.0;
    for &a in id {
        for &b in ood {
            if a > b {
                wins += 1.0;
            } else if a == b {
                wins += 0.5;
            }
        }
    }
    wins / (id.len() * ood.len()) as f64
}

/// Mean softmax cross-entropy computed directly from the definition.
pub fn mean_xent(logits: &[Vec<f64>], labels: &[usize]) -> f64 {
    let mut total = 0.0;
    for (row, &y) in logits.iter().zip(labels) {
        let z: f64 = row.iter().map(|v| v.exp()).sum();
        total += -(row[y].exp() / z).ln();
    }
    total / logits.len() as f64
}

/// Central finite-difference gradient of [`mean_xent`].
pub fn xent_grad_fd(logits: &[Vec<f64>], labels: &[usize], step: f64) -> Vec<f64> {
    let mut out = Vec::new();
    for i in 0..logits.len() {
        for j in 0..logits[i].len() {
            let mut plus = logits.to_vec();
            let mut minus = logits.to_vec();
            plus[i][j] += step;
            minus[i][j] -= step;
            out.push((mean_xent(&plus, labels) - mean_xent(&minus, labels)) / (2.0 * step));
        }
    }
    out
}

/// `‖a - b‖ / (‖a‖ + ‖b‖)`, 0 when both are zero.
pub fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    let norm = |v: &mut dyn Iterator<Item = f64>| v.map(|x| x * x).sum::<f64>().sqrt();
    let diff = norm(&mut a.iter().zip(b).map(|(x, y)| x - y));
    let scale = norm(&mut a.iter().copied()) + norm(&mut b.iter().copied());
    if scale == 0.0 {
        0.0
    } else {
        diff / scale
    }
}

/// Bilinear resize written out with four explicit corner weights,
/// half-pixel centres, edge clamping.
pub fn bilinear(src: &[Vec<f64>], out_h: usize, out_w: usize) -> Vec<Vec<f64>> {
    let (h, w) = (src.len(), src[0].len());
    let coord = |i: usize, scale: f64, max: usize| -> (usize, usize, f64) {
        let x = ((i as f64 + 0.5) * scale - 0.5).max(0.0).min((max - 1) as f64);
        let x0 = x.floor() as usize;
        let x1 = (x0 + 1).min(max - 1);
        (x0, x1, x - x0 as f64)
    };
    let mut out = vec![vec![0.0; out_w]; out_h];
    for (r, row) in out.iter_mut().enumerate() {
        let (y0, y1, fy) = coord(r, h as f64 / out_h as f64, h);
        for (c, px) in row.iter_mut().enumerate() {
            let (x0, x1, fx) = coord(c, w as f64 / out_w as f64, w);
            *px = src[y0][x0] * (1.0 - fy) * (1.0 - fx)
                + src[y0][x1] * (1.0 - fy) * fx
                + src[y1][x0] * fy * (1.0 - fx)
                + src[y1][x1] * fy * fx;
        }
    }
    out
}

pub fn image_rows(img: &ImageBuffer) -> Vec<Vec<f64>> {
    img.pixels().chunks(img.width()).map(<[f64]>::to_vec).collect()
}

/// One-sided exact sign test: P(X >= successes) for X ~ Binomial(n, ½).
pub fn sign_test_p(successes: usize, n: usize) -> f64 {
    let mut log_fact = vec![0.0f64; n + 1];
    for i in 1..=n {
        log_fact[i] = log_fact[i - 1] + (i as f64).ln();
    }
    (successes..=n)
        .map(|k| (log_fact[n] - log_fact[k] - log_fact[n - k] - n as f64 * std::f64::consts::LN_2).exp())
        .sum()
}

/// Sum over classes of the sample variance of `rows`.
pub fn total_variance(rows: &[Vec<f64>]) -> f64 {
    let n = rows.len() as f64;
    let k = rows[0].len();
    (0..k)
        .map(|j| {
            let mean = rows.iter().map(|r| r[j]).sum::<f64>() / n;
            rows.iter().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / (n - 1.0)
        })
        .sum()
}

pub mod fixtures {
    use oodkit_core::augment::AugmentSpec;
    use oodkit_core::image::ImageBuffer;
    use oodkit_core::metrics::auroc;
    use oodkit_core::ood::{calibrate_tau, energy_score, fit_react_threshold, rectified_forward};
    use oodkit_core::quantile::fraction_above;
    use oodkit_core::synth::{axis_means, generate_ood, generate_synthetic, held_out_axis_mean, SyntheticSpec};
    use oodkit_core::train::{train_head, TrainConfig};
    use oodkit_core::tta::{tta_predict, BlockMeanFeaturizer, TtaConfig};
    use oodkit_core::{seeded_rng, LinearHead, Matrix};
    use rand::RngExt;

    pub const TTA_GRID: usize = 2;
    pub const TTA_SIDE: usize = 8;

    pub fn random_image(seed: u64) -> ImageBuffer {
        let mut rng = seeded_rng(seed);
        let px = (0..TTA_SIDE * TTA_SIDE).map(|_| rng.random::<f64>()).collect();
        ImageBuffer::new(TTA_SIDE, TTA_SIDE, px).unwrap()
    }

    pub fn random_head(seed: u64, m: usize, k: usize) -> LinearHead {
        let mut rng = seeded_rng(seed);
        let w = (0..m * k).map(|_| rng.random_range(-1.0..1.0)).collect();
        LinearHead::new(Matrix::new(m, k, w).unwrap(), vec![0.0; k]).unwrap()
    }

    /// Fused logits of one image under `seeds` different TTA seeds.
    pub fn tta_replicates(img: &ImageBuffer, head: &LinearHead, iterations: usize, seeds: u64) -> Vec<Vec<f64>> {
        let f = BlockMeanFeaturizer::new(TTA_GRID).unwrap();
        (0..seeds)
            .map(|s| {
                let cfg = TtaConfig { iterations, include_identity: false, seed: 1000 + s };
                tta_predict(img, &f, head, f64::INFINITY, &cfg, &AugmentSpec::default())
                    .unwrap()
                    .into_matrix()
                    .into_data()
            })
            .collect()
    }

    #[derive(Debug, Clone, Copy)]
    pub struct ContractOutcome {
        pub held_out_retention: f64,
        pub auroc_plain: f64,
        pub auroc_react: f64,
        pub held_out_accuracy: f64,
    }

    pub const CONTRACT_CLASSES: usize = 3;
    pub const CONTRACT_DIM: usize = 8;
    pub const CONTRACT_PER_CLASS: usize = 100;
    /// Class means sit this many standard deviations from the origin on
    /// separate axes; the OOD mean sits on the next unused axis, which puts
    /// it `sqrt(2)` times as far from every class mean.
    pub const CONTRACT_SEPARATION: f64 = 6.0;

    /// Seeded synth → train → ReAct fit → τ at `q` → held-out evaluation.
    pub fn calibration_contract(seed: u64, q: f64, p: f64, use_ema: bool) -> ContractOutcome {
        let std = 1.0;
        let means = axis_means(CONTRACT_CLASSES, CONTRACT_DIM, CONTRACT_SEPARATION * std).unwrap();
        let spec = |seed| SyntheticSpec { means: means.clone(), std, per_class: CONTRACT_PER_CLASS, seed };
        let (train_x, train_y) = generate_synthetic(&spec(seed)).unwrap();
        let (test_x, test_y) = generate_synthetic(&spec(seed + 1)).unwrap();
        let ood_mean = held_out_axis_mean(CONTRACT_CLASSES, CONTRACT_DIM, CONTRACT_SEPARATION * std).unwrap();
        let ood_x = generate_ood(&ood_mean, std, CONTRACT_CLASSES * CONTRACT_PER_CLASS, seed + 2).unwrap();

        let out = train_head(&train_x, &train_y, &TrainConfig { seed, ..Default::default() }).unwrap();
        let head = if use_ema { out.ema_head } else { out.final_head };

        let c = fit_react_threshold(&train_x, p).unwrap();
        let cal = calibrate_tau(&energy_score(&rectified_forward(&train_x, &head, c).unwrap()), q).unwrap();
        let test_logits = rectified_forward(&test_x, &head, c).unwrap();
        let test_scores = energy_score(&test_logits);
        let react_ood = energy_score(&rectified_forward(&ood_x, &head, c).unwrap());
        let plain_id = energy_score(&head.forward(&test_x).unwrap());
        let plain_ood = energy_score(&head.forward(&ood_x).unwrap());
        ContractOutcome {
            held_out_retention: fraction_above(&test_scores, cal.tau),
            auroc_plain: auroc(&plain_id, &plain_ood).unwrap(),
            auroc_react: auroc(&test_scores, &react_ood).unwrap(),
            held_out_accuracy: oodkit_core::metrics::accuracy(&test_logits.argmax(), &test_y).unwrap(),
        }
    }
}
