//! Invariants of the detection pipeline over random inputs.

use oodkit_core::ema::{EmaState, ParamVector};
use oodkit_core::metrics::{auroc, fpr_at_tpr};
use oodkit_core::ood::{
    decide, energy_score, ensemble_logits, log_sum_exp, react_clip, rectified_forward, ScoreVector, Verdict,
};
use oodkit_core::{FeatureMatrix, LinearHead, LogitMatrix, Matrix};
use proptest::prelude::*;

fn logits() -> impl Strategy<Value = LogitMatrix> {
    (1..12usize, 2..6usize).prop_flat_map(|(n, k)| {
        prop::collection::vec(-20.0..20.0f64, n * k).prop_map(move |v| LogitMatrix::new(n, k, v).unwrap())
    })
}

fn features_and_head(nonneg_w: bool) -> impl Strategy<Value = (FeatureMatrix, LinearHead)> {
    let lo = if nonneg_w { 0.0 } else { -2.0 };
    (1..10usize, 1..8usize, 2..5usize).prop_flat_map(move |(n, m, k)| {
        (
            prop::collection::vec(-5.0..5.0f64, n * m),
            prop::collection::vec(lo..2.0f64, m * k),
            prop::collection::vec(-1.0..1.0f64, k),
        )
            .prop_map(move |(x, w, b)| {
                (
                    FeatureMatrix::new(n, m, x).unwrap(),
                    LinearHead::new(Matrix::new(m, k, w).unwrap(), b).unwrap(),
                )
            })
    })
}

fn ranks(v: &[f64]) -> Vec<f64> {
    v.iter().map(|x| v.iter().filter(|y| *y < x).count() as f64).collect()
}

proptest! {
    #[test]
    fn energy_shift_identity(z in prop::collection::vec(-50.0..50.0f64, 1..8), a in -1e6..1e6f64) {
        let shifted: Vec<f64> = z.iter().map(|v| v + a).collect();
        prop_assert!((log_sum_exp(&shifted) - (log_sum_exp(&z) + a)).abs() <= 1e-9);
    }

    #[test]
    fn unclipped_forward_is_plain((x, head) in features_and_head(false)) {
        prop_assert_eq!(rectified_forward(&x, &head, f64::INFINITY).unwrap(), head.forward(&x).unwrap());
    }

    #[test]
    fn clipping_is_monotone_in_c((x, head) in features_and_head(true), c1 in -5.0..5.0f64, d in 0.0..5.0f64) {
        let c2 = c1 + d;
        let (a, b) = (react_clip(&x, c1).unwrap(), react_clip(&x, c2).unwrap());
        prop_assert!(a.data().iter().zip(b.data()).all(|(u, v)| u <= v));
        prop_assert!(a.data().iter().all(|&u| u <= c1));
        let (la, lb) = (rectified_forward(&x, &head, c1).unwrap(), rectified_forward(&x, &head, c2).unwrap());
        prop_assert!(la.data().iter().zip(lb.data()).all(|(u, v)| u <= v));
    }

    #[test]
    fn decisions_follow_score_and_argmax(l in logits(), tau in -30.0..30.0f64) {
        let s = energy_score(&l);
        let d = decide(&s, &l, tau).unwrap();
        let am = l.argmax();
        for (i, di) in d.iter().enumerate() {
            prop_assert_eq!(di.verdict == Verdict::Id, s[i] > tau);
            prop_assert_eq!(di.predicted_class, am.as_slice()[i]);
            prop_assert_eq!(di.score, s[i]);
        }
    }

    #[test]
    fn scoring_is_row_permutation_equivariant(l in logits(), seed in any::<u64>()) {
        let n = l.rows();
        let mut perm: Vec<usize> = (0..n).collect();
        // deterministic shuffle from the seed
        let mut state = seed;
        for i in (1..n).rev() {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            perm.swap(i, (state >> 33) as usize % (i + 1));
        }
        let permuted = LogitMatrix::try_from(l.select_rows(&perm).unwrap()).unwrap();
        let (s, sp) = (energy_score(&l), energy_score(&permuted));
        for (i, &p) in perm.iter().enumerate() {
            prop_assert_eq!(sp[i], s[p]);
        }
    }

    #[test]
    fn ensemble_of_copies_is_identity(l in logits(), copies in 1..5usize) {
        prop_assert_eq!(ensemble_logits(&vec![l.clone(); copies]).unwrap(), l);
    }

    #[test]
    fn auroc_symmetry_and_rank_invariance(
        id in prop::collection::vec(-5.0..5.0f64, 1..30),
        ood in prop::collection::vec(-5.0..5.0f64, 1..30),
    ) {
        let a = auroc(&id, &ood).unwrap();
        prop_assert!((a + auroc(&ood, &id).unwrap() - 1.0).abs() <= 1e-12);
        let pooled: Vec<f64> = id.iter().chain(&ood).copied().collect();
        let r = ranks(&pooled);
        prop_assert_eq!(auroc(&r[..id.len()], &r[id.len()..]).unwrap(), a);
        let scaled = |v: &[f64]| v.iter().map(|x| x * 4.0).collect::<Vec<_>>();
        prop_assert_eq!(auroc(&scaled(&id), &scaled(&ood)).unwrap(), a);
    }

    #[test]
    fn fpr_is_monotone_in_target(
        id in prop::collection::vec(-5.0..5.0f64, 1..40),
        ood in prop::collection::vec(-5.0..5.0f64, 1..40),
        t1 in 0.01..1.0f64,
        t2 in 0.01..1.0f64,
    ) {
        let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
        prop_assert!(fpr_at_tpr(&id, &ood, lo).unwrap() <= fpr_at_tpr(&id, &ood, hi).unwrap());
    }

    #[test]
    fn score_vector_rejects_nan(v in prop::collection::vec(-1.0..1.0f64, 1..5)) {
        let mut bad = v.clone();
        bad.push(f64::NAN);
        prop_assert!(ScoreVector::new(v).is_ok());
        prop_assert!(ScoreVector::new(bad).is_err());
    }

    #[test]
    fn ema_stays_in_hull(
        init in prop::collection::vec(-3.0..3.0f64, 4),
        steps in prop::collection::vec(prop::collection::vec(-3.0..3.0f64, 4), 1..20),
        beta in 0.0..=1.0f64,
    ) {
        let mut ema = EmaState::new(beta, ParamVector::new(init.clone()).unwrap()).unwrap();
        for s in &steps {
            ema.update(&ParamVector::new(s.clone()).unwrap()).unwrap();
        }
        for j in 0..4 {
            let vals = steps.iter().map(|s| s[j]).chain([init[j]]);
            let (lo, hi) = vals.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
            let x = ema.shadow().as_slice()[j];
            prop_assert!(x >= lo - 1e-12 && x <= hi + 1e-12);
        }
    }
}
