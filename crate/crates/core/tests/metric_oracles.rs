use cgmos_core::eval::metrics::{class_metrics, confusion, f_score, g_score};
use cgmos_core::eval::roc::roc_auc;
use cgmos_core::eval::wilcoxon::{wilcoxon_exact, wilcoxon_normal, wilcoxon_signed_rank, PValueMethod};
use cgmos_core::Label;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn label(b: bool) -> Label {
    if b {
        Label::Minority
    } else {
        Label::Majority
    }
}

/// Pairs `(positive, negative)` with ties worth one half.
fn mann_whitney(labels: &[Label], scores: &[f64]) -> f64 {
    let (mut wins, mut pairs) = (0.0, 0.0);
    for i in 0..labels.len() {
        for j in 0..labels.len() {
            if labels[i] == Label::Minority && labels[j] == Label::Majority {
                pairs += 1.0;
                if scores[i] > scores[j] {
                    wins += 1.0;
                } else if scores[i] == scores[j] {
                    wins += 0.5;
                }
            }
        }
    }
    wins / pairs
}

/// Two-sided p by listing every sign assignment.
fn enumerate_p(diffs: &[f64]) -> f64 {
    let abs: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    let rank = |i: usize| {
        let below = abs.iter().filter(|&&a| a < abs[i]).count() as f64;
        let equal = abs.iter().filter(|&&a| a == abs[i]).count() as f64;
        below + (equal + 1.0) / 2.0
    };
    let ranks: Vec<f64> = (0..abs.len()).map(rank).collect();
    let w: f64 = (0..diffs.len()).filter(|&i| diffs[i] > 0.0).map(|i| ranks[i]).sum();
    let n = diffs.len();
    let (mut le, mut ge) = (0u64, 0u64);
    for mask in 0u64..(1 << n) {
        let s: f64 = (0..n).filter(|b| mask >> b & 1 == 1).map(|b| ranks[b]).sum();
        if s <= w + 1e-9 {
            le += 1;
        }
        if s >= w - 1e-9 {
            ge += 1;
        }
    }
    let total = (1u64 << n) as f64;
    (2.0 * (le.min(ge) as f64) / total).min(1.0)
}

#[test]
fn confusion_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..1000 {
        let n = rng.random_range(1..40);
        let y: Vec<Label> = (0..n).map(|_| label(rng.random_bool(0.3))).collect();
        let p: Vec<Label> = (0..n).map(|_| label(rng.random_bool(0.4))).collect();
        for positive in [Label::Minority, Label::Majority] {
            let m = class_metrics(&y, &p, positive).unwrap();
            let tp = (0..n).filter(|&i| y[i] == positive && p[i] == positive).count();
            let fp = (0..n).filter(|&i| y[i] != positive && p[i] == positive).count();
            let fn_ = (0..n).filter(|&i| y[i] == positive && p[i] != positive).count();
            assert_eq!(confusion(&y, &p, positive).unwrap().total(), n);
            let prec = if tp + fp == 0 { 0.0 } else { tp as f64 / (tp + fp) as f64 };
            let rec = if tp + fn_ == 0 { 0.0 } else { tp as f64 / (tp + fn_) as f64 };
            let f1 = if prec + rec == 0.0 { 0.0 } else { 2.0 * prec * rec / (prec + rec) };
            assert_eq!(m.precision, prec);
            assert_eq!(m.recall, rec);
            assert_eq!(m.f_score, f1);
            assert_eq!(m.g_score, (prec * rec).sqrt());
            assert_eq!(m.precision_undefined, tp + fp == 0);
        }
    }
}

#[test]
fn auc_matches_mann_whitney() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..200 {
        let n = rng.random_range(2..=30);
        let mut y: Vec<Label> = (0..n).map(|_| label(rng.random_bool(0.4))).collect();
        y[0] = Label::Minority;
        y[1] = Label::Majority;
        // Coarse scores so ties are common.
        let s: Vec<f64> = (0..n).map(|_| rng.random_range(0..6) as f64 / 5.0).collect();
        let c = roc_auc(&y, &s, Label::Minority).unwrap();
        assert!((c.auc - mann_whitney(&y, &s)).abs() <= 1e-12);
    }
}

#[test]
fn wilcoxon_exact_matches_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..200 {
        let n = rng.random_range(5..=12);
        let a: Vec<f64> = (0..n).map(|_| rng.random_range(0..8) as f64).collect();
        let b: Vec<f64> = (0..n).map(|_| rng.random_range(0..8) as f64).collect();
        let diffs: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - y).filter(|d| *d != 0.0).collect();
        match wilcoxon_signed_rank(&a, &b) {
            Ok(r) => {
                assert_eq!(r.method, PValueMethod::Exact);
                assert!((r.p_value - enumerate_p(&diffs)).abs() <= 1e-12);
            }
            Err(_) => assert!(diffs.len() < 5),
        }
    }
}

#[test]
fn wilcoxon_hand_built_six() {
    let a = [0.80, 0.75, 0.90, 0.70, 0.85, 0.60];
    let b = [0.78, 0.79, 0.84, 0.69, 0.80, 0.61];
    let diffs: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
    let r = wilcoxon_signed_rank(&a, &b).unwrap();
    assert!((r.p_value - enumerate_p(&diffs)).abs() <= 1e-12);
}

#[test]
fn normal_tracks_exact_at_twenty() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    for _ in 0..300 {
        let shift = rng.random_range(-0.5..0.5);
        let a: Vec<f64> = (0..20).map(|_| rng.random::<f64>() + shift).collect();
        let b: Vec<f64> = (0..20).map(|_| rng.random::<f64>()).collect();
        let e = wilcoxon_exact(&a, &b).unwrap().p_value;
        let z = wilcoxon_normal(&a, &b).unwrap().p_value;
        worst = worst.max((e - z).abs());
    }
    assert!(worst <= 0.02, "worst gap {worst}");
}

proptest! {
    #[test]
    fn f_and_g_between_p_and_r(p in 0.001f64..=1.0, r in 0.001f64..=1.0) {
        let (lo, hi) = (p.min(r), p.max(r));
        let f = f_score(p, r, 1.0);
        let g = g_score(p, r);
        prop_assert!(f >= lo - 1e-15 && f <= hi + 1e-15);
        prop_assert!(g >= lo - 1e-15 && g <= hi + 1e-15);
    }

    #[test]
    fn roc_monotone(scores in prop::collection::vec(0u8..10, 4..40), flips in prop::collection::vec(any::<bool>(), 40)) {
        let n = scores.len();
        let mut y: Vec<Label> = (0..n).map(|i| label(flips[i])).collect();
        y[0] = Label::Minority;
        y[1] = Label::Majority;
        let s: Vec<f64> = scores.iter().map(|&v| v as f64).collect();
        let c = roc_auc(&y, &s, Label::Minority).unwrap();
        let first = c.points[0];
        let last = c.points[c.points.len() - 1];
        prop_assert_eq!((first.fpr, first.tpr), (0.0, 0.0));
        prop_assert_eq!((last.fpr, last.tpr), (1.0, 1.0));
        for w in c.points.windows(2) {
            prop_assert!(w[1].fpr >= w[0].fpr && w[1].tpr >= w[0].tpr);
        }
        prop_assert!((0.0..=1.0).contains(&c.auc));
    }

    #[test]
    fn wilcoxon_swap_symmetric(a in prop::collection::vec(0.0f64..1.0, 6..25), b in prop::collection::vec(0.0f64..1.0, 25)) {
        let b = &b[..a.len()];
        let ab = wilcoxon_signed_rank(&a, b).unwrap();
        let ba = wilcoxon_signed_rank(b, &a).unwrap();
        prop_assert!((ab.p_value - ba.p_value).abs() <= 1e-15);
        prop_assert!((0.0..=1.0).contains(&ab.p_value));
    }
}
