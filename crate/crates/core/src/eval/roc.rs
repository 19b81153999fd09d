use serde::{Deserialize, Serialize};

use crate::dataset::Label;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    /// Scores `>= threshold` are called positive; `None` is +inf.
    pub threshold: Option<f64>,
    pub fpr: f64,
    pub tpr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    pub points: Vec<RocPoint>,
    pub auc: f64,
}

/// ROC curve with tied scores merged into one (possibly diagonal) step,
/// and the trapezoid area under it.
pub fn roc_auc(labels: &[Label], scores: &[f64], positive: Label) -> Result<RocCurve> {
    if labels.len() != scores.len() {
        return Err(Error::LengthMismatch {
            expected: labels.len(),
            actual: scores.len(),
        });
    }
    if let Some(i) = scores.iter().position(|s| s.is_nan()) {
        return Err(Error::Parameter(format!("score {i} is NaN")));
    }
    let n_pos = labels.iter().filter(|&&l| l == positive).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::DegenerateDataset("ROC needs both classes".into()));
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));

    let mut points = vec![RocPoint {
        threshold: None,
        fpr: 0.0,
        tpr: 0.0,
    }];
    // Twice the area in units of (negatives x positives), kept integral.
    let mut area2: u128 = 0;
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut k = 0;
    while k < order.len() {
        let s = scores[order[k]];
        let (tp0, fp0) = (tp, fp);
        while k < order.len() && scores[order[k]] == s {
            if labels[order[k]] == positive {
                tp += 1;
            } else {
                fp += 1;
            }
            k += 1;
        }
        area2 += ((fp - fp0) * (tp + tp0)) as u128;
        points.push(RocPoint {
            threshold: Some(s),
            fpr: fp as f64 / n_neg as f64,
            tpr: tp as f64 / n_pos as f64,
        });
    }
    let auc = area2 as f64 / (2.0 * n_pos as f64 * n_neg as f64);
    Ok(RocCurve { points, auc })
}

/// Trapezoid area under an arbitrary list of `(fpr, tpr)` points.
pub fn auc_from_points(points: &[(f64, f64)]) -> f64 {
    points
        .windows(2)
        .map(|w| (w[1].0 - w[0].0) * (w[1].1 + w[0].1) / 2.0)
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use Label::{Majority as N, Minority as P};

    #[test]
    fn separated_and_tied() {
        let c = roc_auc(&[P, P, N, N], &[0.9, 0.8, 0.3, 0.1], P).unwrap();
        assert_eq!(c.auc, 1.0);
        let c = roc_auc(&[P, N, N, P, N], &[0.4; 5], P).unwrap();
        assert_eq!(c.auc, 0.5);
        assert_eq!(c.points.len(), 2);
        let last = c.points.last().unwrap();
        assert_eq!((last.fpr, last.tpr), (1.0, 1.0));
    }

    #[test]
    fn curve_is_monotone_and_anchored() {
        let labels = [P, N, P, N, N, P, N];
        let scores = [0.2, 0.2, 0.7, 0.1, 0.9, 0.7, 0.5];
        let c = roc_auc(&labels, &scores, P).unwrap();
        assert_eq!((c.points[0].fpr, c.points[0].tpr), (0.0, 0.0));
        for w in c.points.windows(2) {
            assert!(w[1].fpr >= w[0].fpr && w[1].tpr >= w[0].tpr);
        }
        let xy: Vec<(f64, f64)> = c.points.iter().map(|p| (p.fpr, p.tpr)).collect();
        assert!((auc_from_points(&xy) - c.auc).abs() < 1e-12);
    }

    #[test]
    fn single_class_rejected() {
        assert!(roc_auc(&[P, P], &[0.1, 0.2], P).is_err());
        assert!(roc_auc(&[P, N], &[0.1, f64::NAN], P).is_err());
    }
}
