use serde::{Deserialize, Serialize};

use crate::dataset::Label;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl ConfusionCounts {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }
}

pub fn confusion(labels: &[Label], predictions: &[Label], positive: Label) -> Result<ConfusionCounts> {
    if labels.len() != predictions.len() {
        return Err(Error::LengthMismatch {
            expected: labels.len(),
            actual: predictions.len(),
        });
    }
    let mut c = ConfusionCounts::default();
    for (&y, &p) in labels.iter().zip(predictions) {
        match (y == positive, p == positive) {
            (true, true) => c.tp += 1,
            (false, true) => c.fp += 1,
            (false, false) => c.tn += 1,
            (true, false) => c.fn_ += 1,
        }
    }
    Ok(c)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrecisionRecall {
    pub precision: f64,
    pub recall: f64,
    /// `tp + fp = 0`; precision reported as 0.
    pub precision_undefined: bool,
    /// `tp + fn = 0`; recall reported as 0.
    pub recall_undefined: bool,
}

fn ratio(num: usize, den: usize) -> (f64, bool) {
    if den == 0 {
        (0.0, true)
    } else {
        (num as f64 / den as f64, false)
    }
}

pub fn precision_recall(c: &ConfusionCounts) -> PrecisionRecall {
    let (precision, precision_undefined) = ratio(c.tp, c.tp + c.fp);
    let (recall, recall_undefined) = ratio(c.tp, c.tp + c.fn_);
    PrecisionRecall {
        precision,
        recall,
        precision_undefined,
        recall_undefined,
    }
}

/// `(1 + b^2) p r / (b^2 p + r)`, 0 when both are 0.
pub fn f_score(p: f64, r: f64, beta: f64) -> f64 {
    let b2 = beta * beta;
    let den = b2 * p + r;
    if den == 0.0 {
        0.0
    } else {
        (1.0 + b2) * p * r / den
    }
}

pub fn g_score(p: f64, r: f64) -> f64 {
    (p * r).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub counts: ConfusionCounts,
    pub precision: f64,
    pub recall: f64,
    pub f_score: f64,
    pub g_score: f64,
    pub precision_undefined: bool,
    pub recall_undefined: bool,
}

/// Precision, recall, F1 and G with `positive` as the positive class.
pub fn class_metrics(labels: &[Label], predictions: &[Label], positive: Label) -> Result<ClassMetrics> {
    let counts = confusion(labels, predictions, positive)?;
    let pr = precision_recall(&counts);
    Ok(ClassMetrics {
        counts,
        precision: pr.precision,
        recall: pr.recall,
        f_score: f_score(pr.precision, pr.recall, 1.0),
        g_score: g_score(pr.precision, pr.recall),
        precision_undefined: pr.precision_undefined,
        recall_undefined: pr.recall_undefined,
    })
}
