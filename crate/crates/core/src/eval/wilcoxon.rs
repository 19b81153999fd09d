use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Largest number of nonzero pairs for which the exact null distribution is used.
pub const EXACT_MAX_N: usize = 20;
pub const MIN_PAIRS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PValueMethod {
    Exact,
    Normal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WilcoxonResult {
    /// Nonzero differences used.
    pub n: usize,
    pub w_plus: f64,
    pub w_minus: f64,
    /// `min(w_plus, w_minus)`.
    pub statistic: f64,
    /// Two-sided.
    pub p_value: f64,
    pub method: PValueMethod,
}

/// Average ranks of `|d|` for the nonzero differences, in input order.
pub fn abs_ranks(diffs: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..diffs.len()).collect();
    order.sort_by(|&a, &b| diffs[a].abs().total_cmp(&diffs[b].abs()));
    let mut ranks = vec![0.0; diffs.len()];
    let mut k = 0;
    while k < order.len() {
        let v = diffs[order[k]].abs();
        let mut end = k;
        while end < order.len() && diffs[order[end]].abs() == v {
            end += 1;
        }
        // Positions k..end hold ranks k+1..=end.
        let avg = (k + 1 + end) as f64 / 2.0;
        for &i in &order[k..end] {
            ranks[i] = avg;
        }
        k = end;
    }
    ranks
}

fn nonzero_differences(a: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            expected: a.len(),
            actual: b.len(),
        });
    }
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    if let Some(i) = diffs.iter().position(|d| !d.is_finite()) {
        return Err(Error::Parameter(format!("pair {i} is not finite")));
    }
    Ok(diffs.into_iter().filter(|&d| d != 0.0).collect())
}

/// Exact two-sided p for `w_plus` given the absolute ranks, by counting
/// sign assignments over doubled (integral) ranks.
pub fn exact_p(ranks: &[f64], w_plus: f64) -> f64 {
    let doubled: Vec<usize> = ranks.iter().map(|r| (2.0 * r).round() as usize).collect();
    let total: usize = doubled.iter().sum();
    let mut counts = vec![0.0f64; total + 1];
    counts[0] = 1.0;
    for &r in &doubled {
        for s in (r..=total).rev() {
            counts[s] += counts[s - r];
        }
    }
    let all = 2f64.powi(ranks.len() as i32);
    let w = (2.0 * w_plus).round() as usize;
    let lower: f64 = counts[..=w].iter().sum::<f64>() / all;
    let upper: f64 = counts[w..].iter().sum::<f64>() / all;
    (2.0 * lower.min(upper)).min(1.0)
}

/// Two-sided normal approximation with tie-corrected variance and an
/// optional 0.5 continuity correction.
pub fn normal_p(ranks: &[f64], w_plus: f64, continuity: bool) -> f64 {
    let n = ranks.len() as f64;
    let mean = n * (n + 1.0) / 4.0;
    let mut sorted = ranks.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut tie_term = 0.0;
    let mut k = 0;
    while k < sorted.len() {
        let mut end = k;
        while end < sorted.len() && sorted[end] == sorted[k] {
            end += 1;
        }
        let t = (end - k) as f64;
        tie_term += t * t * t - t;
        k = end;
    }
    let var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_term / 48.0;
    if var <= 0.0 {
        return 1.0;
    }
    let mut dev = (w_plus - mean).abs();
    if continuity {
        dev = (dev - 0.5).max(0.0);
    }
    let z = dev / var.sqrt();
    let std_normal = Normal::new(0.0, 1.0).expect("unit normal");
    (2.0 * std_normal.sf(z)).min(1.0)
}

fn signed_rank_sums(diffs: &[f64]) -> (Vec<f64>, f64, f64) {
    let ranks = abs_ranks(diffs);
    let w_plus = diffs.iter().zip(&ranks).filter(|(d, _)| **d > 0.0).map(|(_, r)| r).sum();
    let w_minus = diffs.iter().zip(&ranks).filter(|(d, _)| **d < 0.0).map(|(_, r)| r).sum();
    (ranks, w_plus, w_minus)
}

fn test_with(a: &[f64], b: &[f64], method: PValueMethod) -> Result<WilcoxonResult> {
    let diffs = nonzero_differences(a, b)?;
    if diffs.len() < MIN_PAIRS {
        return Err(Error::InsufficientData(format!(
            "{} nonzero paired differences, need at least {MIN_PAIRS}",
            diffs.len()
        )));
    }
    let (ranks, w_plus, w_minus) = signed_rank_sums(&diffs);
    let p_value = match method {
        PValueMethod::Exact => exact_p(&ranks, w_plus),
        PValueMethod::Normal => normal_p(&ranks, w_plus, true),
    };
    Ok(WilcoxonResult {
        n: diffs.len(),
        w_plus,
        w_minus,
        statistic: w_plus.min(w_minus),
        p_value,
        method,
    })
}

/// Two-sided paired signed-rank test; zero differences are dropped.
pub fn wilcoxon_signed_rank(a: &[f64], b: &[f64]) -> Result<WilcoxonResult> {
    let n = nonzero_differences(a, b)?.len();
    let method = if n <= EXACT_MAX_N {
        PValueMethod::Exact
    } else {
        PValueMethod::Normal
    };
    test_with(a, b, method)
}

pub fn wilcoxon_exact(a: &[f64], b: &[f64]) -> Result<WilcoxonResult> {
    test_with(a, b, PValueMethod::Exact)
}

pub fn wilcoxon_normal(a: &[f64], b: &[f64]) -> Result<WilcoxonResult> {
    test_with(a, b, PValueMethod::Normal)
}
