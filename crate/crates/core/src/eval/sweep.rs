use serde::{Deserialize, Serialize};

use super::cv::cross_validate;
use crate::classifiers::ClassifierSpec;
use crate::dataset::{Dataset, FoldPlan};
use crate::error::{Error, Result};
use crate::resample::{Amount, Method, OversamplerSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub method: Method,
    pub k: f64,
    /// `round(k * delta)` on the full dataset; folds use their own delta.
    pub n_synthetic: usize,
    pub auc: f64,
    pub failed_folds: usize,
}

/// `0.5, 1.0, ..., 5.0`.
pub fn default_k_grid() -> Vec<f64> {
    (1..=10).map(|i| i as f64 * 0.5).collect()
}

/// Mean cross-validated AUC for every `(method, k)` with `k * delta`
/// synthetic samples. Rows are ordered by method, then `k`.
pub fn sweep_k_delta(
    d: &Dataset,
    methods: &[Method],
    base: &OversamplerSpec,
    classifier: &ClassifierSpec,
    k_values: &[f64],
    plan: &FoldPlan,
    seed: u64,
) -> Result<Vec<SweepRow>> {
    if d.delta() <= 0 {
        return Err(Error::Parameter("sweep needs more majority than minority samples".into()));
    }
    if let Some(k) = k_values.iter().find(|k| !(k.is_finite() && **k >= 0.0)) {
        return Err(Error::Parameter(format!("k = {k} must be finite and nonnegative")));
    }
    let mut rows = Vec::with_capacity(methods.len() * k_values.len());
    for &method in methods {
        for &k in k_values {
            let amount = Amount::DeltaFactor(k);
            let spec = OversamplerSpec {
                method,
                amount,
                ..base.clone()
            };
            let report = cross_validate(d, &spec, classifier, plan, seed)?;
            rows.push(SweepRow {
                method,
                k,
                n_synthetic: amount.resolve(d),
                auc: report.auc,
                failed_folds: report.failed_folds,
            });
        }
    }
    Ok(rows)
}
