use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{class_metrics, ClassMetrics};
use super::roc::{roc_auc, RocCurve};
use crate::classifiers::{self, decide, ClassifierSpec};
use crate::dataset::{Dataset, FoldPlan, Label};
use crate::error::{Error, Result};
use crate::resample::OversamplerSpec;
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum FoldStatus {
    Ok,
    Failed { reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldRecord {
    pub round: usize,
    pub fold: usize,
    #[serde(flatten)]
    pub status: FoldStatus,
    pub n_train: usize,
    pub n_test: usize,
    pub n_synthetic: usize,
    /// Class counts of the training portion after oversampling.
    pub train_minority: usize,
    pub train_majority: usize,
    pub minority: Option<ClassMetrics>,
    pub majority: Option<ClassMetrics>,
    pub auc: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MetricSummary {
    pub precision: f64,
    pub recall: f64,
    pub f_score: f64,
    pub g_score: f64,
    /// Folds where precision was 0/0.
    pub undefined_precision: usize,
    /// Folds where recall was 0/0.
    pub undefined_recall: usize,
}

impl MetricSummary {
    fn mean_of(ms: &[&ClassMetrics]) -> MetricSummary {
        let n = ms.len() as f64;
        let mean = |f: fn(&ClassMetrics) -> f64| ms.iter().map(|m| f(m)).sum::<f64>() / n;
        MetricSummary {
            precision: mean(|m| m.precision),
            recall: mean(|m| m.recall),
            f_score: mean(|m| m.f_score),
            g_score: mean(|m| m.g_score),
            undefined_precision: ms.iter().filter(|m| m.precision_undefined).count(),
            undefined_recall: ms.iter().filter(|m| m.recall_undefined).count(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub oversampler: OversamplerSpec,
    pub classifier: ClassifierSpec,
    pub rounds: usize,
    pub folds: usize,
    pub seed: u64,
    pub n_samples: usize,
    pub n_minority: usize,
    pub n_majority: usize,
    pub completed_folds: usize,
    pub failed_folds: usize,
    /// Minority as the positive class.
    pub minority: MetricSummary,
    /// Majority as the positive class.
    pub majority: MetricSummary,
    /// Mean of per-fold AUCs (minority positive).
    pub auc: f64,
    /// ROC over the pooled test scores of every completed fold.
    pub roc: RocCurve,
    pub fold_records: Vec<FoldRecord>,
}

impl EvaluationReport {
    /// Per-fold AUCs keyed by `(round, fold)`, completed folds only.
    pub fn fold_aucs(&self) -> Vec<((usize, usize), f64)> {
        self.fold_records
            .iter()
            .filter_map(|r| r.auc.map(|a| ((r.round, r.fold), a)))
            .collect()
    }
}

struct FoldOutcome {
    record: FoldRecord,
    test_labels: Vec<Label>,
    scores: Vec<f64>,
}

/// Oversamplers only append rows; the training prefix must come back unchanged.
fn check_untouched(train: &Dataset, augmented: &Dataset) -> Result<()> {
    let n = train.len();
    let same = augmented.len() >= n
        && augmented.features()[..n * train.n_features()] == *train.features()
        && augmented.labels()[..n] == *train.labels();
    if same {
        Ok(())
    } else {
        Err(Error::Verification("oversampling modified original training rows".into()))
    }
}

fn check_plan(d: &Dataset, plan: &FoldPlan) -> Result<()> {
    if plan.assignments.len() != plan.rounds {
        return Err(Error::Parameter("fold plan round count mismatch".into()));
    }
    for a in &plan.assignments {
        if a.len() != d.len() {
            return Err(Error::LengthMismatch {
                expected: d.len(),
                actual: a.len(),
            });
        }
        if a.iter().any(|&f| f >= plan.folds) {
            return Err(Error::Parameter("fold index out of range".into()));
        }
    }
    Ok(())
}

fn run_fold(
    d: &Dataset,
    oversampler: &OversamplerSpec,
    classifier: &ClassifierSpec,
    plan: &FoldPlan,
    round: usize,
    fold: usize,
    seed: u64,
) -> Result<FoldOutcome> {
    let train_idx = plan.train_indices(round, fold);
    let test_idx = plan.test_indices(round, fold);
    let train = d.subset(&train_idx)?;
    let test = d.subset(&test_idx)?;
    let mut record = FoldRecord {
        round,
        fold,
        status: FoldStatus::Ok,
        n_train: train.len(),
        n_test: test.len(),
        n_synthetic: 0,
        train_minority: train.count(Label::Minority),
        train_majority: train.count(Label::Majority),
        minority: None,
        majority: None,
        auc: None,
    };
    let fail = |mut record: FoldRecord, e: Error| {
        log::warn!("round {round} fold {fold} failed: {e}");
        record.status = FoldStatus::Failed { reason: e.to_string() };
        Ok(FoldOutcome {
            record,
            test_labels: Vec::new(),
            scores: Vec::new(),
        })
    };

    let fold_seed = rng::derive(seed, &[round as u64, fold as u64]);
    let augmented = match oversampler.apply(&train, fold_seed) {
        Ok(o) => o.data,
        Err(e @ Error::Verification(_)) => return Err(e),
        Err(e) => return fail(record, e),
    };
    check_untouched(&train, &augmented)?;
    record.n_synthetic = augmented.len() - train.len();
    record.train_minority = augmented.count(Label::Minority);
    record.train_majority = augmented.count(Label::Majority);

    let model = match classifiers::train(classifier, &augmented) {
        Ok(m) => m,
        Err(e) => return fail(record, e),
    };
    let scores = model.score_all(&test)?;
    let predictions: Vec<Label> = scores.iter().map(|&s| decide(s)).collect();
    let labels = test.labels().to_vec();
    record.minority = Some(class_metrics(&labels, &predictions, Label::Minority)?);
    record.majority = Some(class_metrics(&labels, &predictions, Label::Majority)?);
    record.auc = Some(roc_auc(&labels, &scores, Label::Minority)?.auc);
    Ok(FoldOutcome {
        record,
        test_labels: labels,
        scores,
    })
}

/// Repeated stratified cross-validation. Oversampling touches only the
/// training portion of each fold; fold `(r, f)` draws its randomness from
/// a stream derived from `(seed, r, f)`, so folds can run in parallel.
pub fn cross_validate(
    d: &Dataset,
    oversampler: &OversamplerSpec,
    classifier: &ClassifierSpec,
    plan: &FoldPlan,
    seed: u64,
) -> Result<EvaluationReport> {
    check_plan(d, plan)?;
    let jobs: Vec<(usize, usize)> = (0..plan.rounds)
        .flat_map(|r| (0..plan.folds).map(move |f| (r, f)))
        .collect();
    let outcomes: Vec<FoldOutcome> = jobs
        .par_iter()
        .map(|&(r, f)| run_fold(d, oversampler, classifier, plan, r, f, seed))
        .collect::<Result<_>>()?;

    let ok: Vec<&FoldOutcome> = outcomes
        .iter()
        .filter(|o| o.record.status == FoldStatus::Ok)
        .collect();
    if ok.is_empty() {
        return Err(Error::InsufficientData("every fold failed".into()));
    }
    let minority: Vec<&ClassMetrics> = ok.iter().filter_map(|o| o.record.minority.as_ref()).collect();
    let majority: Vec<&ClassMetrics> = ok.iter().filter_map(|o| o.record.majority.as_ref()).collect();
    let auc = ok.iter().filter_map(|o| o.record.auc).sum::<f64>() / ok.len() as f64;
    let pooled_labels: Vec<Label> = ok.iter().flat_map(|o| o.test_labels.iter().copied()).collect();
    let pooled_scores: Vec<f64> = ok.iter().flat_map(|o| o.scores.iter().copied()).collect();
    let roc = roc_auc(&pooled_labels, &pooled_scores, Label::Minority)?;

    Ok(EvaluationReport {
        oversampler: oversampler.clone(),
        classifier: *classifier,
        rounds: plan.rounds,
        folds: plan.folds,
        seed,
        n_samples: d.len(),
        n_minority: d.count(Label::Minority),
        n_majority: d.count(Label::Majority),
        completed_folds: ok.len(),
        failed_folds: outcomes.len() - ok.len(),
        minority: MetricSummary::mean_of(&minority),
        majority: MetricSummary::mean_of(&majority),
        auc,
        roc,
        fold_records: outcomes.into_iter().map(|o| o.record).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{make_two_gaussian_fixture, stratified_folds};
    use crate::resample::{Amount, Method};

    #[test]
    fn deterministic_and_complete() {
        let d = make_two_gaussian_fixture(60, 20, 2.0, 1).unwrap();
        let plan = stratified_folds(&d, 2, 4, 9).unwrap();
        let over = OversamplerSpec::new(Method::Smote, Amount::DeltaFactor(1.0));
        let a = cross_validate(&d, &over, &ClassifierSpec::knn(3), &plan, 5).unwrap();
        let b = cross_validate(&d, &over, &ClassifierSpec::knn(3), &plan, 5).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        assert_eq!(a.completed_folds, 8);
        for r in &a.fold_records {
            assert_eq!(r.train_minority, r.train_majority);
        }
        assert!((0.0..=1.0).contains(&a.auc));
    }

    #[test]
    fn infeasible_folds_are_recorded() {
        let d = make_two_gaussian_fixture(40, 8, 2.0, 1).unwrap();
        let plan = stratified_folds(&d, 1, 4, 9).unwrap();
        // Six minority rows per training fold cannot support k_interp = 6.
        let mut over = OversamplerSpec::new(Method::Smote, Amount::DeltaFactor(1.0));
        over.k_interp = 6;
        let err = cross_validate(&d, &over, &ClassifierSpec::knn(3), &plan, 0).unwrap_err();
        assert!(matches!(err, Error::InsufficientData(_)));
    }
}
