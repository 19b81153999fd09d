//! Metrics, ROC analysis, cross-validation, the oversampling-amount sweep
//! and the Wilcoxon signed-rank test.

pub mod cv;
pub mod metrics;
pub mod roc;
pub mod sweep;
pub mod wilcoxon;

pub use cv::{cross_validate, EvaluationReport, FoldRecord, FoldStatus, MetricSummary};
pub use metrics::{class_metrics, confusion, f_score, g_score, precision_recall, ClassMetrics, ConfusionCounts, PrecisionRecall};
pub use roc::{roc_auc, RocCurve, RocPoint};
pub use sweep::{default_k_grid, sweep_k_delta, SweepRow};
pub use wilcoxon::{wilcoxon_signed_rank, PValueMethod, WilcoxonResult};
