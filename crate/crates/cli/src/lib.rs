//! Command-line front end for `cgmos-core`.
//!
//! Every artifact a command writes carries a `config` block echoing the
//! full [`RunConfig`] and the tool version, so a run can be replayed from
//! its outputs alone.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use cgmos_core::cgmos::{SeedPool, WeightTable};
use cgmos_core::classifiers::{ClassifierKind, ClassifierSpec};
use cgmos_core::dataset::{self, CsvOptions, Dataset, LabelColumn};
use cgmos_core::density::DensityParams;
use cgmos_core::eval::{self, EvaluationReport, RocCurve};
use cgmos_core::resample::{Amount, Method, OversamplerSpec};
use cgmos_core::theory::{self, Fault};
use cgmos_core::{Error, Label};

pub const VERSION: &str = match option_env!("CGMOS_GIT_DESCRIBE") {
    Some(v) => v,
    None => env!("CARGO_PKG_VERSION"),
};

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const OTHER: i32 = 1;
    /// Reserved by clap for usage errors.
    pub const USAGE: i32 = 2;
    pub const IO: i32 = 3;
    pub const PARSE: i32 = 4;
    pub const PARAMETER: i32 = 5;
    pub const INFEASIBLE: i32 = 6;
    pub const VERIFICATION: i32 = 7;
    pub const DEGENERATE: i32 = 8;
    /// `signtest` ran fine but p >= 0.05.
    pub const NOT_SIGNIFICANT: i32 = 10;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] Error),
    #[error("I/O error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Parameter(String),
    #[error("verification failed: {0}")]
    Verification(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } => exit::IO,
            CliError::Parameter(_) => exit::PARAMETER,
            CliError::Verification(_) => exit::VERIFICATION,
            CliError::Core(e) => match e {
                Error::Io(_) => exit::IO,
                Error::Parse { .. } | Error::Json(_) | Error::Csv(_) => exit::PARSE,
                Error::Parameter(_) | Error::LengthMismatch { .. } | Error::DimensionMismatch { .. } => {
                    exit::PARAMETER
                }
                Error::InfeasibleStratification { .. } | Error::InfeasibleSynthesis(_) | Error::InsufficientData(_) => {
                    exit::INFEASIBLE
                }
                Error::Verification(_) | Error::DivisionGuard { .. } => exit::VERIFICATION,
                Error::DegenerateDataset(_) => exit::DEGENERATE,
            },
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "cgmos", version = VERSION, about = "Certainty guided minority oversampling")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Oversample a dataset and write it with its seed-weight table.
    Resample(ResampleArgs),
    /// Repeated stratified cross-validation for each method/classifier pair.
    Evaluate(EvaluateArgs),
    /// Mean AUC against the amount of synthetic data, k * delta.
    Sweep(SweepArgs),
    /// Check the lemmas and the expected-gain theorem on a random corpus.
    VerifyTheory(VerifyArgs),
    /// Wilcoxon signed-rank test on the per-fold AUCs of two reports.
    Signtest(SigntestArgs),
    /// Write the two-Gaussian demonstration dataset.
    Fixture(FixtureArgs),
    /// Grade an external score file with columns row_id, score, label.
    Grade(GradeArgs),
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct DataArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Label column: name or 0-based index. Defaults to the last column.
    #[arg(long = "label-col")]
    pub label_col: Option<String>,
    #[arg(long = "minority-label")]
    pub minority_label: Option<String>,
    #[arg(long, default_value_t = ',')]
    pub delimiter: char,
    /// Min-max scale every feature into [0, 1] after loading.
    #[arg(long)]
    pub scale: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PoolArg {
    All,
    Minority,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct OversampleArgs {
    /// Number of synthetic samples. Overrides --k-factor.
    #[arg(long = "n-synthetic")]
    pub n_synthetic: Option<usize>,
    /// Synthesize round(k * delta) samples, delta = majority - minority.
    #[arg(long = "k-factor", default_value_t = 1.0)]
    pub k_factor: f64,
    #[arg(long, default_value_t = 5)]
    pub q: usize,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    #[arg(long = "k-interp", default_value_t = 5)]
    pub k_interp: usize,
    #[arg(long = "k-danger", default_value_t = 5)]
    pub k_danger: usize,
    #[arg(long = "seed-pool", value_enum, default_value_t = PoolArg::All)]
    pub seed_pool: PoolArg,
    #[arg(long = "refresh-weights")]
    pub refresh_weights: bool,
}

impl OversampleArgs {
    fn density(&self) -> DensityParams {
        DensityParams::new(self.q, self.sigma)
    }

    fn spec(&self, method: Method) -> OversamplerSpec {
        OversamplerSpec {
            method,
            amount: match self.n_synthetic {
                Some(n) => Amount::Fixed(n),
                None => Amount::DeltaFactor(self.k_factor),
            },
            k_interp: self.k_interp,
            k_danger: self.k_danger,
            density: self.density(),
            seed_pool: match self.seed_pool {
                PoolArg::All => SeedPool::AllSamples,
                PoolArg::Minority => SeedPool::MinorityOnly,
            },
            refresh_weights: self.refresh_weights,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ClassifierArgs {
    /// Comma-separated: b_kde, knn.
    #[arg(long, value_delimiter = ',', default_value = "b_kde")]
    pub classifier: Vec<String>,
    #[arg(long = "knn-k", default_value_t = 5)]
    pub knn_k: usize,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct CvArgs {
    #[arg(long, default_value_t = 10)]
    pub rounds: usize,
    #[arg(long, default_value_t = 10)]
    pub folds: usize,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct Common {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory.
    #[arg(long, env = "CGMOS_OUT", default_value = "cgmos-out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ResampleArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// One of none, dup, smote, borderline_smote, adasyn, cgmos.
    #[arg(long, default_value = "cgmos")]
    pub method: String,
    #[command(flatten)]
    pub oversample: OversampleArgs,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Comma-separated methods.
    #[arg(long, value_delimiter = ',', default_value = "cgmos")]
    pub method: Vec<String>,
    #[command(flatten)]
    pub oversample: OversampleArgs,
    #[command(flatten)]
    pub classifier: ClassifierArgs,
    #[command(flatten)]
    pub cv: CvArgs,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SweepArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, value_delimiter = ',', default_value = "dup,smote,borderline_smote,adasyn,cgmos")]
    pub method: Vec<String>,
    /// Comma-separated k values. Defaults to 0.5, 1.0, ..., 5.0.
    #[arg(long = "k-values", value_delimiter = ',')]
    pub k_values: Option<Vec<f64>>,
    #[command(flatten)]
    pub oversample: OversampleArgs,
    #[command(flatten)]
    pub classifier: ClassifierArgs,
    #[command(flatten)]
    pub cv: CvArgs,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FaultArg {
    None,
    UniformWeights,
    NegativeWeight,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct VerifyArgs {
    /// Number of random datasets.
    #[arg(long = "corpus-size", default_value_t = 100)]
    pub corpus_size: usize,
    /// Also check the two-Gaussian fixture at full size.
    #[arg(long)]
    pub fixture: bool,
    #[arg(long, default_value_t = 5)]
    pub q: usize,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    /// Corrupt the weights before checking (for testing the checker).
    #[arg(long, value_enum, default_value_t = FaultArg::None)]
    pub fault: FaultArg,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SigntestArgs {
    pub report_a: PathBuf,
    pub report_b: PathBuf,
    #[arg(long, env = "CGMOS_OUT")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct FixtureArgs {
    #[arg(long = "n-major", default_value_t = dataset::FIXTURE_MAJORITY)]
    pub n_major: usize,
    #[arg(long = "n-minor", default_value_t = dataset::FIXTURE_MINORITY)]
    pub n_minor: usize,
    #[arg(long, default_value_t = dataset::FIXTURE_SEPARATION)]
    pub separation: f64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct GradeArgs {
    /// CSV with columns row_id, score, label.
    #[arg(long)]
    pub scores: PathBuf,
    /// Label value of the minority (positive) class.
    #[arg(long = "minority-label")]
    pub minority_label: String,
    #[arg(long, env = "CGMOS_OUT", default_value = "cgmos-out")]
    pub out: PathBuf,
}

/// The echo embedded in every artifact.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub args: serde_json::Value,
}

impl RunConfig {
    fn new<T: Serialize>(command: &str, args: &T) -> CliResult<RunConfig> {
        Ok(RunConfig {
            tool: "cgmos".into(),
            version: VERSION.into(),
            command: command.into(),
            args: serde_json::to_value(args).map_err(Error::from)?,
        })
    }
}

/// An artifact body with the run configuration attached.
#[derive(Debug, Serialize, Deserialize)]
pub struct Echoed<T> {
    pub config: RunConfig,
    #[serde(flatten)]
    pub body: T,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn write_file(path: &Path, contents: &[u8]) -> CliResult<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    fs::write(path, contents).map_err(io_err(path))?;
    log::info!("wrote {}", path.display());
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(Error::from)?;
    text.push('\n');
    write_file(path, text.as_bytes())
}

fn load(data: &DataArgs) -> CliResult<Dataset> {
    if !data.delimiter.is_ascii() {
        return Err(CliError::Parameter("delimiter must be a single ASCII character".into()));
    }
    let opts = CsvOptions {
        delimiter: data.delimiter as u8,
        label_column: data.label_col.as_deref().map_or(LabelColumn::Last, LabelColumn::parse),
        minority_label: data.minority_label.clone(),
    };
    let d = dataset::load_csv(&data.input, &opts).map_err(|e| match e {
        Error::Io(source) => CliError::Io {
            path: data.input.clone(),
            source,
        },
        other => CliError::Core(other),
    })?;
    Ok(if data.scale { d.min_max_scaled() } else { d })
}

fn parse_methods(names: &[String]) -> CliResult<Vec<Method>> {
    Ok(names.iter().map(|s| s.parse()).collect::<Result<_, Error>>()?)
}

fn classifier_specs(args: &ClassifierArgs, density: DensityParams) -> CliResult<Vec<ClassifierSpec>> {
    args.classifier
        .iter()
        .map(|s| {
            let kind: ClassifierKind = s.parse()?;
            Ok(ClassifierSpec {
                kind,
                density,
                knn_k: args.knn_k,
            })
        })
        .collect()
}

pub fn weights_csv(table: &WeightTable) -> String {
    let mut s = String::from("index,weight,probability\n");
    for (i, (w, p)) in table.weights.iter().zip(&table.probabilities).enumerate() {
        let _ = writeln!(s, "{i},{w},{p}");
    }
    s
}

pub fn roc_csv(roc: &RocCurve) -> String {
    let mut s = String::from("threshold,fpr,tpr\n");
    for p in &roc.points {
        let t = p.threshold.map_or_else(|| "inf".to_string(), |t| t.to_string());
        let _ = writeln!(s, "{t},{},{}", p.fpr, p.tpr);
    }
    s
}

/// Reads `(fpr, tpr)` pairs back from a ROC CSV.
pub fn read_roc_csv(text: &str) -> CliResult<Vec<(f64, f64)>> {
    let mut rdr = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(Error::from)?;
        let num = |k: usize| {
            rec.get(k)
                .and_then(|v| v.parse::<f64>().ok())
                .ok_or_else(|| CliError::Parameter(format!("bad ROC row {:?}", rec)))
        };
        out.push((num(1)?, num(2)?));
    }
    Ok(out)
}

pub fn cmd_resample(args: &ResampleArgs) -> CliResult<()> {
    let d = load(&args.data)?;
    let method: Method = args.method.parse()?;
    let spec = args.oversample.spec(method);
    let result = spec.apply(&d, args.common.seed)?;
    let out = &args.common.out;
    let mut csv_bytes = Vec::new();
    dataset::write_csv(&result.data, &mut csv_bytes)?;
    write_file(&out.join("resampled.csv"), &csv_bytes)?;
    write_file(&out.join("weights.csv"), weights_csv(&result.weights).as_bytes())?;

    #[derive(Serialize)]
    struct Summary {
        method: Method,
        n_input: usize,
        n_output: usize,
        n_synthetic: usize,
        minority_before: usize,
        minority_after: usize,
        majority: usize,
        weight_normalizer: f64,
        uniform_fallback: bool,
    }
    let summary = Summary {
        method,
        n_input: d.len(),
        n_output: result.data.len(),
        n_synthetic: result.batch.len(),
        minority_before: d.count(Label::Minority),
        minority_after: result.data.count(Label::Minority),
        majority: d.count(Label::Majority),
        weight_normalizer: result.weights.normalizer,
        uniform_fallback: result.weights.uniform_fallback,
    };
    write_json(
        &out.join("resample.json"),
        &Echoed {
            config: RunConfig::new("resample", args)?,
            body: summary,
        },
    )
}

pub fn report_stem(method: Method, classifier: ClassifierKind) -> String {
    format!("{method}_{classifier}")
}

pub fn cmd_evaluate(args: &EvaluateArgs) -> CliResult<()> {
    let d = load(&args.data)?;
    let methods = parse_methods(&args.method)?;
    let classifiers = classifier_specs(&args.classifier, args.oversample.density())?;
    let plan = dataset::stratified_folds(&d, args.cv.rounds, args.cv.folds, args.common.seed)?;
    let config = RunConfig::new("evaluate", args)?;
    for &method in &methods {
        for clf in &classifiers {
            let report = eval::cross_validate(&d, &args.oversample.spec(method), clf, &plan, args.common.seed)?;
            let stem = report_stem(method, clf.kind);
            write_file(&args.common.out.join(format!("roc_{stem}.csv")), roc_csv(&report.roc).as_bytes())?;
            write_json(
                &args.common.out.join(format!("report_{stem}.json")),
                &Echoed {
                    config: config.clone(),
                    body: report,
                },
            )?;
        }
    }
    Ok(())
}

pub fn cmd_sweep(args: &SweepArgs) -> CliResult<()> {
    let d = load(&args.data)?;
    let methods = parse_methods(&args.method)?;
    let classifiers = classifier_specs(&args.classifier, args.oversample.density())?;
    let k_values = args.k_values.clone().unwrap_or_else(eval::default_k_grid);
    let plan = dataset::stratified_folds(&d, args.cv.rounds, args.cv.folds, args.common.seed)?;
    let base = args.oversample.spec(Method::None);
    let mut csv_text = String::from("method,classifier,k,n_synthetic,auc,failed_folds\n");
    let mut all = Vec::new();
    for clf in &classifiers {
        let rows = eval::sweep_k_delta(&d, &methods, &base, clf, &k_values, &plan, args.common.seed)?;
        for r in &rows {
            let _ = writeln!(
                csv_text,
                "{},{},{},{},{},{}",
                r.method, clf.kind, r.k, r.n_synthetic, r.auc, r.failed_folds
            );
        }
        all.push((clf.kind, rows));
    }
    write_file(&args.common.out.join("sweep.csv"), csv_text.as_bytes())?;
    write_json(
        &args.common.out.join("sweep.json"),
        &Echoed {
            config: RunConfig::new("sweep", args)?,
            body: serde_json::json!({ "rows": all }),
        },
    )
}

/// Returns whether every check passed.
pub fn cmd_verify_theory(args: &VerifyArgs) -> CliResult<bool> {
    let params = DensityParams::new(args.q, args.sigma);
    let mut corpus = theory::random_corpus(args.corpus_size, args.common.seed)?;
    if args.fixture {
        corpus.push(("fixture".into(), theory::fixture_dataset(args.common.seed)?));
    }
    let fault = match args.fault {
        FaultArg::None => Fault::None,
        FaultArg::UniformWeights => Fault::UniformWeights,
        FaultArg::NegativeWeight => Fault::NegativeWeight,
    };
    let cert = theory::verify_corpus(&corpus, params, fault)?;
    write_json(
        &args.common.out.join("certificate.json"),
        &Echoed {
            config: RunConfig::new("verify-theory", args)?,
            body: &cert,
        },
    )?;
    for f in &cert.failures {
        eprintln!("FAILED {f}");
    }
    println!(
        "{} datasets, lemma2 max residual {:e}, lemma3 max residual {:e}, min E_p - E_s {:e}: {}",
        cert.datasets.len(),
        cert.max_lemma2_residual,
        cert.max_lemma3_residual,
        cert.min_theorem_margin,
        if cert.passed { "pass" } else { "FAIL" }
    );
    Ok(cert.passed)
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SigntestOutput {
    pub report_a: PathBuf,
    pub report_b: PathBuf,
    pub n_pairs: usize,
    pub result: eval::WilcoxonResult,
    pub significant: bool,
}

fn read_report(path: &Path) -> CliResult<EvaluationReport> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    Ok(serde_json::from_str(&text).map_err(Error::from)?)
}

/// Returns whether p < 0.05.
pub fn cmd_signtest(args: &SigntestArgs) -> CliResult<bool> {
    let a = read_report(&args.report_a)?;
    let b = read_report(&args.report_b)?;
    if (a.rounds, a.folds, a.n_samples, a.seed) != (b.rounds, b.folds, b.n_samples, b.seed) {
        return Err(CliError::Parameter("reports do not share a fold structure".into()));
    }
    let (fa, fb) = (a.fold_aucs(), b.fold_aucs());
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (key, auc) in &fa {
        if let Some((_, other)) = fb.iter().find(|(k, _)| k == key) {
            xs.push(*auc);
            ys.push(*other);
        }
    }
    let result = eval::wilcoxon_signed_rank(&xs, &ys)?;
    let significant = result.p_value < 0.05;
    println!(
        "n = {}, W+ = {}, W- = {}, statistic = {}, p = {} ({:?})",
        result.n, result.w_plus, result.w_minus, result.statistic, result.p_value, result.method
    );
    if let Some(out) = &args.out {
        write_json(
            &out.join("signtest.json"),
            &SigntestOutput {
                report_a: args.report_a.clone(),
                report_b: args.report_b.clone(),
                n_pairs: xs.len(),
                result,
                significant,
            },
        )?;
    }
    Ok(significant)
}

pub fn cmd_fixture(args: &FixtureArgs) -> CliResult<()> {
    let d = dataset::make_two_gaussian_fixture(args.n_major, args.n_minor, args.separation, args.common.seed)?;
    let mut bytes = Vec::new();
    dataset::write_csv(&d, &mut bytes)?;
    write_file(&args.common.out.join("fixture.csv"), &bytes)?;
    write_json(
        &args.common.out.join("fixture.json"),
        &Echoed {
            config: RunConfig::new("fixture", args)?,
            body: serde_json::json!({ "n": d.len(), "imbalance_ratio": d.imbalance_ratio() }),
        },
    )
}

#[derive(Debug, Serialize, Deserialize)]
pub struct GradeOutput {
    pub n: usize,
    pub minority: eval::ClassMetrics,
    pub majority: eval::ClassMetrics,
    pub roc: RocCurve,
}

pub fn cmd_grade(args: &GradeArgs) -> CliResult<()> {
    let text = fs::read_to_string(&args.scores).map_err(io_err(&args.scores))?;
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let header = rdr.headers().map_err(Error::from)?.clone();
    let col = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::Parameter(format!("score file lacks a '{name}' column")))
    };
    let (score_col, label_col) = (col("score")?, col("label")?);
    col("row_id")?;
    let mut labels = Vec::new();
    let mut scores = Vec::new();
    for (r, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(Error::from)?;
        let score: f64 = rec[score_col].parse().map_err(|_| {
            CliError::Core(Error::Parse {
                row: r + 1,
                column: "score".into(),
                message: format!("not a number: {:?}", &rec[score_col]),
            })
        })?;
        scores.push(score);
        labels.push(if rec[label_col] == *args.minority_label {
            Label::Minority
        } else {
            Label::Majority
        });
    }
    let preds: Vec<Label> = scores.iter().map(|&s| cgmos_core::classifiers::decide(s)).collect();
    let output = GradeOutput {
        n: labels.len(),
        minority: eval::class_metrics(&labels, &preds, Label::Minority)?,
        majority: eval::class_metrics(&labels, &preds, Label::Majority)?,
        roc: eval::roc_auc(&labels, &scores, Label::Minority)?,
    };
    write_file(&args.out.join("roc_grade.csv"), roc_csv(&output.roc).as_bytes())?;
    write_json(
        &args.out.join("grade.json"),
        &Echoed {
            config: RunConfig::new("grade", args)?,
            body: output,
        },
    )
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let outcome = match &cli.command {
        Command::Resample(a) => cmd_resample(a).map(|_| exit::OK),
        Command::Evaluate(a) => cmd_evaluate(a).map(|_| exit::OK),
        Command::Sweep(a) => cmd_sweep(a).map(|_| exit::OK),
        Command::VerifyTheory(a) => cmd_verify_theory(a).map(|ok| if ok { exit::OK } else { exit::VERIFICATION }),
        Command::Signtest(a) => cmd_signtest(a).map(|sig| if sig { exit::OK } else { exit::NOT_SIGNIFICANT }),
        Command::Fixture(a) => cmd_fixture(a).map(|_| exit::OK),
        Command::Grade(a) => cmd_grade(a).map(|_| exit::OK),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
