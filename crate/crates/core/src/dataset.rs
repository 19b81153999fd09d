//! Binary-labelled datasets: ingestion, class bookkeeping, stratified
//! fold plans, and the two-Gaussian demonstration fixture.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Majority,
    Minority,
}

impl Label {
    pub fn other(self) -> Label {
        match self {
            Label::Majority => Label::Minority,
            Label::Minority => Label::Majority,
        }
    }

    pub(crate) fn slot(self) -> usize {
        match self {
            Label::Majority => 0,
            Label::Minority => 1,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Majority => f.write_str("majority"),
            Label::Minority => f.write_str("minority"),
        }
    }
}

/// Original label text for the two classes after binarization.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassNames {
    pub minority: String,
    pub majority: String,
}

impl Default for ClassNames {
    fn default() -> Self {
        ClassNames {
            minority: "minority".to_string(),
            majority: "majority".to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassPartition {
    pub minority_indices: Vec<usize>,
    pub majority_indices: Vec<usize>,
    pub imbalance_ratio: f64,
}

/// A dense feature matrix with binary labels.
///
/// Rows are stored contiguously; `row(i)` borrows sample `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    n_features: usize,
    features: Vec<f64>,
    labels: Vec<Label>,
    raw_labels: Vec<String>,
    feature_names: Option<Vec<String>>,
    label_column: String,
    class_names: ClassNames,
}

impl Dataset {
    /// Builds a dataset from row vectors.
    ///
    /// Requires at least two rows, at least one feature, finite values, and
    /// both classes present. Class sizes are not compared here: oversampled
    /// datasets may legitimately hold more minority than majority rows.
    pub fn new(rows: Vec<Vec<f64>>, labels: Vec<Label>) -> Result<Dataset> {
        let n_features = rows.first().map(Vec::len).unwrap_or(0);
        if let Some(bad) = rows.iter().position(|r| r.len() != n_features) {
            return Err(Error::DimensionMismatch {
                expected: n_features,
                actual: rows[bad].len(),
            });
        }
        let features = rows.into_iter().flatten().collect();
        Dataset::from_flat(n_features, features, labels)
    }

    pub fn from_flat(n_features: usize, features: Vec<f64>, labels: Vec<Label>) -> Result<Dataset> {
        let names = ClassNames::default();
        let raw_labels = labels
            .iter()
            .map(|l| match l {
                Label::Minority => names.minority.clone(),
                Label::Majority => names.majority.clone(),
            })
            .collect();
        let d = Dataset {
            n_features,
            features,
            labels,
            raw_labels,
            feature_names: None,
            label_column: "label".to_string(),
            class_names: names,
        };
        d.validate()?;
        Ok(d)
    }

    fn validate(&self) -> Result<()> {
        if self.n_features == 0 {
            return Err(Error::DegenerateDataset("no feature columns".into()));
        }
        if self.features.len() != self.labels.len() * self.n_features {
            return Err(Error::LengthMismatch {
                expected: self.labels.len() * self.n_features,
                actual: self.features.len(),
            });
        }
        if self.labels.len() < 2 {
            return Err(Error::DegenerateDataset(format!(
                "need at least 2 samples, got {}",
                self.labels.len()
            )));
        }
        if let Some(pos) = self.features.iter().position(|v| !v.is_finite()) {
            return Err(Error::Parse {
                row: pos / self.n_features + 1,
                column: self.feature_name(pos % self.n_features),
                message: "non-finite feature value".into(),
            });
        }
        let n_min = self.count(Label::Minority);
        if n_min == 0 || n_min == self.labels.len() {
            return Err(Error::DegenerateDataset("only one class present".into()));
        }
        Ok(())
    }

    pub fn with_feature_names(mut self, names: Vec<String>) -> Result<Dataset> {
        if names.len() != self.n_features {
            return Err(Error::LengthMismatch {
                expected: self.n_features,
                actual: names.len(),
            });
        }
        self.feature_names = Some(names);
        Ok(self)
    }

    pub fn with_class_names(mut self, names: ClassNames) -> Dataset {
        for (raw, label) in self.raw_labels.iter_mut().zip(&self.labels) {
            if *raw == self.class_names.minority || *raw == self.class_names.majority {
                *raw = match label {
                    Label::Minority => names.minority.clone(),
                    Label::Majority => names.majority.clone(),
                };
            }
        }
        self.class_names = names;
        self
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.n_features..(i + 1) * self.n_features]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.features.chunks_exact(self.n_features)
    }

    pub fn features(&self) -> &[f64] {
        &self.features
    }

    pub fn label(&self, i: usize) -> Label {
        self.labels[i]
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn raw_labels(&self) -> &[String] {
        &self.raw_labels
    }

    pub fn class_names(&self) -> &ClassNames {
        &self.class_names
    }

    pub fn label_column(&self) -> &str {
        &self.label_column
    }

    pub fn feature_names(&self) -> Option<&[String]> {
        self.feature_names.as_deref()
    }

    fn feature_name(&self, j: usize) -> String {
        match &self.feature_names {
            Some(names) => names[j].clone(),
            None => format!("x{j}"),
        }
    }

    pub fn count(&self, label: Label) -> usize {
        self.labels.iter().filter(|&&l| l == label).count()
    }

    pub fn indices_of(&self, label: Label) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.labels[i] == label).collect()
    }

    /// Rows of one class as `(index, row)` pairs.
    pub fn class_rows(&self, label: Label) -> impl Iterator<Item = (usize, &[f64])> + '_ {
        self.rows()
            .enumerate()
            .filter(move |(i, _)| self.labels[*i] == label)
    }

    pub fn imbalance_ratio(&self) -> f64 {
        self.count(Label::Minority) as f64 / self.count(Label::Majority) as f64
    }

    /// Majority count minus minority count (negative after over-balancing).
    pub fn delta(&self) -> i64 {
        self.count(Label::Majority) as i64 - self.count(Label::Minority) as i64
    }

    pub fn partition(&self) -> ClassPartition {
        ClassPartition {
            minority_indices: self.indices_of(Label::Minority),
            majority_indices: self.indices_of(Label::Majority),
            imbalance_ratio: self.imbalance_ratio(),
        }
    }

    /// Largest pairwise Euclidean distance. O(n²).
    pub fn diameter(&self) -> f64 {
        let mut best = 0.0f64;
        for i in 0..self.len() {
            for j in (i + 1)..self.len() {
                best = best.max(crate::neighbors::euclidean(self.row(i), self.row(j)));
            }
        }
        best
    }

    /// A new dataset made of the given rows, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Result<Dataset> {
        let mut features = Vec::with_capacity(indices.len() * self.n_features);
        for &i in indices {
            features.extend_from_slice(self.row(i));
        }
        let d = Dataset {
            n_features: self.n_features,
            features,
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            raw_labels: indices.iter().map(|&i| self.raw_labels[i].clone()).collect(),
            feature_names: self.feature_names.clone(),
            label_column: self.label_column.clone(),
            class_names: self.class_names.clone(),
        };
        d.validate()?;
        Ok(d)
    }

    /// Appends rows as minority samples. `points` is row-major.
    pub fn append_minority(&self, points: &[f64]) -> Result<Dataset> {
        if !points.len().is_multiple_of(self.n_features) {
            return Err(Error::DimensionMismatch {
                expected: self.n_features,
                actual: points.len() % self.n_features,
            });
        }
        if let Some(pos) = points.iter().position(|v| !v.is_finite()) {
            return Err(Error::Parse {
                row: self.len() + pos / self.n_features + 1,
                column: self.feature_name(pos % self.n_features),
                message: "non-finite synthetic value".into(),
            });
        }
        let added = points.len() / self.n_features;
        let mut out = self.clone();
        out.features.extend_from_slice(points);
        out.labels.extend(std::iter::repeat_n(Label::Minority, added));
        out.raw_labels.extend(std::iter::repeat_n(self.class_names.minority.clone(), added));
        Ok(out)
    }

    /// Min-max scales every feature column into [0, 1]. Constant columns map to 0.
    pub fn min_max_scaled(&self) -> Dataset {
        let m = self.n_features;
        let mut lo = vec![f64::INFINITY; m];
        let mut hi = vec![f64::NEG_INFINITY; m];
        for row in self.rows() {
            for (j, &v) in row.iter().enumerate() {
                lo[j] = lo[j].min(v);
                hi[j] = hi[j].max(v);
            }
        }
        let mut out = self.clone();
        for (k, v) in out.features.iter_mut().enumerate() {
            let j = k % m;
            let span = hi[j] - lo[j];
            *v = if span > 0.0 { (*v - lo[j]) / span } else { 0.0 };
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Binarization

#[derive(Debug, Clone, PartialEq)]
pub struct Binarized {
    pub labels: Vec<Label>,
    pub names: ClassNames,
}

/// Keeps the smallest class as minority and merges every other class into
/// the majority. Count ties go to the lexicographically smallest label.
pub fn binarize_keep_smallest<S: AsRef<str>>(labels: &[S]) -> Result<Binarized> {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for l in labels {
        *counts.entry(l.as_ref()).or_default() += 1;
    }
    if counts.len() < 2 {
        return Err(Error::DegenerateDataset(format!(
            "need at least 2 distinct labels, found {}",
            counts.len()
        )));
    }
    // BTreeMap iterates in lexicographic order, so min_by_key keeps the first tie.
    let (minority, _) = counts
        .iter()
        .min_by_key(|(_, &c)| c)
        .map(|(k, c)| (k.to_string(), *c))
        .expect("non-empty");
    binarize_with_minority(labels, &minority)
}

fn binarize_with_minority<S: AsRef<str>>(labels: &[S], minority: &str) -> Result<Binarized> {
    let rest: Vec<&str> = {
        let mut seen: Vec<&str> = labels
            .iter()
            .map(AsRef::as_ref)
            .filter(|l| *l != minority)
            .collect();
        seen.sort_unstable();
        seen.dedup();
        seen
    };
    if rest.is_empty() {
        return Err(Error::DegenerateDataset("only one class present".into()));
    }
    Ok(Binarized {
        labels: labels
            .iter()
            .map(|l| {
                if l.as_ref() == minority {
                    Label::Minority
                } else {
                    Label::Majority
                }
            })
            .collect(),
        names: ClassNames {
            minority: minority.to_string(),
            majority: rest.join("|"),
        },
    })
}

// ---------------------------------------------------------------------------
// CSV

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelColumn {
    Last,
    Index(usize),
    Name(String),
}

impl LabelColumn {
    /// Parses a selector: a numeric string is a 0-based index, anything else a name.
    pub fn parse(s: &str) -> LabelColumn {
        match s.parse::<usize>() {
            Ok(i) => LabelColumn::Index(i),
            Err(_) => LabelColumn::Name(s.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CsvOptions {
    pub delimiter: u8,
    pub label_column: LabelColumn,
    pub minority_label: Option<String>,
}

impl Default for CsvOptions {
    fn default() -> Self {
        CsvOptions {
            delimiter: b',',
            label_column: LabelColumn::Last,
            minority_label: None,
        }
    }
}

pub fn load_csv(path: impl AsRef<Path>, opts: &CsvOptions) -> Result<Dataset> {
    let file = std::fs::File::open(path.as_ref())?;
    read_csv(file, opts)
}

pub fn read_csv<R: Read>(reader: R, opts: &CsvOptions) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(opts.delimiter)
        .has_headers(true)
        .flexible(false)
        .from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();
    let label_idx = match &opts.label_column {
        LabelColumn::Last => header.len().checked_sub(1),
        LabelColumn::Index(i) => (*i < header.len()).then_some(*i),
        LabelColumn::Name(name) => header.iter().position(|h| h == name),
    }
    .ok_or_else(|| Error::Parameter(format!("label column {:?} not found", opts.label_column)))?;

    let feature_names: Vec<String> = header
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != label_idx)
        .map(|(_, h)| h.clone())
        .collect();

    let mut features = Vec::new();
    let mut raw_labels = Vec::new();
    for (r, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| match e.kind() {
            csv::ErrorKind::UnequalLengths { .. } => Error::Parse {
                row: r + 1,
                column: "*".into(),
                message: "row arity differs from header".into(),
            },
            _ => Error::Csv(e),
        })?;
        for (j, cell) in record.iter().enumerate() {
            let cell = cell.trim();
            if j == label_idx {
                if cell.is_empty() {
                    return Err(Error::Parse {
                        row: r + 1,
                        column: header[j].clone(),
                        message: "missing label".into(),
                    });
                }
                raw_labels.push(cell.to_string());
                continue;
            }
            let value = parse_cell(cell).map_err(|message| Error::Parse {
                row: r + 1,
                column: header[j].clone(),
                message,
            })?;
            features.push(value);
        }
    }

    let binary = match &opts.minority_label {
        Some(minority) => {
            if !raw_labels.iter().any(|l| l == minority) {
                return Err(Error::Parameter(format!("minority label {minority:?} not present")));
            }
            let b = binarize_with_minority(&raw_labels, minority)?;
            let n_min = b.labels.iter().filter(|&&l| l == Label::Minority).count();
            if 2 * n_min > b.labels.len() {
                return Err(Error::Parameter(format!(
                    "label {minority:?} has {n_min} of {} rows and cannot be the minority class",
                    b.labels.len()
                )));
            }
            b
        }
        None => binarize_keep_smallest(&raw_labels)?,
    };

    let d = Dataset {
        n_features: feature_names.len(),
        features,
        labels: binary.labels,
        raw_labels,
        feature_names: Some(feature_names),
        label_column: header[label_idx].clone(),
        class_names: binary.names,
    };
    d.validate()?;
    Ok(d)
}

fn parse_cell(cell: &str) -> std::result::Result<f64, String> {
    if cell.is_empty() || cell == "?" || cell.eq_ignore_ascii_case("na") {
        return Err("missing value".into());
    }
    let v: f64 = cell
        .parse()
        .map_err(|_| format!("non-numeric value {cell:?}"))?;
    if !v.is_finite() {
        return Err(format!("non-finite value {cell:?}"));
    }
    Ok(v)
}

/// Writes the dataset as CSV with the label as the last column.
///
/// Values use Rust's shortest round-trip float formatting, so a file written
/// here reads back to identical bits.
pub fn write_csv<W: Write>(d: &Dataset, writer: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().from_writer(writer);
    let mut header: Vec<String> = match d.feature_names() {
        Some(names) => names.to_vec(),
        None => (0..d.n_features()).map(|j| format!("x{j}")).collect(),
    };
    header.push(d.label_column().to_string());
    w.write_record(&header)?;
    let mut record = Vec::with_capacity(header.len());
    for (i, row) in d.rows().enumerate() {
        record.clear();
        record.extend(row.iter().map(|v| v.to_string()));
        record.push(d.raw_labels()[i].clone());
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_csv(d: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let file = std::fs::File::create(path.as_ref())?;
    write_csv(d, std::io::BufWriter::new(file))
}

// ---------------------------------------------------------------------------
// Stratified folds

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub rounds: usize,
    pub folds: usize,
    /// `assignments[round][sample]` is the test fold of `sample` in `round`.
    pub assignments: Vec<Vec<usize>>,
}

impl FoldPlan {
    pub fn test_indices(&self, round: usize, fold: usize) -> Vec<usize> {
        self.assignments[round]
            .iter()
            .enumerate()
            .filter(|(_, &f)| f == fold)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn train_indices(&self, round: usize, fold: usize) -> Vec<usize> {
        self.assignments[round]
            .iter()
            .enumerate()
            .filter(|(_, &f)| f != fold)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Per round: shuffle each class, then deal samples to folds round-robin.
///
/// The majority class continues the deal where the minority class stopped,
/// which keeps total fold sizes within one of each other.
pub fn stratified_folds(d: &Dataset, rounds: usize, folds: usize, seed: u64) -> Result<FoldPlan> {
    if rounds == 0 {
        return Err(Error::Parameter("rounds must be at least 1".into()));
    }
    if folds < 2 {
        return Err(Error::Parameter("folds must be at least 2".into()));
    }
    let minority = d.indices_of(Label::Minority);
    let majority = d.indices_of(Label::Majority);
    if folds > minority.len() || folds > majority.len() {
        return Err(Error::InfeasibleStratification {
            folds,
            minority: minority.len().min(majority.len()),
        });
    }
    let assignments = (0..rounds)
        .map(|round| {
            let mut rng = rng::substream(seed, &[round as u64]);
            let mut assignment = vec![0usize; d.len()];
            let mut next = 0usize;
            for class in [&minority, &majority] {
                let mut order = class.clone();
                order.shuffle(&mut rng);
                for i in order {
                    assignment[i] = next % folds;
                    next += 1;
                }
            }
            assignment
        })
        .collect();
    Ok(FoldPlan {
        rounds,
        folds,
        assignments,
    })
}

// ---------------------------------------------------------------------------
// Fixture

pub const FIXTURE_MAJORITY: usize = 2000;
pub const FIXTURE_MINORITY: usize = 400;
pub const FIXTURE_SEPARATION: f64 = 3.0;

/// Two isotropic unit Gaussians in the plane: minority centred at the
/// origin, majority at `(separation, 0)`. Majority rows come first.
pub fn make_two_gaussian_fixture(
    n_major: usize,
    n_minor: usize,
    separation: f64,
    seed: u64,
) -> Result<Dataset> {
    if n_major < 2 || n_minor < 2 {
        return Err(Error::Parameter("fixture classes need at least 2 samples each".into()));
    }
    if !separation.is_finite() {
        return Err(Error::Parameter("separation must be finite".into()));
    }
    let mut rng = rng::stream(seed);
    let mut features = Vec::with_capacity(2 * (n_major + n_minor));
    let mut labels = Vec::with_capacity(n_major + n_minor);
    for (count, centre, label) in [
        (n_major, separation, Label::Majority),
        (n_minor, 0.0, Label::Minority),
    ] {
        for _ in 0..count {
            let x: f64 = StandardNormal.sample(&mut rng);
            let y: f64 = StandardNormal.sample(&mut rng);
            features.push(centre + x);
            features.push(y);
            labels.push(label);
        }
    }
    Dataset::from_flat(2, features, labels)?.with_feature_names(vec!["x".into(), "y".into()])
}
