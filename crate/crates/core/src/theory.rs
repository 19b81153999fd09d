//! Executable checks of the CGMOS training-set guarantee.
//!
//! The addition likelihood ratio `r_{+i}(y_j | x_j)` is computed here from
//! class likelihoods and priors in odds form, without going through the
//! certainty-change code in [`crate::cgmos`]. Agreement between the two is
//! what the lemma checks measure.

use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cgmos::{self, SeedPool, WeightTable};
use crate::dataset::{make_two_gaussian_fixture, Dataset, Label, FIXTURE_MAJORITY, FIXTURE_MINORITY, FIXTURE_SEPARATION};
use crate::density::{self, DensityModel, DensityParams};
use crate::error::{Error, Result};
use crate::rng;

pub const LEMMA2_TOL: f64 = 1e-12;
pub const LEMMA3_TOL: f64 = 1e-10;
pub const THEOREM_TOL: f64 = 1e-12;
pub const FORMS_TOL: f64 = 1e-10;
pub const LEMMA1_TOL: f64 = 1e-12;

/// Posterior of `label` from joint scores `a = P(x|y)P(y)` and
/// `b = P(x|other)P(other)`, falling back to the prior when both vanish.
fn odds_posterior(a: f64, b: f64, prior: f64) -> f64 {
    if a == 0.0 && b == 0.0 {
        prior
    } else if a == 0.0 {
        0.0
    } else {
        1.0 / (1.0 + b / a)
    }
}

/// `P(y_j | x_j; theta') / P(y_j | x_j; theta)` for every `j`, where
/// `theta'` has one extra minority sample at `x_i` with bandwidth `h_i`.
pub fn addition_likelihood_ratio(model: &DensityModel, d: &Dataset, i: usize) -> Result<Vec<f64>> {
    if d.len() != model.len() {
        return Err(Error::LengthMismatch {
            expected: model.len(),
            actual: d.len(),
        });
    }
    if i >= d.len() {
        return Err(Error::Parameter(format!("sample index {i} out of range")));
    }
    let (n_mjr, n_mnr) = model.class_counts();
    let n = (n_mjr + n_mnr) as f64;
    let (n_mjr, n_mnr) = (n_mjr as f64, n_mnr as f64);
    let h_i = model.bandwidths()[i];
    let x_i = d.row(i);
    (0..d.len())
        .map(|j| {
            let s = model.kernel_sums()[j];
            let extra = density::kernel(d.row(j), x_i, h_i);

            let before = [s[0] / n_mjr * (n_mjr / n), s[1] / n_mnr * (n_mnr / n)];
            let after = [
                s[0] / n_mjr * (n_mjr / (n + 1.0)),
                (s[1] + extra) / (n_mnr + 1.0) * ((n_mnr + 1.0) / (n + 1.0)),
            ];
            let (own, other, prior, prior_after) = match d.label(j) {
                Label::Majority => (0, 1, n_mjr / n, n_mjr / (n + 1.0)),
                Label::Minority => (1, 0, n_mnr / n, (n_mnr + 1.0) / (n + 1.0)),
            };
            let p = odds_posterior(before[own], before[other], prior);
            let p_after = odds_posterior(after[own], after[other], prior_after);
            if p == 0.0 {
                return Err(Error::DivisionGuard { index: j });
            }
            Ok(p_after / p)
        })
        .collect()
}

/// Mean of the addition likelihood ratios.
pub fn average_gain(ratios: &[f64]) -> f64 {
    ratios.iter().sum::<f64>() / ratios.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpectedGains {
    /// `sum_i gain_i * W_i / z`.
    pub e_p: f64,
    /// `(1/n) sum_i gain_i`.
    pub e_s: f64,
    /// `sum W^2 / z`.
    pub e_p_closed: f64,
    /// `z / n`.
    pub e_s_closed: f64,
}

pub fn expected_gains(table: &WeightTable, gains: &[f64]) -> Result<ExpectedGains> {
    if table.len() != gains.len() {
        return Err(Error::LengthMismatch {
            expected: table.len(),
            actual: gains.len(),
        });
    }
    let n = gains.len() as f64;
    let z = table.normalizer;
    Ok(ExpectedGains {
        e_p: gains.iter().zip(&table.probabilities).map(|(g, p)| g * p).sum(),
        e_s: gains.iter().sum::<f64>() / n,
        e_p_closed: table.weights.iter().map(|w| w * w).sum::<f64>() / z,
        e_s_closed: z / n,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lemma1Check {
    pub holds: bool,
    /// `sum W^2 - z^2 / n`.
    pub margin: f64,
}

/// `sum W^2 >= (sum W)^2 / n` for nonnegative weights.
pub fn verify_lemma1(weights: &[f64]) -> Result<Lemma1Check> {
    if weights.is_empty() {
        return Err(Error::InsufficientData("no weights".into()));
    }
    if let Some((i, w)) = weights.iter().enumerate().find(|(_, w)| w.is_nan() || **w < 0.0) {
        return Err(Error::Verification(format!(
            "lemma 1 precondition: weight {i} is {w}, must be nonnegative"
        )));
    }
    let z: f64 = weights.iter().sum();
    let sq: f64 = weights.iter().map(|w| w * w).sum();
    let margin = sq - z * z / weights.len() as f64;
    Ok(Lemma1Check {
        holds: margin >= -LEMMA1_TOL,
        margin,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GainReport {
    pub n: usize,
    pub n_features: usize,
    pub n_minority: usize,
    /// `r̄_{+i}` per sample.
    pub gains: Vec<f64>,
    pub weights: Vec<f64>,
    pub expected: ExpectedGains,
    pub lemma1: Lemma1Check,
    /// `max_{i,j} |r - 1 - R|`.
    pub lemma2_residual: f64,
    /// `max_i |r̄_{+i} - W_i|`.
    pub lemma3_residual: f64,
    /// `|E_p - sum W^2 / z|`.
    pub forms_residual: f64,
    pub constant_weights: bool,
    pub fallbacks: usize,
}

impl GainReport {
    pub fn theorem_holds(&self) -> bool {
        self.expected.e_p >= self.expected.e_s - THEOREM_TOL
    }

    /// Strict inequality, required whenever the weights vary.
    pub fn strict_holds(&self) -> bool {
        self.constant_weights || self.expected.e_p > self.expected.e_s
    }
}

/// Both weight paths over every sample of `d`.
pub fn gain_report(d: &Dataset, params: DensityParams) -> Result<GainReport> {
    let model = DensityModel::fit(d, params)?;
    let table = cgmos::compute_weights(&model, d, SeedPool::AllSamples)?;
    let before = model.certainty_profile(d)?;
    let per_sample: Vec<(f64, f64)> = (0..d.len())
        .into_par_iter()
        .map(|i| {
            let after = model.insert_minority_whatif(d, i)?;
            let big_r = cgmos::relative_certainty_change(&before, &after)?;
            let r = addition_likelihood_ratio(&model, d, i)?;
            let residual = r
                .iter()
                .zip(&big_r)
                .map(|(a, b)| (a - 1.0 - b).abs())
                .fold(0.0, f64::max);
            Ok((average_gain(&r), residual))
        })
        .collect::<Result<_>>()?;
    let gains: Vec<f64> = per_sample.iter().map(|p| p.0).collect();
    let lemma2_residual = per_sample.iter().map(|p| p.1).fold(0.0, f64::max);
    let lemma3_residual = gains
        .iter()
        .zip(&table.weights)
        .map(|(g, w)| (g - w).abs())
        .fold(0.0, f64::max);
    let expected = expected_gains(&table, &gains)?;
    let lemma1 = verify_lemma1(&table.weights)?;
    let first = table.weights[0];
    Ok(GainReport {
        n: d.len(),
        n_features: d.n_features(),
        n_minority: d.count(Label::Minority),
        constant_weights: table.weights.iter().all(|&w| w == first),
        forms_residual: (expected.e_p - expected.e_p_closed).abs(),
        gains,
        weights: table.weights,
        expected,
        lemma1,
        lemma2_residual,
        lemma3_residual,
        fallbacks: before.fallbacks,
    })
}

/// A random Gaussian two-class dataset for the property corpus:
/// `n` in `[10, 200]`, `m` in `[1, 5]`, imbalance ratio in `[0.05, 0.9]`.
pub fn random_dataset(seed: u64, index: u64) -> Result<Dataset> {
    let mut rng = rng::substream(seed, &[index]);
    let n: usize = rng.random_range(10..=200);
    let m: usize = rng.random_range(1..=5);
    let ratio: f64 = rng.random_range(0.05..=0.9);
    let n_minor = ((n as f64 * ratio / (1.0 + ratio)).round() as usize).clamp(2, n / 2);
    let n_major = n - n_minor;
    let shift: Vec<f64> = (0..m).map(|_| rng.random_range(-2.0..2.0)).collect();
    let spread: f64 = rng.random_range(0.3..1.5);
    let mut features = Vec::with_capacity(n * m);
    let mut labels = Vec::with_capacity(n);
    for k in 0..n {
        let minority = k >= n_major;
        for s in &shift {
            let z: f64 = StandardNormal.sample(&mut rng);
            features.push(if minority { s + spread * z } else { z });
        }
        labels.push(if minority { Label::Minority } else { Label::Majority });
    }
    Dataset::from_flat(m, features, labels)
}

pub fn random_corpus(count: usize, seed: u64) -> Result<Vec<(String, Dataset)>> {
    (0..count as u64)
        .map(|i| Ok((format!("random-{i}"), random_dataset(seed, i)?)))
        .collect()
}

/// The two-Gaussian fixture at its default size.
pub fn fixture_dataset(seed: u64) -> Result<Dataset> {
    make_two_gaussian_fixture(FIXTURE_MAJORITY, FIXTURE_MINORITY, FIXTURE_SEPARATION, seed)
}

/// Deliberate corruption applied before the theorem checks, used to test
/// that the checker notices (or correctly tolerates) bad input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fault {
    #[default]
    None,
    /// Replace the weights by a constant while the gains keep varying.
    UniformWeights,
    /// Make the first weight negative.
    NegativeWeight,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetCheck {
    pub name: String,
    pub n: usize,
    pub n_features: usize,
    pub n_minority: usize,
    pub e_p: f64,
    pub e_s: f64,
    pub e_p_closed: f64,
    pub e_s_closed: f64,
    pub equality: bool,
    pub constant_weights: bool,
    pub lemma1_margin: Option<f64>,
    pub lemma2_residual: f64,
    /// `None` when the weights were overridden by a fault.
    pub lemma3_residual: Option<f64>,
    pub forms_residual: f64,
    pub failures: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub density: DensityParams,
    pub fault: Fault,
    pub datasets: Vec<DatasetCheck>,
    pub max_lemma2_residual: f64,
    pub max_lemma3_residual: f64,
    pub max_forms_residual: f64,
    /// `min (E_p - E_s)` over the corpus.
    pub min_theorem_margin: f64,
    pub failures: Vec<String>,
    pub passed: bool,
}

fn check_dataset(name: &str, d: &Dataset, params: DensityParams, fault: Fault) -> Result<DatasetCheck> {
    let report = gain_report(d, params)?;
    let mut failures = Vec::new();
    let mut weights = report.weights.clone();
    match fault {
        Fault::None => {}
        Fault::UniformWeights => weights = vec![1.0; weights.len()],
        Fault::NegativeWeight => weights[0] = -1.0,
    }

    let lemma1_margin = match verify_lemma1(&weights) {
        Ok(c) => {
            if !c.holds {
                failures.push(format!("lemma1: margin {}", c.margin));
            }
            Some(c.margin)
        }
        Err(e) => {
            failures.push(format!("lemma1: {e}"));
            None
        }
    };
    if report.lemma2_residual > LEMMA2_TOL {
        failures.push(format!("lemma2: residual {:e}", report.lemma2_residual));
    }
    let lemma3_residual = (fault == Fault::None).then_some(report.lemma3_residual);
    if let Some(r) = lemma3_residual.filter(|&r| r > LEMMA3_TOL) {
        failures.push(format!("lemma3: residual {r:e}"));
    }

    let mut check = DatasetCheck {
        name: name.to_string(),
        n: report.n,
        n_features: report.n_features,
        n_minority: report.n_minority,
        e_p: f64::NAN,
        e_s: f64::NAN,
        e_p_closed: f64::NAN,
        e_s_closed: f64::NAN,
        equality: false,
        constant_weights: false,
        lemma1_margin,
        lemma2_residual: report.lemma2_residual,
        lemma3_residual,
        forms_residual: f64::NAN,
        failures: Vec::new(),
    };
    if lemma1_margin.is_some() {
        let table = WeightTable::from_weights(weights.clone())?;
        let expected = expected_gains(&table, &report.gains)?;
        let constant = weights.iter().all(|&w| w == weights[0]);
        check.e_p = expected.e_p;
        check.e_s = expected.e_s;
        check.e_p_closed = expected.e_p_closed;
        check.e_s_closed = expected.e_s_closed;
        check.constant_weights = constant;
        check.equality = constant || expected.e_p == expected.e_s;
        if expected.e_p < expected.e_s - THEOREM_TOL {
            failures.push(format!("theorem1: E_p {} < E_s {}", expected.e_p, expected.e_s));
        } else if !constant && expected.e_p <= expected.e_s {
            failures.push(format!("theorem1: not strict with varying weights (E_p {} E_s {})", expected.e_p, expected.e_s));
        }
        if fault == Fault::None {
            check.forms_residual = (expected.e_p - expected.e_p_closed).abs();
            if check.forms_residual > FORMS_TOL {
                failures.push(format!("forms: residual {:e}", check.forms_residual));
            }
        }
    }
    check.failures = failures;
    Ok(check)
}

/// Runs every lemma and theorem check on each dataset.
pub fn verify_corpus(datasets: &[(String, Dataset)], params: DensityParams, fault: Fault) -> Result<Certificate> {
    let checks: Vec<DatasetCheck> = datasets
        .iter()
        .map(|(name, d)| check_dataset(name, d, params, fault))
        .collect::<Result<_>>()?;
    let max_of = |f: fn(&DatasetCheck) -> Option<f64>| {
        checks.iter().filter_map(f).filter(|v| !v.is_nan()).fold(0.0, f64::max)
    };
    let failures: Vec<String> = checks
        .iter()
        .flat_map(|c| c.failures.iter().map(move |f| format!("{}: {f}", c.name)))
        .collect();
    Ok(Certificate {
        density: params,
        fault,
        max_lemma2_residual: max_of(|c| Some(c.lemma2_residual)),
        max_lemma3_residual: max_of(|c| c.lemma3_residual),
        max_forms_residual: max_of(|c| Some(c.forms_residual)),
        min_theorem_margin: checks
            .iter()
            .map(|c| c.e_p - c.e_s)
            .filter(|v| !v.is_nan())
            .fold(f64::INFINITY, f64::min),
        passed: failures.is_empty(),
        failures,
        datasets: checks,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub location: Vec<f64>,
    pub bandwidth: f64,
    /// Minority posterior at the insertion location before insertion.
    pub minority_posterior: f64,
    /// Mean relative certainty change over all samples.
    pub mean_change: f64,
}

/// Inserts a hypothetical minority sample at each location in turn, with
/// the bandwidth rule applied at that location.
pub fn insertion_sweep(model: &DensityModel, d: &Dataset, locations: &[Vec<f64>]) -> Result<Vec<SweepPoint>> {
    let before = model.certainty_profile(d)?;
    let params = model.params();
    locations
        .par_iter()
        .map(|x| {
            let h = density::bandwidth_at(d, x, params.q, params.sigma)?;
            let after = model.insert_minority_at(d, x, h)?;
            let r = cgmos::relative_certainty_change(&before, &after)?;
            Ok(SweepPoint {
                location: x.clone(),
                bandwidth: h,
                minority_posterior: model.posterior_at(d, x)?.minority,
                mean_change: r.iter().sum::<f64>() / r.len() as f64,
            })
        })
        .collect()
}
