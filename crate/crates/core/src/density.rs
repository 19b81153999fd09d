//! Adaptive-bandwidth Gaussian KDE with Bayesian class posteriors.
//!
//! Every training sample `x_k` carries its own bandwidth `h_k`, set to `sigma`
//! times the mean distance from `x_k` to its `q` nearest neighbours in the
//! whole dataset. The class-conditional likelihood at `x_j` is
//!
//! ```text
//! P(x_j | l) = (1 / n_l) * sum_{k : y_k = l} h_k^-m * K((x_j - x_k) / h_k)
//! ```
//!
//! with `K` the standard m-variate Gaussian, and the prior is `n_l / n`.
//!
//! A fitted [`DensityModel`] stores the per-class kernel sums at every
//! training point, so the effect of adding one extra minority sample can be
//! evaluated in O(n·m) without touching the stored state.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Label};
use crate::error::{Error, Result};
use crate::neighbors::{self, squared_euclidean};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityParams {
    /// Neighbour count for the bandwidth rule.
    pub q: usize,
    /// Bandwidth scale.
    pub sigma: f64,
    /// Whether the k = j term enters the kernel sum at a training point.
    pub include_self: bool,
}

impl Default for DensityParams {
    fn default() -> Self {
        DensityParams {
            q: 5,
            sigma: 1.0,
            include_self: true,
        }
    }
}

impl DensityParams {
    pub fn new(q: usize, sigma: f64) -> DensityParams {
        DensityParams {
            q,
            sigma,
            ..Default::default()
        }
    }
}

/// Relative floor applied when a bandwidth would otherwise be zero.
pub const BANDWIDTH_FLOOR: f64 = 1e-9;

/// Per-sample bandwidths `h_k = sigma * mean(q-NN distances)`.
///
/// Neighbours come from the full dataset with the sample itself excluded.
/// A zero mean distance (duplicated points) is floored at
/// `1e-9 * diameter`, or `1e-9` when every point coincides.
pub fn compute_bandwidths(d: &Dataset, q: usize, sigma: f64) -> Result<Vec<f64>> {
    let n = d.len();
    if q == 0 || q >= n {
        return Err(Error::Parameter(format!(
            "q must lie in 1..={}, got {q}",
            n - 1
        )));
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::Parameter(format!("sigma must be positive, got {sigma}")));
    }
    let mut h: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|k| {
            let others = d.rows().enumerate().filter(|(i, _)| *i != k);
            let nn = neighbors::k_nearest(d.row(k), others, q);
            let mean = nn.iter().map(|nb| nb.distance).sum::<f64>() / q as f64;
            sigma * mean
        })
        .collect();
    if h.iter().any(|&v| v <= 0.0) {
        let diameter = d.diameter();
        let floor = BANDWIDTH_FLOOR * if diameter > 0.0 { diameter } else { 1.0 };
        for v in h.iter_mut().filter(|v| **v <= 0.0) {
            *v = floor;
        }
    }
    Ok(h)
}

/// Bandwidth for an arbitrary location, using the same rule against all samples.
pub fn bandwidth_at(d: &Dataset, point: &[f64], q: usize, sigma: f64) -> Result<f64> {
    if point.len() != d.n_features() {
        return Err(Error::DimensionMismatch {
            expected: d.n_features(),
            actual: point.len(),
        });
    }
    if q == 0 || q > d.len() {
        return Err(Error::Parameter(format!("q must lie in 1..={}, got {q}", d.len())));
    }
    let nn = neighbors::k_nearest(point, d.rows().enumerate(), q);
    let mean = nn.iter().map(|nb| nb.distance).sum::<f64>() / q as f64;
    let h = sigma * mean;
    Ok(if h > 0.0 {
        h
    } else {
        let diameter = d.diameter();
        BANDWIDTH_FLOOR * if diameter > 0.0 { diameter } else { 1.0 }
    })
}

/// `h^-m * (2π)^(-m/2)`.
#[inline]
pub fn kernel_norm(h: f64, m: usize) -> f64 {
    (h * (2.0 * PI).sqrt()).powi(-(m as i32))
}

/// Contribution of a kernel centred at `centre` with bandwidth `h` to `x`.
#[inline]
pub fn kernel(x: &[f64], centre: &[f64], h: f64) -> f64 {
    kernel_norm(h, x.len()) * (-squared_euclidean(x, centre) / (2.0 * h * h)).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Posterior {
    pub majority: f64,
    pub minority: f64,
    /// Both weighted likelihoods were zero and the priors were returned.
    pub fallback: bool,
}

impl Posterior {
    pub fn of(&self, label: Label) -> f64 {
        match label {
            Label::Majority => self.majority,
            Label::Minority => self.minority,
        }
    }
}

/// Bayes' rule from per-class kernel sums and class counts.
fn bayes(sums: [f64; 2], counts: [usize; 2]) -> Posterior {
    let n = (counts[0] + counts[1]) as f64;
    let prior = [counts[0] as f64 / n, counts[1] as f64 / n];
    let joint = [
        sums[0] / counts[0] as f64 * prior[0],
        sums[1] / counts[1] as f64 * prior[1],
    ];
    let evidence = joint[0] + joint[1];
    if evidence > 0.0 && evidence.is_finite() {
        Posterior {
            majority: joint[0] / evidence,
            minority: joint[1] / evidence,
            fallback: false,
        }
    } else {
        Posterior {
            majority: prior[0],
            minority: prior[1],
            fallback: true,
        }
    }
}

/// Certainty of every sample: the posterior of its ground-truth label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertaintyProfile {
    pub posteriors: Vec<f64>,
    /// Samples whose likelihoods both underflowed and fell back to priors.
    pub fallbacks: usize,
}

impl CertaintyProfile {
    pub fn len(&self) -> usize {
        self.posteriors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.posteriors.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityModel {
    params: DensityParams,
    n_features: usize,
    bandwidths: Vec<f64>,
    /// `kernel_sums[j][slot]`, slot 0 = majority, 1 = minority.
    kernel_sums: Vec<[f64; 2]>,
    class_counts: [usize; 2],
}

impl DensityModel {
    pub fn fit(d: &Dataset, params: DensityParams) -> Result<DensityModel> {
        let bandwidths = compute_bandwidths(d, params.q, params.sigma)?;
        DensityModel::fit_with_bandwidths(d, bandwidths, params)
    }

    /// Fits with externally supplied bandwidths (e.g. pinned from another fit).
    pub fn fit_with_bandwidths(
        d: &Dataset,
        bandwidths: Vec<f64>,
        params: DensityParams,
    ) -> Result<DensityModel> {
        if bandwidths.len() != d.len() {
            return Err(Error::LengthMismatch {
                expected: d.len(),
                actual: bandwidths.len(),
            });
        }
        if let Some(bad) = bandwidths.iter().find(|h| !(**h > 0.0 && h.is_finite())) {
            return Err(Error::Parameter(format!("bandwidth must be positive, got {bad}")));
        }
        let class_counts = [d.count(Label::Majority), d.count(Label::Minority)];
        if class_counts.contains(&0) {
            return Err(Error::DegenerateDataset("both classes must be present".into()));
        }
        let kernel_sums = kernel_sums(d, &bandwidths, params.include_self);
        Ok(DensityModel {
            params,
            n_features: d.n_features(),
            bandwidths,
            kernel_sums,
            class_counts,
        })
    }

    pub fn params(&self) -> DensityParams {
        self.params
    }

    pub fn len(&self) -> usize {
        self.bandwidths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bandwidths.is_empty()
    }

    pub fn bandwidths(&self) -> &[f64] {
        &self.bandwidths
    }

    pub fn kernel_sums(&self) -> &[[f64; 2]] {
        &self.kernel_sums
    }

    /// `(n_majority, n_minority)`.
    pub fn class_counts(&self) -> (usize, usize) {
        (self.class_counts[0], self.class_counts[1])
    }

    pub fn priors(&self) -> (f64, f64) {
        let n = (self.class_counts[0] + self.class_counts[1]) as f64;
        (self.class_counts[0] as f64 / n, self.class_counts[1] as f64 / n)
    }

    fn check(&self, d: &Dataset) -> Result<()> {
        if d.len() != self.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                actual: d.len(),
            });
        }
        if d.n_features() != self.n_features {
            return Err(Error::DimensionMismatch {
                expected: self.n_features,
                actual: d.n_features(),
            });
        }
        Ok(())
    }

    /// `(P(x_j | majority), P(x_j | minority))`.
    pub fn likelihoods(&self, j: usize) -> (f64, f64) {
        let s = self.kernel_sums[j];
        (
            s[0] / self.class_counts[0] as f64,
            s[1] / self.class_counts[1] as f64,
        )
    }

    pub fn posterior(&self, d: &Dataset, j: usize) -> Result<Posterior> {
        self.check(d)?;
        if j >= self.len() {
            return Err(Error::Parameter(format!("sample index {j} out of range")));
        }
        Ok(bayes(self.kernel_sums[j], self.class_counts))
    }

    pub fn certainty_profile(&self, d: &Dataset) -> Result<CertaintyProfile> {
        self.check(d)?;
        let mut fallbacks = 0;
        let posteriors = (0..self.len())
            .map(|j| {
                let p = bayes(self.kernel_sums[j], self.class_counts);
                fallbacks += usize::from(p.fallback);
                p.of(d.label(j))
            })
            .collect();
        if fallbacks > 0 {
            log::debug!("{fallbacks} samples fell back to class priors");
        }
        Ok(CertaintyProfile {
            posteriors,
            fallbacks,
        })
    }

    /// Certainties after a hypothetical minority sample is placed on top of
    /// sample `i`, reusing `h_i` as the new sample's bandwidth.
    ///
    /// Stored bandwidths are not recomputed and the model is not mutated.
    pub fn insert_minority_whatif(&self, d: &Dataset, i: usize) -> Result<CertaintyProfile> {
        self.check(d)?;
        if i >= self.len() {
            return Err(Error::Parameter(format!("sample index {i} out of range")));
        }
        Ok(self.insert_unchecked(d, d.row(i), self.bandwidths[i]))
    }

    /// Like [`insert_minority_whatif`](Self::insert_minority_whatif) for an
    /// arbitrary location and bandwidth.
    pub fn insert_minority_at(&self, d: &Dataset, point: &[f64], h: f64) -> Result<CertaintyProfile> {
        self.check(d)?;
        if point.len() != self.n_features {
            return Err(Error::DimensionMismatch {
                expected: self.n_features,
                actual: point.len(),
            });
        }
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::Parameter(format!("bandwidth must be positive, got {h}")));
        }
        Ok(self.insert_unchecked(d, point, h))
    }

    fn insert_unchecked(&self, d: &Dataset, point: &[f64], h: f64) -> CertaintyProfile {
        let counts = [self.class_counts[0], self.class_counts[1] + 1];
        let norm = kernel_norm(h, self.n_features);
        let two_h2 = 2.0 * h * h;
        let mut fallbacks = 0;
        let posteriors = (0..self.len())
            .map(|j| {
                let add = norm * (-squared_euclidean(d.row(j), point) / two_h2).exp();
                let s = self.kernel_sums[j];
                let p = bayes([s[0], s[1] + add], counts);
                fallbacks += usize::from(p.fallback);
                p.of(d.label(j))
            })
            .collect();
        CertaintyProfile {
            posteriors,
            fallbacks,
        }
    }

    /// Per-class kernel sums at an arbitrary query point (queries are never
    /// kernel centres).
    pub fn kernel_sums_at(&self, d: &Dataset, x: &[f64]) -> Result<[f64; 2]> {
        self.check(d)?;
        if x.len() != self.n_features {
            return Err(Error::DimensionMismatch {
                expected: self.n_features,
                actual: x.len(),
            });
        }
        let mut sums = [0.0; 2];
        for (k, row) in d.rows().enumerate() {
            sums[d.label(k).slot()] += kernel(x, row, self.bandwidths[k]);
        }
        Ok(sums)
    }

    pub fn posterior_at(&self, d: &Dataset, x: &[f64]) -> Result<Posterior> {
        Ok(bayes(self.kernel_sums_at(d, x)?, self.class_counts))
    }

    /// Class-conditional density at an arbitrary point.
    pub fn class_density_at(&self, d: &Dataset, x: &[f64], label: Label) -> Result<f64> {
        let sums = self.kernel_sums_at(d, x)?;
        Ok(sums[label.slot()] / self.class_counts[label.slot()] as f64)
    }

    /// Recomputes the kernel sums from scratch with the stored bandwidths.
    pub fn recompute_kernel_sums(&self, d: &Dataset) -> Result<Vec<[f64; 2]>> {
        self.check(d)?;
        Ok(kernel_sums(d, &self.bandwidths, self.params.include_self))
    }
}

fn kernel_sums(d: &Dataset, bandwidths: &[f64], include_self: bool) -> Vec<[f64; 2]> {
    let m = d.n_features();
    let norms: Vec<f64> = bandwidths.iter().map(|&h| kernel_norm(h, m)).collect();
    (0..d.len())
        .into_par_iter()
        .map(|j| {
            let xj = d.row(j);
            let mut sums = [0.0; 2];
            for (k, xk) in d.rows().enumerate() {
                if k == j && !include_self {
                    continue;
                }
                let h = bandwidths[k];
                sums[d.label(k).slot()] +=
                    norms[k] * (-squared_euclidean(xj, xk) / (2.0 * h * h)).exp();
            }
            sums
        })
        .collect()
}
