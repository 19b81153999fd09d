//! Certainty guided minority oversampling.
//!
//! Each sample `x_i` receives a weight
//!
//! ```text
//! W(x_i) = 1 + (1/n) * sum_j R_{+i}(y_j | x_j)
//! R_{+i}(y_j | x_j) = (C_{+i}(y_j | x_j) - C(y_j | x_j)) / C(y_j | x_j)
//! ```
//!
//! where `C` is the KDE-Bayes certainty of sample `j` and `C_{+i}` the same
//! certainty after a hypothetical minority sample is added on top of `x_i`.
//! Seeds are drawn with probability `W(x_i) / z` and interpolated toward a
//! random minority neighbour, exactly as in SMOTE.

use std::collections::HashMap;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Label};
use crate::density::{CertaintyProfile, DensityModel, DensityParams};
use crate::error::{Error, Result};
use crate::neighbors;
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeedPool {
    /// Every sample in the dataset may seed a synthetic point.
    #[default]
    AllSamples,
    /// Only minority samples may seed.
    MinorityOnly,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthesisConfig {
    pub n_synthetic: usize,
    pub k_interp: usize,
    /// Recompute weights every `ceil(n_synthetic / 10)` additions.
    pub refresh_weights: bool,
    pub seed_pool: SeedPool,
    pub rng_seed: u64,
}

impl Default for SynthesisConfig {
    fn default() -> Self {
        SynthesisConfig {
            n_synthetic: 0,
            k_interp: 5,
            refresh_weights: false,
            seed_pool: SeedPool::AllSamples,
            rng_seed: 0,
        }
    }
}

impl SynthesisConfig {
    fn validate(&self) -> Result<()> {
        if self.k_interp == 0 {
            return Err(Error::Parameter("k_interp must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightTable {
    pub weights: Vec<f64>,
    pub normalizer: f64,
    pub probabilities: Vec<f64>,
    /// All weights were zero and selection fell back to uniform.
    pub uniform_fallback: bool,
}

impl WeightTable {
    /// Normalizes raw nonnegative weights into a selection distribution.
    pub fn from_weights(weights: Vec<f64>) -> Result<WeightTable> {
        let all: Vec<usize> = (0..weights.len()).collect();
        WeightTable::from_pool_weights(weights, &all)
    }

    /// As [`from_weights`](Self::from_weights); if every weight is zero the
    /// selection falls back to uniform over `pool`.
    pub fn from_pool_weights(weights: Vec<f64>, pool: &[usize]) -> Result<WeightTable> {
        if weights.is_empty() || pool.is_empty() {
            return Err(Error::InsufficientData("empty weight vector".into()));
        }
        if let Some((i, w)) = weights
            .iter()
            .enumerate()
            .find(|(_, w)| !(w.is_finite() && **w >= 0.0))
        {
            return Err(Error::Verification(format!("weight {i} is {w}, expected finite and >= 0")));
        }
        let normalizer: f64 = weights.iter().sum();
        if normalizer > 0.0 {
            let probabilities = weights.iter().map(|w| w / normalizer).collect();
            return Ok(WeightTable {
                weights,
                normalizer,
                probabilities,
                uniform_fallback: false,
            });
        }
        log::warn!("all seed weights are zero; falling back to uniform selection");
        let mut probabilities = vec![0.0; weights.len()];
        for &i in pool {
            probabilities[i] = 1.0 / pool.len() as f64;
        }
        Ok(WeightTable {
            weights,
            normalizer,
            probabilities,
            uniform_fallback: true,
        })
    }

    /// Equal weight on `members`, zero elsewhere.
    pub fn uniform_over(n: usize, members: &[usize]) -> Result<WeightTable> {
        let mut w = vec![0.0; n];
        for &i in members {
            w[i] = 1.0;
        }
        WeightTable::from_weights(w)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticBatch {
    pub n_features: usize,
    /// Row-major synthetic points.
    pub points: Vec<f64>,
    pub seed_indices: Vec<usize>,
    pub partner_indices: Vec<usize>,
}

impl SyntheticBatch {
    pub fn len(&self) -> usize {
        self.seed_indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seed_indices.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.n_features..(i + 1) * self.n_features]
    }
}

/// `R = (after - before) / before`, entry-wise.
pub fn relative_certainty_change(before: &CertaintyProfile, after: &CertaintyProfile) -> Result<Vec<f64>> {
    if before.len() != after.len() {
        return Err(Error::LengthMismatch {
            expected: before.len(),
            actual: after.len(),
        });
    }
    before
        .posteriors
        .iter()
        .zip(&after.posteriors)
        .enumerate()
        .map(|(j, (&b, &a))| {
            if b > 0.0 {
                Ok((a - b) / b)
            } else {
                Err(Error::DivisionGuard { index: j })
            }
        })
        .collect()
}

/// Weights `W(x_i)` for every sample, one what-if insertion per pool member.
///
/// Samples outside the pool get weight 0.
pub fn compute_weights(model: &DensityModel, d: &Dataset, pool: SeedPool) -> Result<WeightTable> {
    let before = model.certainty_profile(d)?;
    let n = d.len() as f64;
    let weights: Vec<f64> = (0..d.len())
        .into_par_iter()
        .map(|i| {
            if pool == SeedPool::MinorityOnly && d.label(i) != Label::Minority {
                return Ok(0.0);
            }
            let after = model.insert_minority_whatif(d, i)?;
            let r = relative_certainty_change(&before, &after)?;
            Ok(1.0 + r.iter().sum::<f64>() / n)
        })
        .collect::<Result<_>>()?;
    if let Some(i) = weights.iter().position(|&w| w == 0.0 && pool == SeedPool::AllSamples) {
        log::info!("sample {i} has weight exactly 0");
    }
    match pool {
        SeedPool::AllSamples => WeightTable::from_weights(weights),
        SeedPool::MinorityOnly => WeightTable::from_pool_weights(weights, &d.indices_of(Label::Minority)),
    }
}

/// I.i.d. draws with replacement from the table's selection distribution.
pub fn draw_seeds(table: &WeightTable, count: usize, rng_seed: u64) -> Result<Vec<usize>> {
    if count == 0 {
        return Ok(Vec::new());
    }
    let dist = WeightedIndex::new(&table.probabilities)
        .map_err(|e| Error::Parameter(format!("invalid selection distribution: {e}")))?;
    let mut rng = rng::stream(rng_seed);
    Ok((0..count).map(|_| dist.sample(&mut rng)).collect())
}

/// SMOTE interpolation: each seed moves a uniform fraction of the way toward
/// one of its `k_interp` nearest minority neighbours.
pub fn synthesize(d: &Dataset, seeds: &[usize], k_interp: usize, rng_seed: u64) -> Result<SyntheticBatch> {
    if k_interp == 0 {
        return Err(Error::Parameter("k_interp must be at least 1".into()));
    }
    let n_minority = d.count(Label::Minority);
    let m = d.n_features();
    let mut cache: HashMap<usize, Vec<usize>> = HashMap::new();
    let mut rng = rng::stream(rng_seed);
    let mut batch = SyntheticBatch {
        n_features: m,
        points: Vec::with_capacity(seeds.len() * m),
        seed_indices: Vec::with_capacity(seeds.len()),
        partner_indices: Vec::with_capacity(seeds.len()),
    };
    for &s in seeds {
        if s >= d.len() {
            return Err(Error::Parameter(format!("seed index {s} out of range")));
        }
        let needed = match d.label(s) {
            Label::Minority => k_interp + 1,
            Label::Majority => k_interp,
        };
        if n_minority < needed {
            return Err(Error::InfeasibleSynthesis(format!(
                "{n_minority} minority samples, need at least {needed} for k_interp = {k_interp}"
            )));
        }
        let partners = cache.entry(s).or_insert_with(|| {
            let candidates = d.class_rows(Label::Minority).filter(|(i, _)| *i != s);
            neighbors::k_nearest(d.row(s), candidates, k_interp)
                .into_iter()
                .map(|nb| nb.index)
                .collect()
        });
        let v = partners[rng.random_range(0..partners.len())];
        let u: f64 = rng.random();
        let (xs, xv) = (d.row(s), d.row(v));
        batch
            .points
            .extend(xs.iter().zip(xv).map(|(a, b)| a + u * (b - a)));
        batch.seed_indices.push(s);
        batch.partner_indices.push(v);
    }
    Ok(batch)
}

#[derive(Debug, Clone)]
pub struct Oversampled {
    pub data: Dataset,
    /// Weights on the input dataset (first pass when refreshing).
    pub weights: WeightTable,
    pub batch: SyntheticBatch,
}

/// Draws seeds from `table` and appends the interpolated batch to `d`.
pub fn oversample_with_table(d: &Dataset, table: &WeightTable, cfg: &SynthesisConfig) -> Result<(Dataset, SyntheticBatch)> {
    cfg.validate()?;
    if table.len() != d.len() {
        return Err(Error::LengthMismatch {
            expected: d.len(),
            actual: table.len(),
        });
    }
    let seeds = draw_seeds(table, cfg.n_synthetic, rng::derive(cfg.rng_seed, &[rng::TAG_SEEDS]))?;
    let batch = synthesize(d, &seeds, cfg.k_interp, rng::derive(cfg.rng_seed, &[rng::TAG_SYNTH]))?;
    let data = d.append_minority(&batch.points)?;
    Ok((data, batch))
}

/// Full pipeline: fit density, weight, draw, interpolate, append.
pub fn oversample(d: &Dataset, cfg: &SynthesisConfig, density: DensityParams) -> Result<Oversampled> {
    cfg.validate()?;
    let model = DensityModel::fit(d, density)?;
    let weights = compute_weights(&model, d, cfg.seed_pool)?;
    if cfg.n_synthetic == 0 {
        return Ok(Oversampled {
            data: d.clone(),
            weights,
            batch: SyntheticBatch {
                n_features: d.n_features(),
                points: Vec::new(),
                seed_indices: Vec::new(),
                partner_indices: Vec::new(),
            },
        });
    }
    if !cfg.refresh_weights {
        let (data, batch) = oversample_with_table(d, &weights, cfg)?;
        return Ok(Oversampled { data, weights, batch });
    }

    let step = cfg.n_synthetic.div_ceil(10);
    let mut current = d.clone();
    let mut table = weights.clone();
    let mut all = SyntheticBatch {
        n_features: d.n_features(),
        points: Vec::new(),
        seed_indices: Vec::new(),
        partner_indices: Vec::new(),
    };
    let mut done = 0;
    let mut chunk = 0u64;
    while done < cfg.n_synthetic {
        if chunk > 0 {
            let model = DensityModel::fit(&current, density)?;
            table = compute_weights(&model, &current, cfg.seed_pool)?;
        }
        let take = step.min(cfg.n_synthetic - done);
        let chunk_cfg = SynthesisConfig {
            n_synthetic: take,
            rng_seed: rng::derive(cfg.rng_seed, &[rng::TAG_REFRESH, chunk]),
            ..cfg.clone()
        };
        let (next, batch) = oversample_with_table(&current, &table, &chunk_cfg)?;
        all.points.extend_from_slice(&batch.points);
        all.seed_indices.extend_from_slice(&batch.seed_indices);
        all.partner_indices.extend_from_slice(&batch.partner_indices);
        current = next;
        done += take;
        chunk += 1;
    }
    Ok(Oversampled {
        data: current,
        weights,
        batch: all,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::make_two_gaussian_fixture;

    fn profile(v: &[f64]) -> CertaintyProfile {
        CertaintyProfile {
            posteriors: v.to_vec(),
            fallbacks: 0,
        }
    }

    #[test]
    fn relative_change_arithmetic() {
        let r = relative_certainty_change(&profile(&[0.5, 0.25]), &profile(&[0.6, 0.25])).unwrap();
        assert!((r[0] - 0.2).abs() < 1e-15);
        assert_eq!(r[1], 0.0);
        let same = relative_certainty_change(&profile(&[0.3, 0.9]), &profile(&[0.3, 0.9])).unwrap();
        assert_eq!(same, vec![0.0, 0.0]);
        assert!(matches!(
            relative_certainty_change(&profile(&[0.0]), &profile(&[0.1])),
            Err(Error::DivisionGuard { index: 0 })
        ));
        assert!(relative_certainty_change(&profile(&[0.5]), &profile(&[0.5, 0.5])).is_err());
    }

    #[test]
    fn weights_are_normalized_and_nonnegative() {
        let d = make_two_gaussian_fixture(80, 20, 2.0, 7).unwrap();
        let model = DensityModel::fit(&d, DensityParams::default()).unwrap();
        let t = compute_weights(&model, &d, SeedPool::AllSamples).unwrap();
        assert!(t.weights.iter().all(|&w| w >= 0.0));
        assert!((t.probabilities.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        let minority_only = compute_weights(&model, &d, SeedPool::MinorityOnly).unwrap();
        for i in 0..d.len() {
            match d.label(i) {
                Label::Majority => assert_eq!(minority_only.weights[i], 0.0),
                Label::Minority => assert_eq!(minority_only.weights[i], t.weights[i]),
            }
        }
    }

    #[test]
    fn separated_clusters_weights() {
        // Two clusters so far apart that every cross kernel term underflows.
        let rows = vec![vec![0.0], vec![0.1], vec![1e6], vec![1e6 + 0.1], vec![1e6 + 0.2]];
        let labels = vec![Label::Minority, Label::Minority, Label::Majority, Label::Majority, Label::Majority];
        let d = Dataset::new(rows, labels).unwrap();
        let model = DensityModel::fit(&d, DensityParams::new(1, 1.0)).unwrap();
        let t = compute_weights(&model, &d, SeedPool::AllSamples).unwrap();
        // Minority certainties are already 1, so nothing changes; on top of a
        // majority sample the insertion costs that sample certainty.
        assert_eq!(&t.weights[..2], &[1.0, 1.0]);
        assert!(t.weights[2..].iter().all(|&w| w < 1.0));
    }

    #[test]
    fn point_mass_seeds() {
        let t = WeightTable::from_weights(vec![0.0, 3.0, 0.0]).unwrap();
        assert_eq!(draw_seeds(&t, 50, 1).unwrap(), vec![1; 50]);
    }

    #[test]
    fn all_zero_weights_fall_back_to_uniform() {
        let t = WeightTable::from_weights(vec![0.0; 4]).unwrap();
        assert!(t.uniform_fallback);
        assert_eq!(t.probabilities, vec![0.25; 4]);
        assert_eq!(draw_seeds(&t, 10, 3).unwrap().len(), 10);
    }

    #[test]
    fn negative_weight_rejected() {
        assert!(WeightTable::from_weights(vec![1.0, -0.1]).is_err());
    }

    #[test]
    fn seeds_reproducible() {
        let t = WeightTable::from_weights(vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(draw_seeds(&t, 100, 9).unwrap(), draw_seeds(&t, 100, 9).unwrap());
        assert_ne!(draw_seeds(&t, 100, 9).unwrap(), draw_seeds(&t, 100, 10).unwrap());
    }

    #[test]
    fn synthetic_points_lie_on_segments() {
        let d = make_two_gaussian_fixture(40, 12, 2.0, 2).unwrap();
        let seeds: Vec<usize> = (0..d.len()).collect();
        let b = synthesize(&d, &seeds, 5, 4).unwrap();
        for (t, (&s, &v)) in b.seed_indices.iter().zip(&b.partner_indices).enumerate() {
            assert_eq!(d.label(v), Label::Minority);
            assert_ne!(s, v);
            let (xs, xv, p) = (d.row(s), d.row(v), b.point(t));
            let total = neighbors::euclidean(xs, xv);
            let split = neighbors::euclidean(xs, p) + neighbors::euclidean(p, xv);
            assert!((split - total).abs() <= 1e-9 * total.max(1.0));
        }
    }

    #[test]
    fn tight_cluster_bound() {
        let r = 0.01;
        let mut rows: Vec<Vec<f64>> = (0..8)
            .map(|k| {
                let a = k as f64 * std::f64::consts::TAU / 8.0;
                vec![r * a.cos(), r * a.sin()]
            })
            .collect();
        let mut labels = vec![Label::Minority; 8];
        for k in 0..20 {
            rows.push(vec![10.0 + k as f64, 0.0]);
            labels.push(Label::Majority);
        }
        let d = Dataset::new(rows, labels).unwrap();
        let seeds: Vec<usize> = (0..8).cycle().take(200).collect();
        let b = synthesize(&d, &seeds, 5, 1).unwrap();
        for (t, &s) in b.seed_indices.iter().enumerate() {
            assert!(neighbors::euclidean(d.row(s), b.point(t)) <= 2.0 * r + 1e-15);
        }
    }

    #[test]
    fn too_few_minority_for_interpolation() {
        let d = make_two_gaussian_fixture(10, 3, 2.0, 2).unwrap();
        let minority = d.indices_of(Label::Minority)[0];
        let majority = d.indices_of(Label::Majority)[0];
        assert!(matches!(synthesize(&d, &[minority], 3, 0), Err(Error::InfeasibleSynthesis(_))));
        assert!(synthesize(&d, &[majority], 3, 0).is_ok());
        assert!(synthesize(&d, &[minority], 2, 0).is_ok());
    }

    #[test]
    fn oversample_counts() {
        let d = make_two_gaussian_fixture(60, 15, 2.0, 8).unwrap();
        let cfg = SynthesisConfig {
            rng_seed: 5,
            ..Default::default()
        };
        let zero = oversample(&d, &cfg, DensityParams::default()).unwrap();
        assert_eq!(zero.data, d);

        let delta = d.delta() as usize;
        let bal = oversample(&d, &SynthesisConfig { n_synthetic: delta, ..cfg.clone() }, DensityParams::default()).unwrap();
        assert_eq!(bal.data.count(Label::Minority), bal.data.count(Label::Majority));
        assert!(bal.data.labels()[d.len()..].iter().all(|&l| l == Label::Minority));
        assert_eq!(bal.data.n_features(), d.n_features());

        let mut last = d.imbalance_ratio();
        for n in [1, 5, 20, 60] {
            let o = oversample(&d, &SynthesisConfig { n_synthetic: n, ..cfg.clone() }, DensityParams::default()).unwrap();
            assert!(o.data.imbalance_ratio() > last);
            last = o.data.imbalance_ratio();
        }
    }

    #[test]
    fn refresh_mode_adds_requested_count() {
        let d = make_two_gaussian_fixture(50, 12, 2.0, 8).unwrap();
        let cfg = SynthesisConfig {
            n_synthetic: 23,
            refresh_weights: true,
            rng_seed: 2,
            ..Default::default()
        };
        let o = oversample(&d, &cfg, DensityParams::default()).unwrap();
        assert_eq!(o.data.len(), d.len() + 23);
        assert_eq!(o.batch.len(), 23);
        let again = oversample(&d, &cfg, DensityParams::default()).unwrap();
        assert_eq!(o.data, again.data);
    }
}
