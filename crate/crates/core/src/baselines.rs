//! Reference oversamplers: random duplication, SMOTE, Borderline-SMOTE
//! (variant 1) and ADASYN. All of them return the same [`Oversampled`]
//! record as CGMOS so callers can treat every method alike.

use serde::{Deserialize, Serialize};

use crate::cgmos::{self, Oversampled, SeedPool, SyntheticBatch, SynthesisConfig, WeightTable};
use crate::dataset::{Dataset, Label};
use crate::error::{Error, Result};
use crate::neighbors;
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineMethod {
    Dup,
    Smote,
    BorderlineSmote,
    Adasyn,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineConfig {
    pub method: BaselineMethod,
    pub n_synthetic: usize,
    pub k_interp: usize,
    pub k_danger: usize,
    pub rng_seed: u64,
}

impl BaselineConfig {
    pub fn new(method: BaselineMethod, n_synthetic: usize, rng_seed: u64) -> BaselineConfig {
        BaselineConfig {
            method,
            n_synthetic,
            k_interp: 5,
            k_danger: 5,
            rng_seed,
        }
    }

    pub fn run(&self, d: &Dataset) -> Result<Oversampled> {
        match self.method {
            BaselineMethod::Dup => dup_oversample(d, self.n_synthetic, self.rng_seed),
            BaselineMethod::Smote => smote_oversample(d, self.n_synthetic, self.k_interp, self.rng_seed),
            BaselineMethod::BorderlineSmote => {
                borderline_smote_oversample(d, self.n_synthetic, self.k_interp, self.k_danger, self.rng_seed)
            }
            BaselineMethod::Adasyn => adasyn_oversample(d, self.n_synthetic, self.k_interp, self.rng_seed),
        }
    }
}

fn minority_table(d: &Dataset) -> Result<WeightTable> {
    WeightTable::uniform_over(d.len(), &d.indices_of(Label::Minority))
}

fn check_smote_feasible(d: &Dataset, n: usize, k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::Parameter("k_interp must be at least 1".into()));
    }
    let minority = d.count(Label::Minority);
    if n > 0 && minority <= k {
        return Err(Error::InfeasibleSynthesis(format!(
            "{minority} minority samples, need more than k_interp = {k}"
        )));
    }
    Ok(())
}

fn interpolate_from(d: &Dataset, table: WeightTable, n: usize, k: usize, rng_seed: u64) -> Result<Oversampled> {
    let cfg = SynthesisConfig {
        n_synthetic: n,
        k_interp: k,
        refresh_weights: false,
        seed_pool: SeedPool::MinorityOnly,
        rng_seed,
    };
    let (data, batch) = cgmos::oversample_with_table(d, &table, &cfg)?;
    Ok(Oversampled {
        data,
        weights: table,
        batch,
    })
}

/// Appends `n` minority rows drawn uniformly with replacement.
pub fn dup_oversample(d: &Dataset, n: usize, rng_seed: u64) -> Result<Oversampled> {
    let table = minority_table(d)?;
    let seeds = cgmos::draw_seeds(&table, n, rng::derive(rng_seed, &[rng::TAG_SEEDS]))?;
    let mut points = Vec::with_capacity(n * d.n_features());
    for &s in &seeds {
        points.extend_from_slice(d.row(s));
    }
    let data = d.append_minority(&points)?;
    Ok(Oversampled {
        data,
        weights: table,
        batch: SyntheticBatch {
            n_features: d.n_features(),
            points,
            partner_indices: seeds.clone(),
            seed_indices: seeds,
        },
    })
}

pub fn smote_oversample(d: &Dataset, n: usize, k: usize, rng_seed: u64) -> Result<Oversampled> {
    check_smote_feasible(d, n, k)?;
    interpolate_from(d, minority_table(d)?, n, k, rng_seed)
}

/// Number of majority samples among the `k` nearest neighbours of each
/// minority sample (over the whole dataset, self excluded). Majority
/// entries are `None`.
fn majority_neighbor_counts(d: &Dataset, k: usize) -> Vec<Option<usize>> {
    (0..d.len())
        .map(|i| {
            if d.label(i) != Label::Minority {
                return None;
            }
            let candidates = d.rows().enumerate().filter(|(j, _)| *j != i);
            let nn = neighbors::k_nearest(d.row(i), candidates, k);
            Some(nn.iter().filter(|nb| d.label(nb.index) == Label::Majority).count())
        })
        .collect()
}

/// Minority samples whose `k_danger` neighbourhood is at least half but not
/// entirely majority.
pub fn danger_set(d: &Dataset, k_danger: usize) -> Result<Vec<usize>> {
    if k_danger == 0 {
        return Err(Error::Parameter("k_danger must be at least 1".into()));
    }
    if k_danger >= d.len() {
        return Err(Error::Parameter(format!("k_danger = {k_danger} needs more than {} samples", d.len())));
    }
    Ok(majority_neighbor_counts(d, k_danger)
        .into_iter()
        .enumerate()
        .filter_map(|(i, c)| c.filter(|&m| 2 * m >= k_danger && m < k_danger).map(|_| i))
        .collect())
}

pub fn borderline_smote_oversample(
    d: &Dataset,
    n: usize,
    k: usize,
    k_danger: usize,
    rng_seed: u64,
) -> Result<Oversampled> {
    check_smote_feasible(d, n, k)?;
    let danger = danger_set(d, k_danger)?;
    if danger.is_empty() {
        log::warn!("borderline-SMOTE found no DANGER samples; using plain SMOTE");
        return interpolate_from(d, minority_table(d)?, n, k, rng_seed);
    }
    interpolate_from(d, WeightTable::uniform_over(d.len(), &danger)?, n, k, rng_seed)
}

/// `r_i` = fraction of majority samples among the `k` nearest neighbours of
/// each minority sample; zero for majority samples.
pub fn adasyn_ratios(d: &Dataset, k: usize) -> Result<Vec<f64>> {
    if k == 0 || k >= d.len() {
        return Err(Error::Parameter(format!("k = {k} out of range for {} samples", d.len())));
    }
    Ok(majority_neighbor_counts(d, k)
        .into_iter()
        .map(|c| c.map_or(0.0, |m| m as f64 / k as f64))
        .collect())
}

pub fn adasyn_oversample(d: &Dataset, n: usize, k: usize, rng_seed: u64) -> Result<Oversampled> {
    check_smote_feasible(d, n, k)?;
    let ratios = adasyn_ratios(d, k)?;
    let table = WeightTable::from_pool_weights(ratios, &d.indices_of(Label::Minority))?;
    interpolate_from(d, table, n, k, rng_seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::make_two_gaussian_fixture;

    fn fixture() -> Dataset {
        make_two_gaussian_fixture(60, 20, 2.0, 11).unwrap()
    }

    #[test]
    fn dup_rows_come_from_minority() {
        let d = fixture();
        let o = dup_oversample(&d, 13, 4).unwrap();
        assert_eq!(o.data.len(), d.len() + 13);
        for t in 0..13 {
            let row = o.data.row(d.len() + t);
            assert!(d.class_rows(Label::Minority).any(|(_, r)| r == row));
        }
        assert_eq!(dup_oversample(&d, 0, 4).unwrap().data, d);
        let bal = dup_oversample(&d, d.delta() as usize, 4).unwrap();
        assert_eq!(bal.data.delta(), 0);
    }

    #[test]
    fn smote_matches_cgmos_with_uniform_minority_weights() {
        let d = fixture();
        let a = smote_oversample(&d, 30, 5, 8).unwrap();
        let cfg = SynthesisConfig {
            n_synthetic: 30,
            k_interp: 5,
            refresh_weights: false,
            seed_pool: SeedPool::MinorityOnly,
            rng_seed: 8,
        };
        let table = WeightTable::uniform_over(d.len(), &d.indices_of(Label::Minority)).unwrap();
        let (b, _) = cgmos::oversample_with_table(&d, &table, &cfg).unwrap();
        assert_eq!(a.data, b);
        assert!(a.batch.seed_indices.iter().all(|&s| d.label(s) == Label::Minority));
    }

    #[test]
    fn smote_needs_more_minority_than_k() {
        let d = make_two_gaussian_fixture(10, 5, 1.0, 1).unwrap();
        assert!(matches!(smote_oversample(&d, 3, 5, 0), Err(Error::InfeasibleSynthesis(_))));
        assert!(smote_oversample(&d, 3, 4, 0).is_ok());
    }

    fn line(minority: &[f64], majority: &[f64]) -> Dataset {
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for &x in majority {
            rows.push(vec![x]);
            labels.push(Label::Majority);
        }
        for &x in minority {
            rows.push(vec![x]);
            labels.push(Label::Minority);
        }
        Dataset::new(rows, labels).unwrap()
    }

    #[test]
    fn danger_excludes_noise_and_safe() {
        // Safe cluster near 0, a boundary sample at 50, noise at 100 inside
        // the majority block.
        let minority = [0.0, 0.1, 0.2, 0.3, 0.4, 50.0, 100.0];
        let majority = [48.0, 49.0, 51.0, 52.0, 99.0, 99.5, 100.5, 101.0, 101.5, 102.0, 53.0, 54.0];
        let d = line(&minority, &majority);
        let danger = danger_set(&d, 3).unwrap();
        let noise = d.len() - 1;
        let boundary = d.len() - 2;
        assert!(!danger.contains(&noise));
        for safe in majority.len()..majority.len() + 5 {
            assert!(!danger.contains(&safe));
        }
        // Neighbours of 50: 49, 51 (majority) and 48 or 52; all majority, so noise too.
        assert!(!danger.contains(&boundary));
    }

    #[test]
    fn danger_picks_mixed_neighbourhoods() {
        let minority = [0.0, 0.5, 1.0, 1.5, 2.0, 2.5];
        let majority = [2.7, 3.0, 3.5, 4.0, 4.5, 5.0, 5.5];
        let d = line(&minority, &majority);
        let danger = danger_set(&d, 4).unwrap();
        assert!(!danger.is_empty());
        for &i in &danger {
            assert_eq!(d.label(i), Label::Minority);
            assert!(d.row(i)[0] >= 1.5);
        }
        let o = borderline_smote_oversample(&d, 40, 3, 4, 2).unwrap();
        assert!(o.batch.seed_indices.iter().all(|s| danger.contains(s)));
    }

    #[test]
    fn borderline_falls_back_without_danger() {
        let d = line(&[0.0, 0.1, 0.2, 0.3, 0.4, 0.5], &[100.0, 101.0, 102.0, 103.0, 104.0, 105.0, 106.0]);
        assert!(danger_set(&d, 3).unwrap().is_empty());
        let a = borderline_smote_oversample(&d, 10, 3, 3, 5).unwrap();
        let b = smote_oversample(&d, 10, 3, 5).unwrap();
        assert_eq!(a.data, b.data);
    }

    #[test]
    fn adasyn_uniform_when_isolated() {
        let d = line(&[0.0, 0.1, 0.2, 0.3, 0.4, 0.5], &[100.0, 101.0, 102.0, 103.0, 104.0, 105.0, 106.0]);
        let o = adasyn_oversample(&d, 10, 3, 5).unwrap();
        assert!(o.weights.uniform_fallback);
        for i in 0..d.len() {
            let expected = if d.label(i) == Label::Minority { 1.0 / 6.0 } else { 0.0 };
            assert!((o.weights.probabilities[i] - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn adasyn_point_mass() {
        let d = line(&[0.0, 0.1, 0.2, 0.3, 0.4, 50.0], &[49.0, 49.5, 50.5, 51.0, 52.0, 53.0]);
        let r = adasyn_ratios(&d, 3).unwrap();
        let lonely = d.len() - 1;
        assert_eq!(r[lonely], 1.0);
        assert!(r.iter().enumerate().all(|(i, &v)| i == lonely || v == 0.0));
        let o = adasyn_oversample(&d, 25, 3, 1).unwrap();
        assert!(o.batch.seed_indices.iter().all(|&s| s == lonely));
    }

    #[test]
    fn baselines_reproducible_and_minority_only() {
        let d = fixture();
        for method in [
            BaselineMethod::Dup,
            BaselineMethod::Smote,
            BaselineMethod::BorderlineSmote,
            BaselineMethod::Adasyn,
        ] {
            let cfg = BaselineConfig::new(method, 17, 3);
            let a = cfg.run(&d).unwrap();
            let b = cfg.run(&d).unwrap();
            assert_eq!(a.data, b.data, "{method:?}");
            assert_eq!(a.data.n_features(), d.n_features());
            assert!(a.data.labels()[d.len()..].iter().all(|&l| l == Label::Minority));
        }
    }
}
