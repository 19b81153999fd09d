//! Base classifiers with minority scores in [0, 1]: the KDE-Bayes
//! classifier (`b_kde`) and k-nearest neighbours.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Label};
use crate::density::{DensityModel, DensityParams};
use crate::error::{Error, Result};
use crate::neighbors;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassifierKind {
    BKde,
    Knn,
}

impl ClassifierKind {
    pub fn name(self) -> &'static str {
        match self {
            ClassifierKind::BKde => "b_kde",
            ClassifierKind::Knn => "knn",
        }
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ClassifierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<ClassifierKind> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "b_kde" | "bkde" => Ok(ClassifierKind::BKde),
            "knn" => Ok(ClassifierKind::Knn),
            _ => Err(Error::Parameter(format!("unknown classifier '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifierSpec {
    pub kind: ClassifierKind,
    /// Density parameters for `b_kde`.
    pub density: DensityParams,
    /// Neighbour count for `knn`.
    pub knn_k: usize,
}

impl ClassifierSpec {
    pub fn b_kde(density: DensityParams) -> ClassifierSpec {
        ClassifierSpec {
            kind: ClassifierKind::BKde,
            density,
            knn_k: 5,
        }
    }

    pub fn knn(k: usize) -> ClassifierSpec {
        ClassifierSpec {
            kind: ClassifierKind::Knn,
            density: DensityParams::default(),
            knn_k: k,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TrainedClassifier {
    BKde { data: Dataset, model: DensityModel },
    Knn { data: Dataset, k: usize },
}

pub fn train(spec: &ClassifierSpec, d: &Dataset) -> Result<TrainedClassifier> {
    match spec.kind {
        ClassifierKind::BKde => Ok(TrainedClassifier::BKde {
            model: DensityModel::fit(d, spec.density)?,
            data: d.clone(),
        }),
        ClassifierKind::Knn => {
            if spec.knn_k == 0 || spec.knn_k > d.len() {
                return Err(Error::Parameter(format!(
                    "knn k = {} must be in 1..={}",
                    spec.knn_k,
                    d.len()
                )));
            }
            Ok(TrainedClassifier::Knn {
                data: d.clone(),
                k: spec.knn_k,
            })
        }
    }
}

impl TrainedClassifier {
    pub fn kind(&self) -> ClassifierKind {
        match self {
            TrainedClassifier::BKde { .. } => ClassifierKind::BKde,
            TrainedClassifier::Knn { .. } => ClassifierKind::Knn,
        }
    }

    fn data(&self) -> &Dataset {
        match self {
            TrainedClassifier::BKde { data, .. } | TrainedClassifier::Knn { data, .. } => data,
        }
    }

    /// Minority score of a query point.
    pub fn score_minority(&self, x: &[f64]) -> Result<f64> {
        let data = self.data();
        if x.len() != data.n_features() {
            return Err(Error::DimensionMismatch {
                expected: data.n_features(),
                actual: x.len(),
            });
        }
        match self {
            TrainedClassifier::BKde { data, model } => Ok(model.posterior_at(data, x)?.minority),
            TrainedClassifier::Knn { data, k } => {
                let nn = neighbors::k_nearest(x, data.rows().enumerate(), *k);
                let votes = nn.iter().filter(|nb| data.label(nb.index) == Label::Minority).count();
                Ok(votes as f64 / *k as f64)
            }
        }
    }

    pub fn predict(&self, x: &[f64]) -> Result<Label> {
        Ok(decide(self.score_minority(x)?))
    }

    /// Scores every row of `d`, in row order.
    pub fn score_all(&self, d: &Dataset) -> Result<Vec<f64>> {
        (0..d.len())
            .into_par_iter()
            .map(|i| self.score_minority(d.row(i)))
            .collect()
    }
}

/// Minority iff the score is strictly above one half.
pub fn decide(score: f64) -> Label {
    if score > 0.5 {
        Label::Minority
    } else {
        Label::Majority
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::make_two_gaussian_fixture;

    #[test]
    fn threshold_rule() {
        assert_eq!(decide(0.5), Label::Majority);
        assert_eq!(decide(0.51), Label::Minority);
        assert_eq!(decide(0.49), Label::Majority);
    }

    #[test]
    fn b_kde_symmetric_query() {
        let d = Dataset::new(
            vec![vec![-1.0], vec![1.0], vec![-1.5], vec![1.5]],
            vec![Label::Minority, Label::Majority, Label::Minority, Label::Majority],
        )
        .unwrap();
        let c = train(&ClassifierSpec::b_kde(DensityParams::new(1, 1.0)), &d).unwrap();
        assert!((c.score_minority(&[0.0]).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(c.predict(&[0.0]).unwrap(), Label::Majority);
    }

    #[test]
    fn b_kde_matches_posterior_on_training_points() {
        let d = make_two_gaussian_fixture(50, 15, 2.0, 3).unwrap();
        let c = train(&ClassifierSpec::b_kde(DensityParams::default()), &d).unwrap();
        let TrainedClassifier::BKde { model, .. } = &c else { unreachable!() };
        for j in 0..d.len() {
            let p = model.posterior(&d, j).unwrap().minority;
            assert!((c.score_minority(d.row(j)).unwrap() - p).abs() < 1e-12);
        }
    }

    #[test]
    fn knn_votes() {
        let d = Dataset::new(
            vec![vec![0.0], vec![1.0], vec![2.0], vec![10.0], vec![11.0]],
            vec![Label::Minority, Label::Minority, Label::Majority, Label::Majority, Label::Majority],
        )
        .unwrap();
        let c3 = train(&ClassifierSpec::knn(3), &d).unwrap();
        assert!((c3.score_minority(&[0.5]).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        let c1 = train(&ClassifierSpec::knn(1), &d).unwrap();
        for x in [-1.0, 0.4, 1.6, 5.0, 12.0] {
            let s = c1.score_minority(&[x]).unwrap();
            assert!(s == 0.0 || s == 1.0);
        }
        assert!(matches!(train(&ClassifierSpec::knn(6), &d), Err(Error::Parameter(_))));
        assert!(matches!(c1.score_minority(&[1.0, 2.0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn retraining_is_deterministic() {
        let d = make_two_gaussian_fixture(40, 10, 2.0, 5).unwrap();
        let spec = ClassifierSpec::b_kde(DensityParams::default());
        assert_eq!(train(&spec, &d).unwrap(), train(&spec, &d).unwrap());
    }
}
