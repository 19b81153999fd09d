//! One entry point over every oversampler, used by the evaluation harness
//! and the command line.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::baselines::{self, BaselineMethod};
use crate::cgmos::{self, Oversampled, SeedPool, SynthesisConfig};
use crate::dataset::Dataset;
use crate::density::DensityParams;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    None,
    Dup,
    Smote,
    BorderlineSmote,
    Adasyn,
    Cgmos,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::None,
        Method::Dup,
        Method::Smote,
        Method::BorderlineSmote,
        Method::Adasyn,
        Method::Cgmos,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::None => "none",
            Method::Dup => "dup",
            Method::Smote => "smote",
            Method::BorderlineSmote => "borderline_smote",
            Method::Adasyn => "adasyn",
            Method::Cgmos => "cgmos",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Method> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        Method::ALL
            .into_iter()
            .find(|m| m.name() == key || (key == "borderline" && *m == Method::BorderlineSmote))
            .ok_or_else(|| Error::Parameter(format!("unknown method '{s}'")))
    }
}

/// How many synthetic samples to add.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Amount {
    Fixed(usize),
    /// `round(k * delta)` where `delta` is the majority/minority gap of the
    /// dataset being oversampled.
    DeltaFactor(f64),
}

impl Amount {
    pub fn resolve(self, d: &Dataset) -> usize {
        match self {
            Amount::Fixed(n) => n,
            Amount::DeltaFactor(k) => (k * d.delta().max(0) as f64).round() as usize,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OversamplerSpec {
    pub method: Method,
    pub amount: Amount,
    pub k_interp: usize,
    pub k_danger: usize,
    pub density: DensityParams,
    pub seed_pool: SeedPool,
    pub refresh_weights: bool,
}

impl OversamplerSpec {
    pub fn new(method: Method, amount: Amount) -> OversamplerSpec {
        OversamplerSpec {
            method,
            amount,
            k_interp: 5,
            k_danger: 5,
            density: DensityParams::default(),
            seed_pool: SeedPool::AllSamples,
            refresh_weights: false,
        }
    }

    pub fn with_method(&self, method: Method) -> OversamplerSpec {
        OversamplerSpec { method, ..self.clone() }
    }

    pub fn apply(&self, d: &Dataset, rng_seed: u64) -> Result<Oversampled> {
        let n = self.amount.resolve(d);
        let baseline = |method| {
            baselines::BaselineConfig {
                method,
                n_synthetic: n,
                k_interp: self.k_interp,
                k_danger: self.k_danger,
                rng_seed,
            }
            .run(d)
        };
        match self.method {
            Method::None => baselines::dup_oversample(d, 0, rng_seed),
            Method::Dup => baseline(BaselineMethod::Dup),
            Method::Smote => baseline(BaselineMethod::Smote),
            Method::BorderlineSmote => baseline(BaselineMethod::BorderlineSmote),
            Method::Adasyn => baseline(BaselineMethod::Adasyn),
            Method::Cgmos => {
                let cfg = SynthesisConfig {
                    n_synthetic: n,
                    k_interp: self.k_interp,
                    refresh_weights: self.refresh_weights,
                    seed_pool: self.seed_pool,
                    rng_seed,
                };
                cgmos::oversample(d, &cfg, self.density)
            }
        }
    }
}
