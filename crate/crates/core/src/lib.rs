//! Certainty guided minority oversampling (CGMOS) for imbalanced binary
//! classification, with baseline oversamplers, two base classifiers, an
//! evaluation harness and executable checks of the method's guarantee.

pub mod baselines;
pub mod cgmos;
pub mod classifiers;
pub mod dataset;
pub mod density;
pub mod error;
pub mod eval;
pub mod neighbors;
pub mod resample;
pub mod rng;
pub mod theory;

pub use dataset::{Dataset, Label};
pub use error::{Error, Result};
