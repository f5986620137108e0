//! Piecewise-stationary multi-armed bandit simulation: environments, index
//! policies, change detectors, the detection-augmented composer and a
//! Monte Carlo harness.

pub mod bandit;
pub mod dab;
pub mod detect;
pub mod env;
pub mod error;
pub mod harness;
pub mod kl;
pub mod seed;

pub use error::{Error, Result};
