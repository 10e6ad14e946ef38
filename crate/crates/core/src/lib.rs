//! Bayesian quantile regression with the skew exponential power likelihood.

pub mod diagnostics;
pub mod distributions;
pub mod error;
pub mod gam;
pub mod linear_sampler;
pub mod simulation;
pub mod special;

#[cfg(test)]
mod testutil;

pub use error::{Error, Result};
