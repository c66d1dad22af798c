//! Outage probability of parallel Rayleigh fading channels: exact and
//! Monte Carlo references, large-deviation exponents, high-rate product
//! tail bounds, capacity and diversity-multiplexing metrics.

pub mod baselines;
pub mod cli;
pub mod error;
pub mod exponents;
pub mod largedev;
pub mod metrics;
pub mod montecarlo;
pub mod specialfn;

pub use error::{OutageError, Result};
