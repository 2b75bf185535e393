//! Multi-resolution solar PV forecasting with weighted forecast combination.
//!
//! The crate is organised around the evaluation pipeline:
//!
//! - [`series`]: regular time series, cleaning and resampling between resolutions.
//! - [`metrics`]: mean absolute scaled error and robust aggregation.
//! - [`stat`]: seasonal naive and (S)ARIMA(X) forecasters with stepwise order search.
//! - [`ml`]: weather-driven regressors (least squares and epsilon-SVR).
//! - [`swarm`]: particle swarm optimizer with ring neighbourhoods.
//! - [`combine`]: forecast matrices, weight strategies and the recursive ensemble.
//! - [`tuning`]: seeded random search over hyperparameter spaces.
//! - [`eval`]: splits, per-house evaluation, ranking and significance tests.
//! - [`synthetic`]: a seeded synthetic cohort for demos and end-to-end tests.
//!
//! Data-parallel loops (swarm fitness, random-search trials, house batches) run on
//! rayon when the `parallel` feature is enabled and fall back to plain iterators
//! otherwise. Results are identical either way.

pub mod combine;
pub mod error;
pub mod eval;
pub mod linalg;
pub mod metrics;
pub mod ml;
pub mod par;
pub mod series;
pub mod stat;
pub mod swarm;
pub mod synthetic;
pub mod tuning;

pub use error::{Error, Result};
