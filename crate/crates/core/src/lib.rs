//! Production forecasting for thermal-recovery wells from thermocouple
//! temperatures.
//!
//! The library fits generalized linear models over a polynomial basis:
//! first-degree main effects or a second-degree expansion with centered
//! two-way interactions and squares, under either a Normal response with
//! identity link (ordinary least squares) or a Poisson response with log
//! link (iteratively reweighted least squares). Around the fitting core
//! sit dataset ingestion and cleaning, measures of fit (R², RASE, AAE),
//! Wald effect ranking by LogWorth, residual diagnostics with a fitted
//! Normal overlay, Mahalanobis outlier screening, and a seeded simulator
//! that produces datasets with known ground truth.

pub mod dataset;
pub mod error;
pub mod features;
pub mod glm;
pub mod linalg;
pub mod metrics;
pub mod outliers;
pub mod prob;
pub mod residuals;
pub mod rng;
pub mod simulate;

pub use error::{Error, ErrorClass, Result};
