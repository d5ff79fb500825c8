//! Day-ahead GHI forecasting with a two-stage hybrid model.
//!
//! The pipeline stationarizes hourly irradiance data (clear-sky offset
//! removal, nighttime stripping, polynomial detrending, ADF check,
//! normalization), trains a nonlinear autoregressive network whose
//! day-ahead fitting series feeds an ARMAX model as exogenous input, and
//! inverts the stationarization on the final forecast.
//!
//! See the book under `book/` for a guided tour, or the `heliocast` CLI
//! for end-to-end runs.

pub mod armax;
pub mod cli;
pub mod config;
pub mod error;
pub mod eval;
pub mod ingest;
mod linalg;
pub mod narnn;
pub mod preprocess;
pub mod solar;
pub mod synth;

pub use error::{Error, Result};
