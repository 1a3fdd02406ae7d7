//! Analysis toolkit for server monitoring data: ingest apache logs, metrics
//! CSV and JSON records; extract per-application memory-usage model
//! parameters via signal-pattern recognition; decompose traffic series into
//! seasonal, trend and residual components; and forecast residuals with
//! iterative ARIMA fits benchmarked against the naive forecast.
//!
//! The numeric layers are generic over the floating point type through
//! [`Scalar`]; the aliases below fix `f64` for ordinary use.

#![forbid(unsafe_code)]

pub mod error;
pub mod ingest;
pub mod scalar;
pub mod aggregate;
pub mod forecast;
pub mod render;
pub mod seasonal;
pub mod signal;
pub mod simulate;
pub mod series;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Regular series over `f64`, the working type of the pipelines.
pub type Series = series::RegularSeries<f64>;
/// Regular series over `f32` for memory-constrained callers.
pub type Series32 = series::RegularSeries<f32>;
/// Seasonal profile over `f64`.
pub type Profile = seasonal::SeasonalProfile<f64>;
