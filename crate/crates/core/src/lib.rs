//! Frequency-domain data augmentation for multivariate time-series
//! forecasting.
//!
//! The centerpiece is [`augment::dominant_shuffle`]: transform the
//! concatenated history and future of a window to the frequency domain,
//! randomly permute the complex coefficients of its `k` largest-magnitude
//! bins, and transform back. The other operators in [`augment`] are the
//! usual frequency-domain baselines. [`dataset`] and [`forecaster`] provide
//! just enough pipeline to measure their effect end to end.

pub mod augment;
pub mod dataset;
mod error;
pub mod forecaster;
pub mod seed;
pub mod spectral;

pub use error::{Error, Result};
