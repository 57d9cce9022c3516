//! Estimation of an unknown constant mean of a stationary random field from
//! a single time series.
//!
//! The pipeline runs in stages:
//!
//! 1. [`empirical`]: experimental semivariogram, its monotone cutoff `d`, and
//!    two experimental correlograms (variogram-based and covariance-based).
//! 2. [`fit`]: one-parameter fit of `|ρ(h)| = n^(-Θ (h/n)²)` by
//!    Levenberg–Marquardt.
//! 3. [`model`] and [`kriging`]: the negative correlation function with time
//!    parameter `t`, the bordered kriging system and its LU solution.
//! 4. [`estimator`] and [`scan`]: constraint value, estimation variance and
//!    interval, searched over `(t, j)` until the constraint holds.
//!
//! [`montecarlo`] validates the estimator on synthetic Gaussian series and
//! [`plot`] writes the data behind estimator-versus-`j` charts.

// `!(x > 0.0)` style checks are used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod empirical;
pub mod error;
pub mod estimator;
pub mod fit;
pub mod ingest;
pub mod kriging;
pub mod model;
pub mod montecarlo;
pub mod pipeline;
pub mod plot;
pub mod scan;

pub use error::{Error, Result};
pub use ingest::{load_series, Format, TimeSeries};
