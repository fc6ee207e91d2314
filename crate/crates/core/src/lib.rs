//! Sparse nonnegative signal recovery with very sparse skewed-stable designs.
//!
//! The pipeline: a signal of length `n` with at most `k` nonzero nonnegative
//! entries is measured through a random sparse matrix whose nonzero entries
//! are maximally skewed positive stable variables. Each coordinate is then
//! estimated as the minimum, over the rows that sample it, of the measurement
//! divided by that coordinate's own design entry. The estimator never
//! undershoots, and the probability that it overshoots by more than a
//! tolerance is governed by the CDF of a ratio of independent stable samples,
//! which this crate evaluates to high accuracy by quadrature.
//!
//! Modules:
//! - [`rng`]: label-addressed deterministic random streams.
//! - [`stable_sampler`]: positive stable draws and the ratio statistic.
//! - [`ratio_cdf`]: the ratio CDF, closed forms and quadrature.
//! - [`analysis`]: error probabilities, measurement counts, decodability
//!   functions.
//! - [`codec`]: design generation, encoding, minimum decoding.
//! - [`experiments`]: deterministic parameter sweeps and their CSV output.

pub mod analysis;
pub mod codec;
pub mod error;
pub mod experiments;
pub mod ratio_cdf;
pub mod rng;
pub mod stable_sampler;

pub use error::{Error, Result};
