//! Exact finite-sample and high-dimensional distribution theory for the
//! two-group linear discriminant function.
//!
//! The crate covers the discriminant coefficients `â = S_pl⁻¹(x̄⁽¹⁾ − x̄⁽²⁾)`,
//! linear combinations of them, the plug-in classification score and its
//! error rate. Every statistic has two samplers: a cheap one built from a
//! handful of independent univariate draws (`representation`) and a
//! brute-force one that simulates raw Gaussian data (`oracle`). The two
//! are compared in distribution throughout the test suites.
//!
//! All randomness flows through [`RngStream`], a counter-based stream keyed
//! by `(seed, stream_id)`, so Monte Carlo output is independent of the
//! number of worker threads.

pub mod asymptotics;
pub mod distributions;
pub mod error;
pub mod error_rate;
pub mod harness;
pub mod inference;
pub mod model;
pub mod oracle;
pub mod quadrature;
pub mod representation;
pub mod rng;

pub use error::{Error, Result};
pub use model::{Group, PooledEstimates, PopulationModel, ProblemDims};
pub use rng::RngStream;
