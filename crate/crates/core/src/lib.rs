//! Bayesian estimation of two-qubit system–environment unitaries observed
//! through an environment-assisted qubit channel.
//!
//! The pipeline runs bottom-up through the modules:
//!
//! - [`gate_family`]: canonical parametrization of entangling two-qubit
//!   unitaries and the six one-parameter edges of the Weyl tetrahedron.
//! - [`channel`]: probe/environment input states and the 4×4 output state on
//!   reference ⊗ channel output, by closed form and by explicit dilation.
//! - [`bayes`]: risk moments over an edge, the minimizing-operator equation,
//!   the induced discrete POVM and average quadratic costs.
//! - [`probe_opt`]: grid + simplex optimization of the probe and environment
//!   inputs, and strategy classification.
//! - [`mc_verify`]: Monte Carlo simulation of the full estimation protocol.
//! - [`acceptance`]: the end-to-end validation suite used by the CLI.

pub mod acceptance;
pub mod bayes;
pub mod channel;
mod error;
pub mod gate_family;
pub mod linalg;
pub mod mc_verify;
pub mod probe_opt;
pub mod quadrature;
pub mod report;

pub use error::{Error, Result};

/// Prior variance of a flat prior on `[0, π/2]`: the cost of always guessing `π/4`.
pub const BLIND_COST: f64 = std::f64::consts::PI * std::f64::consts::PI / 48.0;
