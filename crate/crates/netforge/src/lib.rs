//! netforge: explicit weight-level construction of dense ReLU networks.
//!
//! The crate builds networks layer by layer — no training anywhere — and
//! provides three layers of machinery:
//!
//! * a small calculus of network combinators (composition,
//!   parallelization, sums, skip connections) with exact realization
//!   identities;
//! * a deterministic Monte Carlo Euler simulator for SDEs with additive
//!   noise, plus closed-form error and moment bounds;
//! * a compiler that freezes one noise realization and assembles the
//!   whole Monte Carlo Euler estimator for a Kolmogorov backward PDE
//!   into a single deep ReLU network, with parameter-count accounting.
//!
//! The core is generic over the scalar type; the crate-root aliases fix
//! `f64`, which is what the CLI and the file formats use.

pub mod bounds;
pub mod builder;
pub mod calculus;
pub mod family;
pub mod fit;
pub mod json;
pub mod lp;
pub mod matrix;
pub mod network;
pub mod sampler;
pub mod scalar;
pub mod scheduler;
pub mod sde;

pub use scalar::Scalar;

/// Dense row-major `f64` matrix.
pub type DenseMatrix = matrix::Matrix<f64>;
/// `f64` network; the paper-facing default.
pub type NeuralNet = network::Network<f64>;
/// `f64` activation.
pub type ReluOrCustom = network::Activation<f64>;
/// `f64` SDE problem.
pub type Problem = sde::SdeProblem<f64>;
/// `f64` coefficient family.
pub type Family = family::ApproximationFamily<f64>;
