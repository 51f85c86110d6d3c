//! Sensor network localization from range measurements, solved by agents on a clique tree.
//!
//! The crate builds a decomposed semidefinite relaxation of range-based
//! maximum-likelihood localization, solves it with a primal-dual
//! interior-point method, and can compute every interior-point step by
//! quadratic message passing over a clique tree of the measurement graph.
//!
//! Numeric code is generic over [`Scalar`] (`f32`/`f64`); the `*64` aliases
//! below fix the scalar to `f64`, which is what the experiment tooling uses.

pub mod error;
pub mod graphcore;
pub mod msgpass;
pub mod pdipm;
pub mod relaxation;
pub mod scenario;
pub mod sdplinalg;
mod scalar;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type LocalizationProblem64 = relaxation::LocalizationProblem<f64>;
pub type CoupledSdp64 = relaxation::CoupledSdp<f64>;
pub type Solution64 = pdipm::Solution<f64>;
pub type DistributedSolution64 = msgpass::DistributedSolution<f64>;
