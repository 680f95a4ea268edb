//! Inverse estimation of the interfacial heat transfer coefficient in upward
//! directional solidification.
//!
//! The crate bundles a finite-volume forward solver, an objective linking
//! the two-parameter IHTC law to thermocouple data, ten population-based
//! optimizers, a Metropolis-Hastings sampler, and the statistics used to
//! compare them. Every numerical type is generic over [`Scalar`] (`f32` or
//! `f64`); the aliases below fix the scalar to `f64`.

pub mod alloy;
pub mod error;
pub mod fvm;
pub mod history;
pub mod ihtc;
pub mod inverse;
pub mod mcmc;
pub mod metaheuristics;
pub mod scalar;
pub mod stats;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Scalar used by the concrete aliases.
pub type Real = f64;

pub type Alloy = alloy::AlloyProperties<Real>;
pub type Ihtc = ihtc::IhtcParams<Real>;
pub type Mesh = fvm::MeshSpec<Real>;
pub type Boundary = fvm::BoundarySpec<Real>;
pub type History = history::ThermalHistory<Real>;
