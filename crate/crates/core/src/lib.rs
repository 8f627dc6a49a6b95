//! Pseudospectral simulation and diagnostics for the singularly perturbed
//! 2.5-dimensional Navier–Stokes system, the 3-D Navier–Stokes system with
//! slowly varying data, and the remainder between the two.
//!
//! The numerical core is generic over the scalar type ([`Real`]); the aliases
//! at the crate root fix it to `f64`, which is what the solvers are validated
//! in.

pub mod campaign;
pub mod diagnostics;
pub mod error;
pub mod real;
pub mod ns25d;
pub mod ns3d;
pub mod spectral;

pub use error::{Error, Result};
pub use real::Real;

pub type Grid64 = spectral::Grid<f64>;
pub type ScalarField64 = spectral::ScalarField<f64>;
pub type VectorField64 = spectral::VectorField<f64>;
