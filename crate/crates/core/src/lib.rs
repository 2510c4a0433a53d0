//! Special-relativistic mechanics over flat and weakly curved spacetime.
//!
//! Signature is (+,+,+,-) with x⁴ = ct; electromagnetism uses Gaussian units.

pub mod curvilinear;
pub mod electromagnetism;
pub mod error;
pub mod field;
pub mod fluids;
pub mod gravity;
pub mod minkowski;
pub mod ode;
pub mod orbits;
pub mod worldline;

pub use error::{Error, Result};
pub use minkowski::{Covector, FourVector, Tensor2, ThreeVector};
