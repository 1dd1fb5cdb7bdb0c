//! Quantum Fisher information of coupled-cavity sensors near exceptional
//! points.
//!
//! The crate is organized bottom-up:
//!
//! - [`numerics`]: small complex matrices, eigensystems, quadrature.
//! - [`model`]: the two-cavity coefficient matrix, its splitting,
//!   susceptibility and eigenvector overlap.
//! - [`scattering`]: propagators, scattering amplitude and Gaussian output
//!   moments of the waveguide field.
//! - [`gaussian`]: fidelity, Bures distance and the Fisher information of
//!   single-mode Gaussian states, plus two brute-force oracles.
//! - [`sensing`]: frequency-integrated Fisher information, its splitting
//!   decomposition and the Cramér–Rao bound.
//! - [`active`]: the gain-loaded (active–passive) system up to the lasing
//!   threshold.
//!
//! All frequencies and rates are dimensionless, in units of the passive
//! cavity decay rate `γ_b`.

pub mod active;
pub mod error;
pub mod gaussian;
pub mod model;
pub mod numerics;
pub mod scattering;
pub mod sensing;

pub use error::{Error, Result};
pub use num_complex::Complex64;
