//! Numerical toolkit for quasistatic quantum mechanics and its thermostatic dual.
//!
//! The crate is organised bottom-up:
//!
//! - [`units`]: the (ħ, k_B, M) unit system every formula is scaled by.
//! - [`specfun`]: the sine integral and an adaptive Gauss–Kronrod integrator.
//! - [`spectra`]: analytic angular, radial and box eigenmodes plus a
//!   finite-difference radial solver with optional potential.
//! - [`heattrace`]: heat-trace partition functions and Weyl volume estimates.
//! - [`thermo`]: fundamental equation, entropy expectation, fiducial
//!   wavenumber constraint, the τ ↔ T duality and partition functions.
//! - [`cli`]: the batch command-line front end.

pub mod cli;
pub mod error;
pub mod heattrace;
pub mod specfun;
pub mod spectra;
pub mod summation;
pub mod thermo;
pub mod units;

pub use error::{Error, Result};
pub use heattrace::{EnergyLevel, HeatTraceResult};
pub use units::UnitSystem;
