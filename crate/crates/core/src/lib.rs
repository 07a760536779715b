//! Pseudo-spectral solvers for the nonlinear Klein-Gordon equation on a
//! periodic box terminated by perfectly matched layers.
//!
//! The crate is `no_std` (it needs `alloc`) and performs no IO. It contains:
//!
//! * [`spectral`]: periodic grids, fields and Fourier multipliers (1D and 2D),
//!   backed by the mixed-radix transform in [`fft`].
//! * [`absorption`]: polynomial and regularized Bermúdez absorption profiles.
//! * [`krylov`]: unrestarted, left-preconditioned GMRES on matrix-free operators.
//! * [`pml1`]: the first-order layer system with the exponential wave integrator.
//! * [`pml2`]: the coordinate-stretched second-order layer with the linearly
//!   implicit finite-difference stepper, including the rotating 2D problem.
//! * [`metrics`]: enlarged-domain reference solutions, relative errors,
//!   truncated energies and dispersion utilities.
//! * [`experiment`]: solver configuration, initial-data presets and the
//!   time loop that produces error/energy series.
#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod absorption;
pub mod error;
pub mod experiment;
pub mod fft;
pub mod krylov;
pub mod metrics;
pub mod pml1;
pub mod pml2;
pub mod spectral;

pub use error::{Error, Result};
pub use num_complex::Complex64;
