//! Pseudo-spectral kernels for the incompressible smectic-A liquid crystal
//! flow system on the periodic unit square.
//!
//! The crate is `no_std` (it needs `alloc`) and contains only the numerics:
//! Fourier substrate, model terms, IMEX time stepping, the stationary solver
//! and post-processing diagnostics. File formats and the command line live in
//! the `smaflow` companion crate.

#![no_std]
// `!(x > 0.0)` is deliberate: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod diagnostics;
pub mod equilibrium;
mod error;
mod fft;
pub mod init;
pub mod integrator;
pub mod model;
pub mod spectral;

pub use error::{Error, Result};
pub use num_complex::Complex64;

pub use diagnostics::{DiagnosticsRecord, RateFit};
pub use integrator::{Scheme, StepConfig, Trajectory};
pub use model::{Params, State};
pub use spectral::{make_grid, DealiasRule, Field, Grid, VectorField};
