//! Spectral toolkit for the two-dimensional massless Dirac operator in an
//! Aharonov–Bohm field.
//!
//! The crate is organised bottom-up:
//!
//! * [`specfun`]: Gamma, Gauss hypergeometric and Bessel J functions.
//! * [`grids`]: quadrature grids carrying the measures `r dr` and `E dE`.
//! * [`partialwave`]: angular decomposition of spinor fields into channels.
//! * [`spectral`]: generalized eigenfunctions, the radial Dirac operator and
//!   the Bessel-type transform that diagonalizes it.
//! * [`fracpow`]: fractional powers, their closed-form kernels and the
//!   angular smoothing multiplier.
//! * [`propagator`]: exact spectral evolution, an implicit-midpoint oracle and
//!   space-time norms.
//! * [`estimates`]: numerical checks of the dispersive estimates.
//! * [`cli`]: the `abdirac` command-line front end.

pub mod cli;
pub mod error;
pub mod estimates;
pub mod fracpow;
pub mod grids;
pub mod partialwave;
pub mod propagator;
pub mod quad;
pub mod spectral;
pub mod specfun;

pub use error::{Error, Result};

/// Version string embedded in every output file.
pub const VERSION: &str = concat!("abdirac ", env!("CARGO_PKG_VERSION"));
