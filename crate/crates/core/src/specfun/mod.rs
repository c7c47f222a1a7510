//! Special functions: Gamma, Pochhammer, Gauss `2F1` on `[0, 1]` and Bessel
//! `J_nu` of nonnegative real order. All functions are pure and real-valued.

mod bessel;
mod gamma;
mod hyp2f1;

pub use bessel::{bessel_j, bessel_j_half, BesselJ, BesselOrder};
pub use gamma::{gamma_fn, gamma_ratio, ln_gamma_positive, ln_gamma_signed, pochhammer, rgamma};
pub use hyp2f1::{gauss_2f1, gauss_2f1_at_one, HypergeometricParams};
