//! C ABI for `abdirac`.
//!
//! Functions return an [`AbdStatus`]; results go through out-pointers. On a
//! nonzero status, [`abd_last_error`] returns a message for the calling
//! thread. Complex arrays are interleaved `(re, im)` pairs of doubles, so an
//! array of `n` complex values has `2n` doubles.
//!
//! Transforms are opaque [`AbdTransform`] handles created by
//! [`abd_transform_new`] and released by [`abd_transform_free`].

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;

use abdirac::estimates::smoothing_constant;
use abdirac::fracpow::weber_schafheitlin;
use abdirac::grids::{EnergyGrid, GridScheme, GridSpec, RadialGrid, RadialSpinor};
use abdirac::propagator::evolve_spectral;
use abdirac::specfun::{bessel_j, gamma_fn, gauss_2f1, gauss_2f1_at_one, BesselOrder, HypergeometricParams};
use abdirac::spectral::{BranchConvention, Channel, SpectralCoeff, SpectralPlan};
use abdirac::Error;
use num_complex::Complex64;

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AbdStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParameter = 2,
    Domain = 3,
    Pole = 4,
    NonConvergence = 5,
    Unsupported = 6,
    Solver = 7,
    Internal = 8,
}

/// Grid quadrature schemes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AbdScheme {
    CompositeGauss = 0,
    UniformTrapezoid = 1,
}

/// Opaque transform handle.
pub struct AbdTransform {
    plan: SpectralPlan,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> AbdStatus {
    match e {
        Error::GammaPole(_) => AbdStatus::Pole,
        Error::HypergeometricParams(_) | Error::InvalidParameter(_) | Error::Aliasing(_) => {
            AbdStatus::InvalidParameter
        }
        Error::DivergentAtOne(_) | Error::Domain(_) => AbdStatus::Domain,
        Error::NonConvergence(_) => AbdStatus::NonConvergence,
        Error::Unsupported(_) => AbdStatus::Unsupported,
        Error::Solver(_) => AbdStatus::Solver,
        Error::Io(_) | Error::Serde(_) => AbdStatus::Internal,
    }
}

enum Failure {
    Null,
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

fn guard(body: impl FnOnce() -> Result<(), Failure>) -> AbdStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => AbdStatus::Ok,
        Ok(Err(Failure::Null)) => {
            set_error("null pointer argument");
            AbdStatus::NullPointer
        }
        Ok(Err(Failure::Core(e))) => {
            set_error(&e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic");
            AbdStatus::Internal
        }
    }
}

fn null() -> Failure {
    Failure::Null
}

unsafe fn write(out: *mut f64, v: f64) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null());
    }
    *out = v;
    Ok(())
}

/// Message of the last failure on this thread; valid until the next failing
/// call on the same thread. Never null.
#[no_mangle]
pub extern "C" fn abd_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version string (static).
#[no_mangle]
pub extern "C" fn abd_version() -> *const c_char {
    static V: &str = concat!("abdirac ", env!("CARGO_PKG_VERSION"), "\0");
    V.as_ptr().cast()
}

/// `Γ(x)`.
#[no_mangle]
pub unsafe extern "C" fn abd_gamma(x: f64, out: *mut f64) -> AbdStatus {
    guard(|| write(out, gamma_fn(x)?))
}

/// `J_ν(x)` for `ν ≥ 0`, `x ≥ 0`.
#[no_mangle]
pub unsafe extern "C" fn abd_bessel_j(nu: f64, x: f64, out: *mut f64) -> AbdStatus {
    guard(|| {
        if !(x >= 0.0 && x.is_finite()) {
            return Err(Error::Domain(format!("argument {x} must be finite and nonnegative")).into());
        }
        write(out, bessel_j(BesselOrder::new(nu)?, x))
    })
}

/// `₂F₁(a, b; c; z)` for `0 ≤ z < 1`.
#[no_mangle]
pub unsafe extern "C" fn abd_hyp2f1(a: f64, b: f64, c: f64, z: f64, out: *mut f64) -> AbdStatus {
    guard(|| write(out, gauss_2f1(HypergeometricParams::new(a, b, c)?, z)?))
}

/// `₂F₁(a, b; c; 1)` for `c − a − b > 0`.
#[no_mangle]
pub unsafe extern "C" fn abd_hyp2f1_at_one(a: f64, b: f64, c: f64, out: *mut f64) -> AbdStatus {
    guard(|| write(out, gauss_2f1_at_one(HypergeometricParams::new(a, b, c)?)?))
}

/// Explicit local smoothing constant for exponent `gamma` in channel `l`.
#[no_mangle]
pub unsafe extern "C" fn abd_smoothing_constant(gamma: f64, alpha: f64, l: i32, out: *mut f64) -> AbdStatus {
    guard(|| write(out, smoothing_constant(gamma, alpha, l)?))
}

/// `∫₀^∞ J_ν(rt) J_μ(st) t^{−λ} dt` for `0 < r ≤ s`.
#[no_mangle]
pub unsafe extern "C" fn abd_weber_schafheitlin(
    nu: f64,
    mu: f64,
    lambda: f64,
    r: f64,
    s: f64,
    out: *mut f64,
) -> AbdStatus {
    guard(|| write(out, weber_schafheitlin(nu, mu, lambda, r, s)?))
}

fn scheme(s: AbdScheme) -> GridScheme {
    match s {
        AbdScheme::CompositeGauss => GridScheme::CompositeGauss,
        AbdScheme::UniformTrapezoid => GridScheme::UniformTrapezoid,
    }
}

/// Creates the transform of channel `(l, alpha)` between a radial grid on
/// `(0, r_max]` with `n_r` nodes and an energy grid on `(0, e_max]` with
/// `n_e` nodes.
#[no_mangle]
pub unsafe extern "C" fn abd_transform_new(
    l: i32,
    alpha: f64,
    r_max: f64,
    n_r: usize,
    e_max: f64,
    n_e: usize,
    grid_scheme: AbdScheme,
    out: *mut *mut AbdTransform,
) -> AbdStatus {
    guard(|| {
        if out.is_null() {
            return Err(null());
        }
        let ch = Channel::new(l, alpha)?;
        let rg = Arc::new(RadialGrid::new(GridSpec { max: r_max, n: n_r, scheme: scheme(grid_scheme) })?);
        let eg = Arc::new(EnergyGrid::new(GridSpec { max: e_max, n: n_e, scheme: scheme(grid_scheme) })?);
        *out = Box::into_raw(Box::new(AbdTransform { plan: SpectralPlan::new(ch, rg, eg) }));
        Ok(())
    })
}

/// Releases a handle. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn abd_transform_free(h: *mut AbdTransform) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Number of radial nodes, or 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn abd_transform_radial_len(h: *const AbdTransform) -> usize {
    h.as_ref().map_or(0, |t| t.plan.rgrid().len())
}

/// Number of energy nodes, or 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn abd_transform_energy_len(h: *const AbdTransform) -> usize {
    h.as_ref().map_or(0, |t| t.plan.egrid().len())
}

unsafe fn copy_out(src: &[f64], out: *mut f64, len: usize) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null());
    }
    if len != src.len() {
        return Err(Error::InvalidParameter(format!("buffer length {len}, expected {}", src.len())).into());
    }
    std::ptr::copy_nonoverlapping(src.as_ptr(), out, len);
    Ok(())
}

/// Copies the radial nodes into `out` (`len` must equal the radial length).
#[no_mangle]
pub unsafe extern "C" fn abd_transform_radial_nodes(h: *const AbdTransform, out: *mut f64, len: usize) -> AbdStatus {
    guard(|| copy_out(h.as_ref().ok_or_else(null)?.plan.rgrid().nodes(), out, len))
}

/// Copies the radial quadrature weights (including the factor `r`).
#[no_mangle]
pub unsafe extern "C" fn abd_transform_radial_weights(h: *const AbdTransform, out: *mut f64, len: usize) -> AbdStatus {
    guard(|| copy_out(h.as_ref().ok_or_else(null)?.plan.rgrid().weights(), out, len))
}

/// Copies the energy nodes.
#[no_mangle]
pub unsafe extern "C" fn abd_transform_energy_nodes(h: *const AbdTransform, out: *mut f64, len: usize) -> AbdStatus {
    guard(|| copy_out(h.as_ref().ok_or_else(null)?.plan.egrid().nodes(), out, len))
}

unsafe fn read_complex(p: *const f64, n: usize) -> Result<Vec<Complex64>, Failure> {
    if p.is_null() {
        return Err(null());
    }
    let s = std::slice::from_raw_parts(p, 2 * n);
    Ok(s.chunks_exact(2).map(|c| Complex64::new(c[0], c[1])).collect())
}

unsafe fn write_complex(v: &[Complex64], p: *mut f64) -> Result<(), Failure> {
    if p.is_null() {
        return Err(null());
    }
    let s = std::slice::from_raw_parts_mut(p, 2 * v.len());
    for (c, z) in s.chunks_exact_mut(2).zip(v) {
        c[0] = z.re;
        c[1] = z.im;
    }
    Ok(())
}

unsafe fn read_spinor(t: &AbdTransform, f: *const f64, g: *const f64) -> Result<RadialSpinor, Failure> {
    let n = t.plan.rgrid().len();
    Ok(RadialSpinor::new(t.plan.rgrid().clone(), read_complex(f, n)?, read_complex(g, n)?)?)
}

/// Forward transform of `(f, g)` (radial length each) into the plus and
/// minus branches (energy length each).
#[no_mangle]
pub unsafe extern "C" fn abd_transform_forward(
    h: *const AbdTransform,
    f: *const f64,
    g: *const f64,
    plus: *mut f64,
    minus: *mut f64,
) -> AbdStatus {
    guard(|| {
        let t = h.as_ref().ok_or_else(null)?;
        let c = t.plan.forward(&read_spinor(t, f, g)?);
        write_complex(&c.plus, plus)?;
        write_complex(&c.minus, minus)
    })
}

/// Inverse transform of the branches `(plus, minus)` into `(f, g)`.
#[no_mangle]
pub unsafe extern "C" fn abd_transform_inverse(
    h: *const AbdTransform,
    plus: *const f64,
    minus: *const f64,
    f: *mut f64,
    g: *mut f64,
) -> AbdStatus {
    guard(|| {
        let t = h.as_ref().ok_or_else(null)?;
        let n = t.plan.egrid().len();
        let c = SpectralCoeff { grid: t.plan.egrid().clone(), plus: read_complex(plus, n)?, minus: read_complex(minus, n)? };
        let phi = t.plan.inverse(&c);
        write_complex(&phi.f, f)?;
        write_complex(&phi.g, g)
    })
}

/// `e^{−itD}` applied to `(f_in, g_in)`, written to `(f_out, g_out)`.
#[no_mangle]
pub unsafe extern "C" fn abd_transform_evolve(
    h: *const AbdTransform,
    t: f64,
    f_in: *const f64,
    g_in: *const f64,
    f_out: *mut f64,
    g_out: *mut f64,
) -> AbdStatus {
    guard(|| {
        let tr = h.as_ref().ok_or_else(null)?;
        if !t.is_finite() {
            return Err(Error::InvalidParameter("time must be finite".into()).into());
        }
        let u = evolve_spectral(&tr.plan, &read_spinor(tr, f_in, g_in)?, t, BranchConvention::Signed);
        write_complex(&u.f, f_out)?;
        write_complex(&u.g, g_out)
    })
}
