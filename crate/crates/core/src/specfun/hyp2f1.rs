use serde::{Deserialize, Serialize};

use super::gamma::{gamma_fn, gamma_ratio, rgamma};
use crate::{Error, Result};

/// Parameters `(a, b; c)` of the Gauss hypergeometric function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HypergeometricParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl HypergeometricParams {
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && c.is_finite()) {
            return Err(Error::HypergeometricParams(format!(
                "non-finite parameters ({a}, {b}; {c})"
            )));
        }
        if c <= 0.0 && c == c.round() {
            return Err(Error::HypergeometricParams(format!(
                "c = {c} is a nonpositive integer"
            )));
        }
        Ok(Self { a, b, c })
    }

    /// `c - a - b`; the series converges at `z = 1` iff this is positive.
    pub fn excess(&self) -> f64 {
        self.c - self.a - self.b
    }

    pub fn converges_at_one(&self) -> bool {
        self.excess() > 0.0
    }
}

const SERIES_LIMIT: f64 = 0.9;
const MAX_TERMS: usize = 200_000;

/// Plain power series, valid for `|z| < 1`.
fn series(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut small = 0;
    for n in 0..MAX_TERMS {
        let nf = n as f64;
        let ratio = (a + nf) * (b + nf) / ((c + nf) * (nf + 1.0));
        term *= ratio * z;
        sum += term;
        if term == 0.0 {
            return Ok(sum);
        }
        if term.abs() <= 1e-17 * sum.abs() && (ratio * z).abs() < 1.0 {
            small += 1;
            if small >= 3 {
                return Ok(sum);
            }
        } else {
            small = 0;
        }
    }
    Err(Error::NonConvergence(format!(
        "2F1({a}, {b}; {c}; {z}) series did not settle in {MAX_TERMS} terms"
    )))
}

/// Gauss hypergeometric function `2F1(a, b; c; z)` for `0 <= z < 1`.
///
/// The power series is summed directly up to `z = 0.9`; closer to one the
/// linear transformation to argument `1 - z` is applied. When `c - a - b` is
/// (numerically) an integer the two transformed terms are individually
/// singular; the value is then the symmetric average over `c ± eta`,
/// extrapolated in `eta^2` from two perturbation sizes.
pub fn gauss_2f1(p: HypergeometricParams, z: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&z) {
        return Err(Error::Domain(format!("2F1 argument z = {z} outside [0, 1)")));
    }
    if z == 0.0 {
        return Ok(1.0);
    }
    let HypergeometricParams { a, b, c } = p;
    if z <= SERIES_LIMIT {
        return series(a, b, c, z);
    }
    let s = c - a - b;
    if (s - s.round()).abs() < 1e-6 {
        let eta = 1e-4;
        let avg_at = |e: f64| -> Result<f64> {
            Ok(0.5 * (transformed(a, b, c + e, z)? + transformed(a, b, c - e, z)?))
        };
        let avg = (4.0 * avg_at(eta)? - avg_at(2.0 * eta)?) / 3.0;
        if !avg.is_finite() {
            return Err(Error::NonConvergence(format!(
                "2F1({a}, {b}; {c}; {z}) degenerate transformation failed"
            )));
        }
        return Ok(avg);
    }
    transformed(a, b, c, z)
}

fn transformed(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    let w = 1.0 - z;
    let s = c - a - b;
    let gc = gamma_fn(c)?;
    let a1 = gc * gamma_fn(s)? * rgamma(c - a) * rgamma(c - b);
    let a2 = gc * gamma_fn(-s)? * rgamma(a) * rgamma(b);
    let mut value = 0.0;
    if a1 != 0.0 {
        value += a1 * series(a, b, 1.0 - s, w)?;
    }
    if a2 != 0.0 {
        value += a2 * w.powf(s) * series(c - a, c - b, s + 1.0, w)?;
    }
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonConvergence(format!(
            "2F1({a}, {b}; {c}; {z}) transformation produced {value}"
        )))
    }
}

/// Gauss summation: `2F1(a, b; c; 1) = Γ(c) Γ(c-a-b) / (Γ(c-a) Γ(c-b))`,
/// defined when `c - a - b > 0`.
pub fn gauss_2f1_at_one(p: HypergeometricParams) -> Result<f64> {
    let s = p.excess();
    if s <= 0.0 {
        return Err(Error::DivergentAtOne(s));
    }
    gamma_ratio(&[p.c, s], &[p.c - p.a, p.c - p.b])
}
