use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::gamma::rgamma;
use crate::{Error, Result};

/// Nonnegative real order of a Bessel function.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct BesselOrder(f64);

impl BesselOrder {
    pub fn new(nu: f64) -> Result<Self> {
        if nu.is_finite() && nu >= 0.0 {
            Ok(Self(nu))
        } else {
            Err(Error::Domain(format!("Bessel order must be finite and >= 0, got {nu}")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for BesselOrder {
    type Error = Error;
    fn try_from(nu: f64) -> Result<Self> {
        Self::new(nu)
    }
}

impl From<BesselOrder> for f64 {
    fn from(o: BesselOrder) -> f64 {
        o.0
    }
}

/// Below this argument the power series is used.
const SERIES_CUTOFF: f64 = 12.0;
const ASYMPTOTIC_TERMS: usize = 60;

/// Coefficients `a_k(mu) = prod_{j<=k} (4 mu^2 - (2j-1)^2) / (k! 8^k)` of
/// the Hankel expansion.
#[derive(Debug, Clone)]
struct HankelCoeffs {
    mu: f64,
    a: Vec<f64>,
}

impl HankelCoeffs {
    fn new(mu: f64) -> Self {
        let m4 = 4.0 * mu * mu;
        let mut a = Vec::with_capacity(ASYMPTOTIC_TERMS);
        let mut c = 1.0;
        a.push(c);
        for k in 1..ASYMPTOTIC_TERMS {
            let odd = (2 * k - 1) as f64;
            c *= (m4 - odd * odd) / (8.0 * k as f64);
            a.push(c);
        }
        Self { mu, a }
    }

    /// `(P, Q)` sums; stops at the smallest term of the asymptotic series.
    fn pq(&self, x: f64) -> (f64, f64) {
        let y = 1.0 / x;
        let mut p = 1.0;
        let mut q = 0.0;
        let mut yk = 1.0;
        let mut prev = f64::INFINITY;
        for k in 1..self.a.len() {
            yk *= y;
            let t = self.a[k] * yk;
            let mag = t.abs();
            if mag == 0.0 {
                break;
            }
            if mag > prev {
                break;
            }
            // signs: P = a0 - a2/x^2 + a4/x^4 ..., Q = a1/x - a3/x^3 + ...
            let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
            if k % 2 == 0 {
                p += sign * t;
            } else {
                q += sign * t;
            }
            if mag < 1e-17 {
                break;
            }
            prev = mag;
        }
        (p, q)
    }

    fn eval_with(&self, x: f64, sin_chi: f64, cos_chi: f64) -> f64 {
        let (p, q) = self.pq(x);
        (2.0 / (PI * x)).sqrt() * (p * cos_chi - q * sin_chi)
    }
}

/// Evaluator for `J_nu` at a fixed order, with the order-dependent constants
/// precomputed. Cheap to clone and `Sync`, so a single instance can fill a
/// whole matrix of arguments.
///
/// * `x < 12`: power series.
/// * `x >= 12`: Hankel expansion at the two lowest orders `nu0 = frac(nu)`
///   and `nu0 + 1`, then forward recurrence when `nu <= x`, or Miller's
///   backward recurrence normalized against those two values when `nu > x`.
#[derive(Debug, Clone)]
pub struct BesselJ {
    nu: f64,
    base: f64,
    steps: usize,
    rgamma_nu1: f64,
    rgamma_nu2: f64,
    low: HankelCoeffs,
    high: HankelCoeffs,
}

impl BesselJ {
    pub fn new(order: BesselOrder) -> Self {
        let nu = order.value();
        let steps = nu.floor() as usize;
        let base = nu - steps as f64;
        Self {
            nu,
            base,
            steps,
            rgamma_nu1: rgamma(nu + 1.0),
            rgamma_nu2: rgamma(nu + 2.0),
            low: HankelCoeffs::new(base),
            high: HankelCoeffs::new(base + 1.0),
        }
    }

    pub fn order(&self) -> f64 {
        self.nu
    }

    /// `J_nu(x)` for `x >= 0`; NaN for negative or non-finite arguments.
    pub fn eval(&self, x: f64) -> f64 {
        self.eval_with_next(x).0
    }

    /// `(J_nu(x), J_{nu+1}(x))`.
    pub fn eval_with_next(&self, x: f64) -> (f64, f64) {
        if !(x >= 0.0) || !x.is_finite() {
            return (f64::NAN, f64::NAN);
        }
        if x == 0.0 {
            return (if self.nu == 0.0 { 1.0 } else { 0.0 }, 0.0);
        }
        if x < SERIES_CUTOFF {
            return (
                series(self.nu, x, self.rgamma_nu1),
                series(self.nu + 1.0, x, self.rgamma_nu2),
            );
        }
        let (j0, j1) = self.lowest_pair(x);
        if self.nu + 1.0 <= x {
            let mut prev = j0;
            let mut cur = j1;
            for k in 1..=self.steps {
                let next = 2.0 * (self.base + k as f64) / x * cur - prev;
                prev = cur;
                cur = next;
            }
            (prev, cur)
        } else {
            self.miller(x, j0, j1)
        }
    }

    fn lowest_pair(&self, x: f64) -> (f64, f64) {
        let chi = x - (0.5 * self.low.mu + 0.25) * PI;
        let (s, c) = chi.sin_cos();
        // chi(mu + 1) = chi(mu) - pi/2
        let j0 = self.low.eval_with(x, s, c);
        let j1 = self.high.eval_with(x, -c, s);
        (j0, j1)
    }

    fn miller(&self, x: f64, j0: f64, j1: f64) -> (f64, f64) {
        let start = self.steps + 40 + x.ceil() as usize;
        let mut above = 0.0;
        let mut cur = 1e-30;
        let mut at_nu = 0.0;
        let mut at_nu1 = 0.0;
        let mut k = start;
        while k > 0 {
            let below = 2.0 * (self.base + k as f64) / x * cur - above;
            above = cur;
            cur = below;
            k -= 1;
            // now `cur` is order base + k, `above` is order base + k + 1
            if k == self.steps {
                at_nu = cur;
                at_nu1 = above;
            }
            if cur.abs() > 1e200 {
                cur *= 1e-200;
                above *= 1e-200;
                at_nu *= 1e-200;
                at_nu1 *= 1e-200;
            }
        }
        if self.steps == 0 {
            at_nu = cur;
            at_nu1 = above;
        }
        // least-squares scale against the two accurately known low orders
        let scale = (j0 * cur + j1 * above) / (cur * cur + above * above);
        (scale * at_nu, scale * at_nu1)
    }
}

fn series(nu: f64, x: f64, rgamma_nu1: f64) -> f64 {
    let half = 0.5 * x;
    let q = -half * half;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    loop {
        term *= q / (k * (nu + k));
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() && k > half {
            break;
        }
        k += 1.0;
        if k > 500.0 {
            break;
        }
    }
    let prefactor = if nu == 0.0 { 1.0 } else { half.powf(nu) };
    prefactor * rgamma_nu1 * sum
}

/// Bessel function of the first kind `J_nu(x)` for `nu >= 0`, `x >= 0`.
pub fn bessel_j(order: BesselOrder, x: f64) -> f64 {
    BesselJ::new(order).eval(x)
}

/// `J_{1/2}(x) = sqrt(2/(pi x)) sin x`, used as a closed-form reference.
pub fn bessel_j_half(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        (2.0 / (PI * x)).sqrt() * x.sin()
    }
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::gamma_fn;

    fn j(nu: f64, x: f64) -> f64 {
        bessel_j(BesselOrder::new(nu).unwrap(), x)
    }

    #[test]
    fn values_at_origin() {
        assert_eq!(j(0.0, 0.0), 1.0);
        assert_eq!(j(1.0, 0.0), 0.0);
        assert_eq!(j(0.3, 0.0), 0.0);
    }

    #[test]
    fn half_order_closed_form() {
        assert!((j(0.5, 1.0) - 0.671_396_707_141_803_1).abs() < 1e-14);
        for x in [0.1, 3.0, 11.99, 12.0, 12.01, 25.0, 80.0, 1500.0] {
            assert!((j(0.5, x) - bessel_j_half(x)).abs() < 1e-12, "x={x}");
        }
        // J_{3/2}(x) = sin x / x^2 - cos x / x, scaled
        for x in [0.5, 7.0, 13.0, 44.0, 400.0] {
            let exact = (2.0 / (PI * x)).sqrt() * (x.sin() / x - x.cos());
            assert!((j(1.5, x) - exact).abs() < 1e-12, "x={x}");
        }
    }

    #[test]
    fn integer_order_reference_values() {
        // tabulated values
        assert!((j(0.0, 1.0) - 0.765_197_686_557_966_6).abs() < 1e-14);
        assert!((j(1.0, 10.0) - 0.043_472_746_168_861_44).abs() < 1e-13);
        assert!((j(0.0, 20.0) - 0.167_024_664_340_583_1).abs() < 1e-13);
        assert!((j(5.0, 30.0) - (-0.143_240_295_512_077_08)).abs() < 1e-12);
        assert!((j(30.0, 20.0) - 1.240_153_636_035_432_8e-4).abs() < 1e-14);
    }

    #[test]
    fn recurrence_across_method_boundaries() {
        for &x in &[11.5, 12.0, 12.5, 19.0, 29.5, 31.0, 49.0] {
            for &nu in &[0.2, 1.7, 9.3, 12.4, 28.6] {
                let lhs = j(nu, x) + j(nu + 2.0, x);
                let rhs = 2.0 * (nu + 1.0) / x * j(nu + 1.0, x);
                assert!((lhs - rhs).abs() < 1e-11, "nu={nu} x={x}");
            }
        }
    }

    #[test]
    fn small_argument_law() {
        for &nu in &[0.0f64, 0.4, 2.5, 7.0] {
            let x = 1e-4 * (1.0 + nu);
            let law = (0.5 * x).powf(nu) / gamma_fn(1.0 + nu).unwrap();
            assert!(((j(nu, x) - law) / law).abs() < 1e-7);
        }
    }

    #[test]
    fn pair_evaluation_consistent() {
        let ev = BesselJ::new(BesselOrder::new(2.3).unwrap());
        for x in [0.7, 12.0, 40.0, 900.0] {
            let (a, b) = ev.eval_with_next(x);
            assert!((a - j(2.3, x)).abs() < 1e-14);
            assert!((b - j(3.3, x)).abs() < 1e-13);
        }
    }

    #[test]
    fn negative_argument_is_nan() {
        assert!(j(1.0, -1.0).is_nan());
        assert!(BesselOrder::new(-0.5).is_err());
    }
}
