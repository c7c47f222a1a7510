use std::f64::consts::PI;

use crate::{Error, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x == x.round()
}

fn lanczos_sum(x: f64) -> f64 {
    // x is the shifted argument (Gamma(x + 1))
    let mut t = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        t += c / (x + i as f64);
    }
    t
}

/// Gamma function for real arguments.
///
/// Lanczos approximation for `x >= 1/2`, reflection below. Poles at the
/// nonpositive integers are reported as errors.
pub fn gamma_fn(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::Domain(format!("gamma of non-finite argument {x}")));
    }
    if is_nonpositive_integer(x) {
        return Err(Error::GammaPole(x));
    }
    Ok(gamma_unchecked(x))
}

fn gamma_unchecked(x: f64) -> f64 {
    if x < 0.5 {
        return PI / ((PI * x).sin() * gamma_unchecked(1.0 - x));
    }
    if x == x.round() && x <= 171.0 {
        // exact factorials for small integers
        let mut p = 1.0;
        let mut k = 2.0;
        while k < x {
            p *= k;
            k += 1.0;
        }
        return p;
    }
    if x > 140.0 {
        return ln_gamma_positive(x).exp();
    }
    let xm = x - 1.0;
    let t = xm + LANCZOS_G + 0.5;
    // split the power to delay overflow
    let half = t.powf(0.5 * (xm + 0.5));
    (2.0 * PI).sqrt() * half * (half * (-t).exp()) * lanczos_sum(xm)
}

pub fn ln_gamma_positive(x: f64) -> f64 {
    if x < 0.5 {
        return (PI / (PI * x).sin().abs()).ln() - ln_gamma_positive(1.0 - x);
    }
    let xm = x - 1.0;
    let t = xm + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (xm + 0.5) * t.ln() - t + lanczos_sum(xm).ln()
}

/// `ln |Gamma(x)|` together with the sign of `Gamma(x)`.
pub fn ln_gamma_signed(x: f64) -> Result<(f64, f64)> {
    if is_nonpositive_integer(x) {
        return Err(Error::GammaPole(x));
    }
    if x > 0.0 {
        return Ok((ln_gamma_positive(x), 1.0));
    }
    // reflection: Gamma(x) Gamma(1-x) = pi / sin(pi x)
    let s = (PI * x).sin();
    let ln = (PI / s.abs()).ln() - ln_gamma_positive(1.0 - x);
    Ok((ln, s.signum()))
}

/// Reciprocal Gamma function, zero at the poles of Gamma.
pub fn rgamma(x: f64) -> f64 {
    if is_nonpositive_integer(x) {
        0.0
    } else if x > 140.0 {
        (-ln_gamma_positive(x)).exp()
    } else {
        1.0 / gamma_unchecked(x)
    }
}

/// Ratio `prod Gamma(num) / prod Gamma(den)` evaluated in log space.
///
/// Poles in the denominator make the ratio vanish; a pole in the numerator
/// is an error.
pub fn gamma_ratio(num: &[f64], den: &[f64]) -> Result<f64> {
    if den.iter().any(|&d| is_nonpositive_integer(d)) {
        for &n in num {
            if is_nonpositive_integer(n) {
                return Err(Error::GammaPole(n));
            }
        }
        return Ok(0.0);
    }
    let mut ln = 0.0;
    let mut sign = 1.0;
    for &n in num {
        let (l, s) = ln_gamma_signed(n)?;
        ln += l;
        sign *= s;
    }
    for &d in den {
        let (l, s) = ln_gamma_signed(d)?;
        ln -= l;
        sign *= s;
    }
    Ok(sign * ln.exp())
}

/// Pochhammer symbol `(q)_n = q (q+1) ... (q+n-1)`.
pub fn pochhammer(q: f64, n: u32) -> f64 {
    (0..n).fold(1.0, |acc, k| acc * (q + k as f64))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factorials() {
        assert_eq!(gamma_fn(1.0).unwrap(), 1.0);
        assert_eq!(gamma_fn(5.0).unwrap(), 24.0);
        assert!((gamma_fn(11.0).unwrap() - 3_628_800.0).abs() < 1e-6);
    }

    #[test]
    fn half_integer_values() {
        let sqrt_pi = PI.sqrt();
        assert!((gamma_fn(0.5).unwrap() - sqrt_pi).abs() < 1e-14);
        assert!((gamma_fn(1.5).unwrap() - 0.5 * sqrt_pi).abs() < 1e-14);
        assert!((gamma_fn(-0.5).unwrap() + 2.0 * sqrt_pi).abs() < 1e-13);
    }

    #[test]
    fn poles_are_errors() {
        for x in [0.0, -1.0, -2.0, -17.0] {
            assert_eq!(gamma_fn(x), Err(Error::GammaPole(x)));
        }
        assert_eq!(rgamma(-3.0), 0.0);
    }

    #[test]
    fn recurrence_holds_over_range() {
        let mut x = 0.013;
        while x < 49.0 {
            let lhs = gamma_fn(x + 1.0).unwrap();
            let rhs = x * gamma_fn(x).unwrap();
            assert!(((lhs - rhs) / lhs).abs() < 1e-13, "x = {x}");
            x += 0.377;
        }
    }

    #[test]
    fn log_gamma_agrees_with_gamma() {
        for x in [0.3, 2.7, 12.25, 44.0, -2.5, -0.3] {
            let (ln, s) = ln_gamma_signed(x).unwrap();
            let g = gamma_fn(x).unwrap();
            assert!(((s * ln.exp() - g) / g).abs() < 1e-12, "x = {x}");
        }
    }

    #[test]
    fn ratio_with_denominator_pole_vanishes() {
        assert_eq!(gamma_ratio(&[2.5], &[-1.0]).unwrap(), 0.0);
        let r = gamma_ratio(&[3.0, 0.5], &[1.5]).unwrap();
        assert!((r - 4.0).abs() < 1e-13);
    }

    #[test]
    fn pochhammer_matches_gamma_ratio() {
        let q = 0.37;
        let direct = pochhammer(q, 6);
        let via_gamma = gamma_fn(q + 6.0).unwrap() / gamma_fn(q).unwrap();
        assert!(((direct - via_gamma) / direct).abs() < 1e-13);
    }
}
