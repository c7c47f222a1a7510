//! Fractional powers of the radial operator, their closed-form kernels and
//! the angular multiplier.
//!
//! The kernel of `|D_l|^p` (exponent `p` taken literally, as in
//! `∫ H(Er) H*(Es) E^{1+p} dE`) has the symmetric form `((F, G), (G, F))` with
//! `F = A + B`, `G = −A + B` and
//!
//! `A = (π/2) W(ν_f, ν_f, −1−p; r, s)`, `B = (π/2) W(ν_g, ν_g, −1−p; r, s)`,
//!
//! where `W` is the Weber–Schafheitlin integral. The closed form converges for
//! `−2 − 2 min(ν_f, ν_g) < p < 0`.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::grids::{EnergyGrid, RadialSpinor};
use crate::partialwave::ChannelSet;
use crate::quad::{richardson_halving, Rule};
use crate::specfun::{
    gamma_fn, gauss_2f1, gauss_2f1_at_one, rgamma, BesselJ, BesselOrder, HypergeometricParams,
};
use crate::spectral::{power_multiplier, BranchConvention, Channel, SpectralPlan};
use crate::{Error, Result};

/// Closed form of `∫₀^∞ J_ν(rt) J_μ(st) t^{−λ} dt` for `0 < r < s`
/// (and `r = s` when `λ > 0`).
pub fn weber_schafheitlin(nu: f64, mu: f64, lambda: f64, r: f64, s: f64) -> Result<f64> {
    if !(nu >= 0.0 && mu >= 0.0) {
        return Err(Error::Domain(format!("orders must be nonnegative, got ({nu}, {mu})")));
    }
    if nu + mu - lambda + 1.0 <= 0.0 {
        return Err(Error::Domain(format!(
            "need nu + mu - lambda + 1 > 0, got {}",
            nu + mu - lambda + 1.0
        )));
    }
    if lambda <= -1.0 {
        return Err(Error::Domain(format!("need lambda > -1, got {lambda}")));
    }
    if !(r > 0.0 && s > 0.0) {
        return Err(Error::Domain(format!("radii must be positive, got ({r}, {s})")));
    }
    if r > s {
        return Err(Error::Domain(format!(
            "closed form needs r <= s (got r = {r}, s = {s}); swap the roles of (nu, r) and (mu, s)"
        )));
    }
    let a = 0.5 * (nu + mu - lambda + 1.0);
    let b = 0.5 * (nu - mu - lambda + 1.0);
    let c = nu + 1.0;
    let p = HypergeometricParams::new(a, b, c)?;
    let hyp = if r == s {
        if lambda <= 0.0 {
            return Err(Error::Domain(format!(
                "r = s requires lambda > 0 for convergence, got {lambda}"
            )));
        }
        gauss_2f1_at_one(p)?
    } else {
        gauss_2f1(p, (r / s) * (r / s))?
    };
    let pref = r.powf(nu) * gamma_fn(a)? * rgamma(0.5 * (-nu + mu + lambda + 1.0)) * rgamma(c)
        / (2f64.powf(lambda) * s.powf(nu - lambda + 1.0));
    Ok(pref * hyp)
}

/// Entries of the kernel matrix `((F, G), (G, F))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelValue {
    pub f: f64,
    pub g: f64,
}

impl KernelValue {
    pub fn matrix(&self) -> [[f64; 2]; 2] {
        [[self.f, self.g], [self.g, self.f]]
    }

    /// Largest entrywise relative deviation from `other`, scaled by the
    /// larger entry of `other`.
    pub fn rel_diff(&self, other: &KernelValue) -> f64 {
        let scale = other.f.abs().max(other.g.abs());
        (self.f - other.f).abs().max((self.g - other.g).abs()) / scale
    }
}

/// The two Bessel-pair contributions, with `F = A + B` and `G = −A + B`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelABParts {
    pub a: f64,
    pub b: f64,
}

impl KernelABParts {
    pub fn value(&self) -> KernelValue {
        KernelValue { f: self.a + self.b, g: -self.a + self.b }
    }
}

/// Open interval of exponents `p` for which the closed-form kernel exists.
pub fn kernel_exponent_range(ch: Channel) -> (f64, f64) {
    (-2.0 - 2.0 * ch.nu_f().min(ch.nu_g()), 0.0)
}

/// Closed-form `A` and `B` of the kernel of `|D_l|^p` at `(r, s)`. The kernel
/// is symmetric in `(r, s)`, so `r > s` is evaluated with the roles swapped.
pub fn kernel_parts(ch: Channel, p: f64, r: f64, s: f64) -> Result<KernelABParts> {
    let (lo, hi) = kernel_exponent_range(ch);
    if !(p > lo && p < hi) {
        return Err(Error::InvalidParameter(format!(
            "kernel exponent {p} outside the convergent range ({lo}, {hi})"
        )));
    }
    let (r, s) = if r <= s { (r, s) } else { (s, r) };
    let lambda = -1.0 - p;
    let a = 0.5 * PI * weber_schafheitlin(ch.nu_f(), ch.nu_f(), lambda, r, s)?;
    let b = 0.5 * PI * weber_schafheitlin(ch.nu_g(), ch.nu_g(), lambda, r, s)?;
    Ok(KernelABParts { a, b })
}

pub fn kernel_closed_form(ch: Channel, p: f64, r: f64, s: f64) -> Result<KernelValue> {
    kernel_parts(ch, p, r, s).map(|k| k.value())
}

/// Outcome of a damped-and-extrapolated oscillatory integral.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Extrapolated {
    pub value: f64,
    pub error_estimate: f64,
    /// Raw damped values, one per damping parameter.
    pub raw: Vec<f64>,
}

/// `∫₀^{t_max} h(t) e^{−δt} dt` for each `δ` in `deltas` (given as `δ, δ/2,
/// δ/4, ...`) and the Richardson limit `δ → 0`. `freq` is the largest angular
/// frequency of `h`; panels are half a period wide and graded towards `t = 0`
/// for weakly singular integrands. A single `δ = 0` gives the raw integral.
pub fn damped_integral<const N: usize>(
    h: impl Fn(f64) -> [f64; N],
    freq: f64,
    t_max: f64,
    deltas: &[f64],
) -> [Extrapolated; N] {
    let panel = PI / freq.max(1e-3);
    let first = panel.min(1.0).min(t_max);
    let rule = Rule::graded_from_zero(first, t_max, 40, panel, 8);
    let mut sums = vec![[0.0; N]; deltas.len()];
    for (&t, &w) in rule.nodes.iter().zip(&rule.weights) {
        let v = h(t);
        for (d, acc) in deltas.iter().zip(sums.iter_mut()) {
            let damp = w * (-d * t).exp();
            for i in 0..N {
                acc[i] += damp * v[i];
            }
        }
    }
    std::array::from_fn(|i| {
        let raw: Vec<f64> = sums.iter().map(|s| s[i]).collect();
        let (value, error_estimate) = richardson_halving(&raw);
        Extrapolated { value, error_estimate: if raw.len() > 1 { error_estimate } else { 0.0 }, raw }
    })
}

/// Quadrature evaluation of the kernel entries, independent of the closed
/// form.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KernelQuadrature {
    pub value: KernelValue,
    pub error_estimate: f64,
    pub converged: bool,
}

/// `∫₀^{e_max} H(Er) H*(Es) E^{1+p} e^{−δE} dE` entrywise, with `δ ∈ {4δ₀,
/// 2δ₀, δ₀}` extrapolated to zero; `δ₀ = 0` integrates without damping.
pub fn kernel_quadrature(
    ch: Channel,
    p: f64,
    r: f64,
    s: f64,
    e_max: f64,
    delta: f64,
) -> Result<KernelQuadrature> {
    if r == s {
        return Err(Error::InvalidParameter("kernel quadrature needs r != s".into()));
    }
    if !(e_max > 0.0 && delta >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need e_max > 0 and delta >= 0, got ({e_max}, {delta})"
        )));
    }
    let deltas: Vec<f64> =
        if delta == 0.0 { vec![0.0] } else { vec![4.0 * delta, 2.0 * delta, delta] };
    let bf = BesselJ::new(BesselOrder::new(ch.nu_f())?);
    let bg = BesselJ::new(BesselOrder::new(ch.nu_g())?);
    let amp = 0.5 * PI;
    let [f, g] = damped_integral(
        |e| {
            let m = e.powf(1.0 + p) * amp;
            let a = bf.eval(e * r) * bf.eval(e * s) * m;
            let b = bg.eval(e * r) * bg.eval(e * s) * m;
            [a + b, -a + b]
        },
        r + s,
        e_max,
        &deltas,
    );
    let value = KernelValue { f: f.value, g: g.value };
    let scale = value.f.abs().max(value.g.abs()).max(f64::MIN_POSITIVE);
    let error_estimate = f.error_estimate.max(g.error_estimate) / scale;
    Ok(KernelQuadrature { value, error_estimate, converged: error_estimate < 1e-2 })
}

/// `D^γ φ` through the transform: `E^γ` on the plus branch and, depending on
/// `convention`, `E^γ` (giving `|D|^γ`) or `(−E)^γ` on the minus branch.
pub fn apply_fractional_power(
    plan: &SpectralPlan,
    gamma: f64,
    phi: &RadialSpinor,
    convention: BranchConvention,
) -> RadialSpinor {
    plan.apply_function(phi, convention, |e| power_multiplier(convention, gamma, e))
}

/// One-shot variant of [`apply_fractional_power`] for `|D|^γ`.
pub fn fractional_power(
    ch: Channel,
    gamma: f64,
    phi: &RadialSpinor,
    eg: Arc<EnergyGrid>,
) -> RadialSpinor {
    let plan = SpectralPlan::new(ch, phi.grid.clone(), eg);
    apply_fractional_power(&plan, gamma, phi, BranchConvention::Uniform)
}

/// `Λ_ω^s` with `Λ_ω = √(1 − Δ_ω)`: scales `f_l` by `(1 + l²)^{s/2}` and
/// `g_l` by `(1 + (l+1)²)^{s/2}`.
pub fn angular_multiplier(s: f64, set: &ChannelSet) -> ChannelSet {
    set.map(|l, spinor| {
        let mf = (1.0 + (l as f64).powi(2)).powf(0.5 * s);
        let mg = (1.0 + ((l + 1) as f64).powi(2)).powf(0.5 * s);
        RadialSpinor {
            grid: spinor.grid.clone(),
            f: spinor.f.iter().map(|z| z * mf).collect(),
            g: spinor.g.iter().map(|z| z * mg).collect(),
        }
    })
}

#[cfg(test)]
mod tests {
    use std::f64::consts::FRAC_1_SQRT_2;

    use num_complex::Complex64;

    use super::*;

    #[test]
    fn hypergeometric_factor_at_equal_radii() {
        let v = weber_schafheitlin(1.0, 1.0, 0.5, 2.0, 2.0).unwrap();
        let near = weber_schafheitlin(1.0, 1.0, 0.5, 2.0 - 1e-7, 2.0).unwrap();
        assert!(((v - near) / v).abs() < 1e-3);
    }

    #[test]
    fn preconditions_are_enforced() {
        assert!(weber_schafheitlin(1.0, 1.0, 0.5, 2.0, 1.0).is_err());
        assert!(weber_schafheitlin(1.0, 1.0, -1.5, 1.0, 2.0).is_err());
        assert!(weber_schafheitlin(0.0, 0.0, 1.5, 1.0, 2.0).is_err());
        assert!(weber_schafheitlin(1.0, 1.0, -0.5, 2.0, 2.0).is_err());
    }

    #[test]
    fn small_radius_scaling() {
        let a = weber_schafheitlin(1.5, 1.5, 0.4, 1e-4, 1.0).unwrap();
        let b = weber_schafheitlin(1.5, 1.5, 0.4, 2e-4, 1.0).unwrap();
        assert!((b / a - 2f64.powf(1.5)).abs() < 1e-6);
    }

    #[test]
    fn kernel_parts_algebra() {
        let ch = Channel::new(0, 0.3).unwrap();
        let k = kernel_parts(ch, -0.6, 0.8, 2.5).unwrap();
        let v = k.value();
        assert!((v.f - v.g - 2.0 * k.a).abs() < 1e-14);
        assert!((v.f + v.g - 2.0 * k.b).abs() < 1e-14);
        let swapped = kernel_closed_form(ch, -0.6, 2.5, 0.8).unwrap();
        assert_eq!(swapped, v);
    }

    #[test]
    fn diagonal_weight_scaling() {
        let ch = Channel::new(1, 0.5).unwrap();
        let gamma = 0.9;
        let at = |t: f64| kernel_parts(ch, -2.0 * gamma, t, t).unwrap();
        let (k1, k2) = (at(1.0), at(3.0));
        let expect = 3f64.powf(2.0 * gamma - 2.0);
        assert!((k2.a / k1.a - expect).abs() < 1e-12);
        assert!((k2.b / k1.b - expect).abs() < 1e-12);
    }

    #[test]
    fn angular_multiplier_composes() {
        use crate::grids::{GridSpec, RadialGrid};
        let g = Arc::new(RadialGrid::new(GridSpec::composite(1.0, 16)).unwrap());
        let s = RadialSpinor::from_fn(g.clone(), |r| (Complex64::new(r, 1.0), Complex64::new(1.0, -r)));
        let set = ChannelSet::from_channels(g, [(-1, s.clone()), (1, s)]).unwrap();
        let once = angular_multiplier(0.7, &angular_multiplier(-0.3, &set));
        let direct = angular_multiplier(0.4, &set);
        for l in [-1, 0, 1] {
            assert!(once.get(l).unwrap().rel_diff(direct.get(l).unwrap()) < 1e-14);
        }
        let half = angular_multiplier(-1.0, &set);
        let ratio = half.get(1).unwrap().f[3] / set.get(1).unwrap().f[3];
        assert!((ratio.re - FRAC_1_SQRT_2).abs() < 1e-15);
    }
}
