//! Numerical checks of the dispersive estimates for the Aharonov–Bohm Dirac
//! flow: local smoothing and its endpoint, Kato–Smith–Sogge type growth,
//! weighted Strichartz and Sobolev trace bounds, the Bessel averages behind
//! them and the identity `‖D_A f‖ = ‖∇_A f‖`.
//!
//! Every check returns an [`EstimateReport`]. Reports are deterministic for a
//! fixed configuration and seed.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_1_PI, PI};
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::invalid;
use crate::fracpow::angular_multiplier;
use crate::grids::{EnergyGrid, GridSpec, RadialGrid, RadialSpinor};
use crate::partialwave::{magnetic_gradient_norm, ChannelSet};
use crate::propagator::{trapezoid, PlanSet};
use crate::quad::{loglog_slope, Rule};
use crate::specfun::{gamma_ratio, BesselJ, BesselOrder};
use crate::spectral::{apply_radial_dirac, BranchConvention, Channel, SpectralCoeff, SpectralPlan};
use crate::{Error, Result};

/// Outcome of one numerical check.
///
/// When `ratio` is present the check passes exactly when
/// `ratio ≤ 1 + tolerance`. Checks without a reference bound (boundedness
/// over a sample) leave `bound` and `ratio` empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub name: String,
    pub lhs: f64,
    pub bound: Option<f64>,
    pub ratio: Option<f64>,
    pub tolerance: f64,
    pub pass: bool,
    pub details: BTreeMap<String, f64>,
    pub series: BTreeMap<String, Vec<f64>>,
    pub notes: Vec<String>,
    pub metadata: serde_json::Value,
}

impl EstimateReport {
    fn new(name: &str, tolerance: f64, metadata: serde_json::Value) -> Self {
        Self {
            name: name.to_string(),
            lhs: 0.0,
            bound: None,
            ratio: None,
            tolerance,
            pass: true,
            details: BTreeMap::new(),
            series: BTreeMap::new(),
            notes: Vec::new(),
            metadata,
        }
    }

    fn set_ratio(&mut self, lhs: f64, bound: f64) {
        self.lhs = lhs;
        self.bound = Some(bound);
        let ratio = if lhs == 0.0 { 0.0 } else { lhs / bound };
        self.ratio = Some(ratio);
        self.pass = ratio <= 1.0 + self.tolerance;
    }
}

fn to_metadata<T: Serialize>(cfg: &T) -> serde_json::Value {
    serde_json::to_value(cfg).unwrap_or(serde_json::Value::Null)
}

// ---------------------------------------------------------------------------
// constants

/// Admissible interval `(1/2, 1 + |l+α|)` for the smoothing exponent.
pub fn smoothing_range(alpha: f64, l: i32) -> (f64, f64) {
    (0.5, 1.0 + (l as f64 + alpha).abs())
}

/// The explicit smoothing constant
/// `πΓ(2γ−1)/(2^{2γ}Γ(γ)²) [Γ(ν−γ+1)/Γ(ν+γ) + Γ(ν−γ+2)/Γ(ν+γ+1)]`
/// with `ν = |l+α|`.
pub fn smoothing_constant(gamma: f64, alpha: f64, l: i32) -> Result<f64> {
    let (lo, hi) = smoothing_range(alpha, l);
    if !(gamma > lo && gamma < hi) {
        return Err(invalid(format!("smoothing exponent {gamma} outside ({lo}, {hi})")));
    }
    let nu = (l as f64 + alpha).abs();
    let pre = PI * gamma_ratio(&[2.0 * gamma - 1.0], &[gamma, gamma])? / 2f64.powf(2.0 * gamma);
    let a = gamma_ratio(&[nu - gamma + 1.0], &[nu + gamma])?;
    let b = gamma_ratio(&[nu - gamma + 2.0], &[nu + gamma + 1.0])?;
    Ok(pre * (a + b))
}

/// `∫₀^∞ x^{1−2γ} J_ν(x)² dx`.
pub fn weighted_bessel_square_integral(nu: f64, gamma: f64) -> Result<f64> {
    if !(gamma > 0.5 && gamma < nu + 1.0) {
        return Err(invalid(format!("integral diverges for γ = {gamma}, ν = {nu}")));
    }
    Ok(gamma_ratio(&[2.0 * gamma - 1.0, nu + 1.0 - gamma], &[gamma, gamma, nu + gamma])?
        / 2f64.powf(2.0 * gamma - 1.0))
}

/// Exact value of `‖|x|^{−γ}|D|^{1/2−γ}u‖²_{L²_t L²_x} / ‖f‖²` for data in
/// channel `ch`: the ratio does not depend on `f`.
pub fn sharp_smoothing_constant(gamma: f64, ch: Channel) -> Result<f64> {
    Ok(PI
        * (weighted_bessel_square_integral(ch.nu_f(), gamma)?
            + weighted_bessel_square_integral(ch.nu_g(), gamma)?))
}

/// Distance from `α` to the nearest integer.
pub fn mu0(alpha: f64) -> f64 {
    (alpha - alpha.round()).abs().clamp(0.0, 0.5)
}

// ---------------------------------------------------------------------------
// sample data

/// Gaussian bump `e^{−(r−r₀)²/(2σ²)}` with complex amplitudes per component.
pub fn bump(grid: Arc<RadialGrid>, r0: f64, sigma: f64, af: Complex64, ag: Complex64) -> RadialSpinor {
    RadialSpinor::from_fn(grid, |r| {
        let b = (-(r - r0).powi(2) / (2.0 * sigma * sigma)).exp();
        (af * b, ag * b)
    })
}

fn random_amplitude(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

fn random_bump(rng: &mut ChaCha8Rng, grid: &Arc<RadialGrid>) -> RadialSpinor {
    let r0 = rng.gen_range(3.0..15.0);
    let sigma = rng.gen_range(0.5..2.0);
    let af = random_amplitude(rng);
    let ag = random_amplitude(rng);
    bump(grid.clone(), r0, sigma, af, ag)
}

/// `n` random bumps with `r₀ ∈ [3, 15]`, `σ ∈ [0.5, 2]`.
pub fn random_bumps(grid: Arc<RadialGrid>, n: usize, seed: u64) -> Vec<RadialSpinor> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| random_bump(&mut rng, &grid)).collect()
}

/// One random bump per channel in `l_min..=l_max`.
pub fn random_channel_set(grid: Arc<RadialGrid>, l_min: i32, l_max: i32, seed: u64) -> Result<ChannelSet> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ChannelSet::from_channels(grid.clone(), (l_min..=l_max).map(|l| (l, random_bump(&mut rng, &grid))))
}

/// Channel-regular Gaussian `(r^{ν_f}, i r^{ν_g}) e^{−r²/(2σ²)}`.
pub fn regular_gaussian(grid: Arc<RadialGrid>, ch: Channel, sigma: f64) -> RadialSpinor {
    let (nf, ng) = (ch.nu_f(), ch.nu_g());
    RadialSpinor::from_fn(grid, |r| {
        let e = (-r * r / (2.0 * sigma * sigma)).exp();
        (Complex64::new(r.powf(nf) * e, 0.0), Complex64::new(0.0, r.powf(ng) * e))
    })
}

// ---------------------------------------------------------------------------
// streaming evolution

const CHUNK: usize = 64;

/// For each time, `Σ_j w_j W(r_j) (|f(t,r_j)|² + |g(t,r_j)|²)` where `u(t)` is
/// the evolution of the coefficients `c` and `weights[j] = w_j W(r_j)`.
fn evolved_densities(plan: &SpectralPlan, c: &SpectralCoeff, times: &[f64], weights: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(times.len());
    for chunk in times.chunks(CHUNK) {
        let cs: Vec<SpectralCoeff> = chunk.iter().map(|&t| evolve(c, t)).collect();
        for u in plan.inverse_batch(&cs) {
            out.push(
                (0..weights.len())
                    .map(|j| weights[j] * (u.f[j].norm_sqr() + u.g[j].norm_sqr()))
                    .sum(),
            );
        }
    }
    out
}

fn evolve(c: &SpectralCoeff, t: f64) -> SpectralCoeff {
    c.apply_function(BranchConvention::Signed, |e| {
        (Complex64::from_polar(1.0, -e * t), Complex64::from_polar(1.0, e * t))
    })
}

fn symmetric_times(t_max: f64, dt: f64) -> Vec<f64> {
    let n = (t_max / dt).round().max(1.0) as usize;
    (0..=2 * n).map(|i| -t_max + 2.0 * t_max * i as f64 / (2 * n) as f64).collect()
}

// ---------------------------------------------------------------------------
// local smoothing

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SmoothingConfig {
    pub alpha: f64,
    pub l: i32,
    pub gamma: f64,
    pub samples: usize,
    pub seed: u64,
    pub radial: GridSpec,
    pub energy: GridSpec,
    /// Half-width `T` of the window `[−T, T]` of the time-domain route.
    pub time_window: f64,
    pub dt: f64,
    /// How many samples also go through the time-domain route.
    pub time_route_samples: usize,
}

impl Default for SmoothingConfig {
    fn default() -> Self {
        Self {
            alpha: 0.4,
            l: 0,
            gamma: 0.9,
            samples: 20,
            seed: 42,
            radial: GridSpec::composite(80.0, 4000),
            energy: GridSpec::composite(16.0, 1024),
            time_window: 50.0,
            dt: 0.1,
            time_route_samples: 1,
        }
    }
}

impl SmoothingConfig {
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = smoothing_range(self.alpha, self.l);
        if !(self.gamma > lo && self.gamma < hi) {
            return Err(invalid(format!("gamma = {} outside ({lo}, {hi})", self.gamma)));
        }
        if !(self.time_window > 0.0 && self.dt > 0.0) {
            return Err(invalid("time window and step must be positive"));
        }
        Channel::new(self.l, self.alpha)?;
        Ok(())
    }
}

/// Local smoothing with random bump data, see [`verify_local_smoothing_with`].
pub fn verify_local_smoothing(cfg: &SmoothingConfig) -> Result<EstimateReport> {
    cfg.validate()?;
    let rg = Arc::new(RadialGrid::new(cfg.radial)?);
    verify_local_smoothing_with(cfg, &random_bumps(rg, cfg.samples, cfg.seed))
}

/// Compares `‖|x|^{−γ}|D|^{1/2−γ}u‖²_{L²_t L²_x} / ‖f‖²` with the explicit
/// smoothing constant.
///
/// The energy-domain route writes the time integral with Plancherel, which
/// leaves `π Σ_± ∫ E |c_±(E)|² dE · (K(ν_f) + K(ν_g))` with
/// `K(ν) = ∫ x^{1−2γ} J_ν(x)² dx`. The time-domain route evolves the data on
/// `[−T, T]`, integrates the weighted norm by the trapezoid rule and adds a
/// `t^{−2γ}` tail beyond `±T`.
pub fn verify_local_smoothing_with(cfg: &SmoothingConfig, data: &[RadialSpinor]) -> Result<EstimateReport> {
    cfg.validate()?;
    let ch = Channel::new(cfg.l, cfg.alpha)?;
    let gamma = cfg.gamma;
    let mut report = EstimateReport::new("local-smoothing", 0.05, to_metadata(cfg));
    let bound = smoothing_constant(gamma, cfg.alpha, cfg.l)?;
    let sharp = sharp_smoothing_constant(gamma, ch);
    let sharp_value = match &sharp {
        Ok(v) => *v,
        Err(_) => {
            report.notes.push(format!(
                "gamma = {gamma} is at or beyond 1 + min(nu_f, nu_g) = {}: the smoothing norm is infinite",
                1.0 + ch.nu_f().min(ch.nu_g())
            ));
            f64::INFINITY
        }
    };
    if data.is_empty() {
        report.set_ratio(0.0, bound);
        return Ok(report);
    }
    let rg = data[0].grid.clone();
    let eg = Arc::new(EnergyGrid::new(cfg.energy)?);
    let plan = SpectralPlan::new(ch, rg.clone(), eg.clone());
    let coeffs = plan.forward_batch(data);

    let mut ratios = Vec::with_capacity(data.len());
    let mut defects = Vec::with_capacity(data.len());
    for (phi, c) in data.iter().zip(&coeffs) {
        let norm_sq = phi.norm_sqr();
        if norm_sq == 0.0 {
            ratios.push(0.0);
            continue;
        }
        ratios.push(sharp_value * c.norm_sqr() / norm_sq);
        defects.push(1.0 - c.norm_sqr() / norm_sq);
    }
    let max = ratios.iter().copied().fold(0.0, f64::max);
    report.set_ratio(max, bound);
    report.details.insert("sharp_constant".into(), sharp_value);
    report.details.insert("max_norm_ratio".into(), max.sqrt());
    report.details.insert("range_upper".into(), smoothing_range(cfg.alpha, cfg.l).1);
    report.details.insert("finite_norm_upper".into(), 1.0 + ch.nu_f().min(ch.nu_g()));
    report
        .details
        .insert("max_band_limit_defect".into(), defects.iter().copied().fold(0.0, f64::max));
    report.series.insert("ratio_sq".into(), ratios.clone());

    if sharp.is_ok() && cfg.time_route_samples > 0 {
        let times = symmetric_times(cfg.time_window, cfg.dt);
        let weights: Vec<f64> = rg
            .nodes()
            .iter()
            .zip(rg.weights())
            .map(|(r, w)| w * r.powf(-2.0 * gamma))
            .collect();
        let mut time_ratios = Vec::new();
        let mut worst_rel = 0.0f64;
        let mut worst_tail = 0.0f64;
        for (i, (phi, c)) in data.iter().zip(&coeffs).enumerate().take(cfg.time_route_samples) {
            let norm_sq = phi.norm_sqr();
            if norm_sq == 0.0 {
                continue;
            }
            let powered = c.multiplied(|e| {
                let p = Complex64::new(e.powf(0.5 - gamma), 0.0);
                (p, p)
            });
            let dens = evolved_densities(&plan, &powered, &times, &weights);
            let body = trapezoid(&times, &dens);
            let tail = cfg.time_window * (dens[0] + dens[dens.len() - 1]) / (2.0 * gamma - 1.0);
            let ratio = (body + tail) / norm_sq;
            worst_rel = worst_rel.max((ratio - ratios[i]).abs() / ratios[i]);
            worst_tail = worst_tail.max(tail / (body + tail));
            time_ratios.push(ratio);
        }
        report.details.insert("time_route_rel_diff".into(), worst_rel);
        report.details.insert("time_route_tail_fraction".into(), worst_tail);
        report.series.insert("time_route_ratio_sq".into(), time_ratios);
    }
    report.notes.push(
        "lhs is the squared space-time norm per unit squared data norm, compared with the explicit constant"
            .into(),
    );
    Ok(report)
}

// ---------------------------------------------------------------------------
// Bessel averages

/// `(1/R) ∫₀^R J_λ(r)² r dr` by composite Gauss–Legendre quadrature.
pub fn bessel_average(lambda: f64, big_r: f64) -> Result<f64> {
    if !(big_r > 0.0) {
        return Err(invalid(format!("radius must be positive, got {big_r}")));
    }
    let j = BesselJ::new(BesselOrder::new(lambda)?);
    let rule = Rule::graded_from_zero(big_r.min(1.0), big_r, 20, 1.0, 16);
    Ok(rule.integrate(|r| {
        let v = j.eval(r);
        v * v * r
    }) / big_r)
}

/// `(1/X) ∫₀^X J_ν(x)² x dx` through the Lommel integral
/// `(X²/2)[J_ν'(X)² + (1 − ν²/X²) J_ν(X)²]`.
pub fn bessel_average_closed(j: &BesselJ, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let nu = j.order();
    let (jn, jn1) = j.eval_with_next(x);
    let dj = nu / x * jn - jn1;
    0.5 * x * (dj * dj + (1.0 - nu * nu / (x * x)) * jn * jn)
}

/// `sup_{0<r≤r_max} √r |J_λ(r)|`, sampled on a fine grid and refined by a
/// golden-section search around the best node.
pub fn landau_sup(lambda: f64, r_max: f64) -> Result<f64> {
    if r_max < 4.0 * lambda * lambda + 50.0 {
        return Err(invalid(format!("r_max = {r_max} below 4λ² + 50 for λ = {lambda}")));
    }
    let j = BesselJ::new(BesselOrder::new(lambda)?);
    let h = 0.01;
    let g = |r: f64| r.sqrt() * j.eval(r).abs();
    let n = (r_max / h).ceil() as usize;
    let (mut best_i, mut best) = (1, 0.0);
    for i in 1..=n {
        let v = g((i as f64 * h).min(r_max));
        if v > best {
            best = v;
            best_i = i;
        }
    }
    let (mut a, mut b) = (((best_i as f64) - 1.0) * h, ((best_i as f64 + 1.0) * h).min(r_max));
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..60 {
        let x1 = b - phi * (b - a);
        let x2 = a + phi * (b - a);
        if g(x1) > g(x2) {
            b = x2;
        } else {
            a = x1;
        }
    }
    Ok(best.max(g(0.5 * (a + b))))
}

// ---------------------------------------------------------------------------
// endpoint

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EndpointConfig {
    pub alpha: f64,
    pub l: i32,
    /// Ascending radii, consecutive entries a factor two apart.
    pub radii: Vec<f64>,
    pub radial: GridSpec,
    pub energy: GridSpec,
    pub r0: f64,
    pub sigma: f64,
}

impl Default for EndpointConfig {
    fn default() -> Self {
        Self {
            alpha: 0.3,
            l: 0,
            radii: (0..8).map(|k| 5.0 * 2f64.powi(k)).collect(),
            radial: GridSpec::composite(30.0, 1600),
            energy: GridSpec::composite(12.0, 1200),
            r0: 8.0,
            sigma: 1.0,
        }
    }
}

/// `R^{−1/2}‖u‖_{L²_t L²(|x|≤R)} / ‖f‖` over the radii for a Gaussian bump.
///
/// The time integral over the whole line is evaluated with Plancherel:
/// `R^{−1}‖u‖² = π Σ_± ∫ E |c_±|² [A_f(ER) + A_g(ER)] dE` where `A_ν(X)` is the
/// Bessel average of [`bessel_average_closed`]. The check passes when the
/// last doubling changes the value by less than 10%.
pub fn verify_endpoint(cfg: &EndpointConfig) -> Result<EstimateReport> {
    let ch = Channel::new(cfg.l, cfg.alpha)?;
    let rg = Arc::new(RadialGrid::new(cfg.radial)?);
    let phi = bump(rg, cfg.r0, cfg.sigma, Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.5));
    verify_endpoint_with(cfg, ch, &phi)
}

pub fn verify_endpoint_with(cfg: &EndpointConfig, ch: Channel, phi: &RadialSpinor) -> Result<EstimateReport> {
    if cfg.radii.len() < 2 || cfg.radii.iter().any(|&r| !(r > 0.0)) {
        return Err(invalid("endpoint check needs at least two positive radii"));
    }
    let mut report = EstimateReport::new("endpoint", 0.0, to_metadata(cfg));
    let norm_sq = phi.norm_sqr();
    let eg = Arc::new(EnergyGrid::new(cfg.energy)?);
    let plan = SpectralPlan::new(ch, phi.grid.clone(), eg.clone());
    let c = plan.forward(phi);
    let jf = BesselJ::new(BesselOrder::new(ch.nu_f())?);
    let jg = BesselJ::new(BesselOrder::new(ch.nu_g())?);
    let values: Vec<f64> = cfg
        .radii
        .iter()
        .map(|&big_r| {
            if norm_sq == 0.0 {
                return 0.0;
            }
            let mut acc = 0.0;
            for (k, &e) in eg.nodes().iter().enumerate() {
                let x = e * big_r;
                let avg = bessel_average_closed(&jf, x) + bessel_average_closed(&jg, x);
                acc += eg.weights()[k] * (c.plus[k].norm_sqr() + c.minus[k].norm_sqr()) * avg;
            }
            (PI * acc / norm_sq).sqrt()
        })
        .collect();
    let n = values.len();
    let sup = values.iter().copied().fold(0.0, f64::max);
    let change = if values[n - 1] == 0.0 {
        0.0
    } else {
        (values[n - 1] - values[n - 2]).abs() / values[n - 1]
    };
    report.lhs = sup;
    report.bound = Some(0.1);
    report.ratio = Some(change / 0.1);
    report.pass = change <= 0.1;
    report.details.insert("plateau".into(), values[n - 1]);
    report.details.insert("last_doubling_change".into(), change);
    report.details.insert("limit".into(), 2f64.sqrt());
    report.series.insert("radii".into(), cfg.radii.clone());
    report.series.insert("scaled_norm".into(), values);
    report.notes.push("ratio is the last doubling change over the 10% allowance".into());
    Ok(report)
}

// ---------------------------------------------------------------------------
// KSS

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KssWeight {
    /// `⟨x⟩^μ`
    Japanese,
    /// `|x|^μ`
    Homogeneous,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KssConfig {
    pub alpha: f64,
    pub l: i32,
    pub mu: f64,
    pub weight: KssWeight,
    pub times: Vec<f64>,
    pub dt: f64,
    pub sigma: f64,
    pub tolerance: f64,
    pub radial: GridSpec,
    pub energy: GridSpec,
}

impl Default for KssConfig {
    fn default() -> Self {
        Self {
            alpha: 0.3,
            l: 0,
            mu: 0.0,
            weight: KssWeight::Japanese,
            times: (1..=6).map(|k| 2f64.powi(k)).collect(),
            dt: 0.05,
            sigma: 1.0,
            tolerance: 0.1,
            radial: GridSpec::composite(100.0, 2400),
            energy: GridSpec::composite(10.0, 800),
        }
    }
}

/// Growth of `‖w u‖_{L²([0,T]) L²}` in `T` for a channel-regular Gaussian.
///
/// The fitted log-log exponent is compared with `1/2 + μ` for the homogeneous
/// weight and with the case table (bounded for `μ ≤ −1/2`, `1/2 + μ` above)
/// for `⟨x⟩^μ`. Both `1/2 − μ` and `1/2 + μ` are reported.
pub fn verify_kss(cfg: &KssConfig) -> Result<EstimateReport> {
    if cfg.mu > 0.0 {
        return Err(invalid(format!("KSS weight exponent must be nonpositive, got {}", cfg.mu)));
    }
    if cfg.times.iter().any(|&t| t < 1.0) || cfg.times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("KSS times must be ascending and at least 1"));
    }
    let ch = Channel::new(cfg.l, cfg.alpha)?;
    let mut report = EstimateReport::new("kss", cfg.tolerance, to_metadata(cfg));
    let rg = Arc::new(RadialGrid::new(cfg.radial)?);
    let eg = Arc::new(EnergyGrid::new(cfg.energy)?);
    let t_end = cfg.times.last().copied().unwrap_or(0.0);
    if t_end + 6.0 * cfg.sigma > rg.max() {
        report.notes.push("radial grid shorter than the light cone at the last time".into());
    }
    let phi = regular_gaussian(rg.clone(), ch, cfg.sigma);
    let plan = SpectralPlan::new(ch, rg.clone(), eg);
    let c = plan.forward(&phi);
    let mu = cfg.mu;
    let weights: Vec<f64> = rg
        .nodes()
        .iter()
        .zip(rg.weights())
        .map(|(&r, w)| {
            w * match cfg.weight {
                KssWeight::Japanese => (1.0 + r * r).powf(mu),
                KssWeight::Homogeneous => r.powf(2.0 * mu),
            }
        })
        .collect();
    let steps = (t_end / cfg.dt).round().max(1.0) as usize;
    let times: Vec<f64> = (0..=steps).map(|i| t_end * i as f64 / steps as f64).collect();
    let dens = evolved_densities(&plan, &c, &times, &weights);
    let norms: Vec<f64> = cfg
        .times
        .iter()
        .map(|&big_t| {
            let m = times.iter().take_while(|&&t| t <= big_t + 1e-9).count();
            trapezoid(&times[..m], &dens[..m]).sqrt()
        })
        .collect();
    let fit_ok = norms.len() >= 3 && norms.iter().all(|v| v.is_finite() && *v > 0.0);
    let exponent = if fit_ok { loglog_slope(&cfg.times, &norms) } else { f64::NAN };
    let proof = 0.5 + mu;
    let statement = 0.5 - mu;
    let (deviation, target) = match cfg.weight {
        KssWeight::Homogeneous => ((exponent - proof).abs(), proof),
        KssWeight::Japanese if mu <= -0.5 => (exponent.max(0.0), 0.0),
        KssWeight::Japanese => ((exponent - proof).abs(), proof),
    };
    report.lhs = exponent;
    report.bound = Some(target);
    report.ratio = Some(deviation / cfg.tolerance);
    report.tolerance = 0.0;
    report.pass = fit_ok && deviation <= cfg.tolerance;
    report.details.insert("exponent".into(), exponent);
    report.details.insert("candidate_one_half_minus_mu".into(), statement);
    report.details.insert("candidate_one_half_plus_mu".into(), proof);
    report.details.insert("fit_ok".into(), if fit_ok { 1.0 } else { 0.0 });
    report.details.insert("data_norm".into(), phi.l2_norm());
    report.series.insert("times".into(), cfg.times.clone());
    report.series.insert("norms".into(), norms);
    report.notes.push(format!(
        "the stated growth T^(1/2-mu) = T^{statement:.3} and the growth T^(1/2+mu) = T^{proof:.3} used in the derivation differ for mu != 0; measured exponent {exponent:.4}"
    ));
    if !fit_ok {
        report.notes.push("fit failed: need at least three positive norms".into());
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// weighted Strichartz and Sobolev trace

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StrichartzConfig {
    pub alpha: f64,
    pub q: f64,
    pub epsilon: f64,
    pub l_min: i32,
    pub l_max: i32,
    pub samples: usize,
    pub seed: u64,
    pub time_window: f64,
    pub dt: f64,
    pub radial: GridSpec,
    pub energy: GridSpec,
}

impl Default for StrichartzConfig {
    fn default() -> Self {
        Self {
            alpha: 0.3,
            q: 4.0,
            epsilon: 0.1,
            l_min: -2,
            l_max: 2,
            samples: 10,
            seed: 42,
            time_window: 30.0,
            dt: 0.1,
            radial: GridSpec::composite(60.0, 2400),
            energy: GridSpec::composite(12.0, 768),
        }
    }
}

/// `‖|D|^s Λ_ω^a f‖` computed on the transform side.
fn powered_norm(plans: &PlanSet, set: &ChannelSet, s: f64, a: f64) -> Result<f64> {
    let g = angular_multiplier(a, set);
    let mut acc = 0.0;
    for (l, spinor) in g.iter() {
        let c = plans.plan(l)?.forward(spinor);
        let e = c.grid.nodes();
        let w = c.grid.weights();
        for k in 0..e.len() {
            acc += w[k] * e[k].powf(2.0 * s) * (c.plus[k].norm_sqr() + c.minus[k].norm_sqr());
        }
    }
    Ok(acc.sqrt())
}

/// Ratio of `‖r^{1/2−ε−2/q} u‖_{L^q_t L^q_{r dr} L²_ω}` on `[−T, T]` to
/// `‖|D|^{1/2+ε−1/q} Λ_ω^{−ε+ε/q} f‖` for random multi-channel data.
pub fn verify_weighted_strichartz(cfg: &StrichartzConfig) -> Result<EstimateReport> {
    if !(cfg.q >= 2.0 && cfg.q.is_finite()) {
        return Err(Error::Unsupported(format!("q = {} (use the Sobolev trace check for q = inf)", cfg.q)));
    }
    if !(cfg.epsilon > 0.0 && cfg.epsilon < 0.5) {
        return Err(invalid(format!("epsilon = {} outside (0, 1/2)", cfg.epsilon)));
    }
    let rg = Arc::new(RadialGrid::new(cfg.radial)?);
    let eg = Arc::new(EnergyGrid::new(cfg.energy)?);
    let plans = PlanSet::new(cfg.alpha, cfg.l_min, cfg.l_max, rg.clone(), eg)?;
    let data: Vec<ChannelSet> = (0..cfg.samples as u64)
        .map(|i| random_channel_set(rg.clone(), cfg.l_min, cfg.l_max, cfg.seed.wrapping_add(i)))
        .collect::<Result<_>>()?;
    verify_weighted_strichartz_with(cfg, &plans, &data)
}

pub fn verify_weighted_strichartz_with(
    cfg: &StrichartzConfig,
    plans: &PlanSet,
    data: &[ChannelSet],
) -> Result<EstimateReport> {
    let (q, eps) = (cfg.q, cfg.epsilon);
    let mut report = EstimateReport::new("weighted-strichartz", 0.0, to_metadata(cfg));
    let times = symmetric_times(cfg.time_window, cfg.dt);
    let rg = &plans.rgrid;
    let r = rg.nodes();
    let w = rg.weights();
    let rw: Vec<f64> = r.iter().map(|x| x.powf(0.5 - eps - 2.0 / q)).collect();
    let mut ratios = Vec::with_capacity(data.len());
    for set in data {
        let rhs = powered_norm(plans, set, 0.5 + eps - 1.0 / q, -eps + eps / q)?;
        let coeffs: Vec<(i32, SpectralCoeff)> =
            set.iter().map(|(l, s)| Ok((l, plans.plan(l)?.forward(s)))).collect::<Result<_>>()?;
        let mut dens = Vec::with_capacity(times.len());
        for chunk in times.chunks(CHUNK) {
            let mut ang = vec![vec![0.0; r.len()]; chunk.len()];
            for (l, c) in &coeffs {
                let cs: Vec<SpectralCoeff> = chunk.iter().map(|&t| evolve(c, t)).collect();
                for (i, u) in plans.plan(*l)?.inverse_batch(&cs).iter().enumerate() {
                    for j in 0..r.len() {
                        ang[i][j] += u.f[j].norm_sqr() + u.g[j].norm_sqr();
                    }
                }
            }
            for a in &ang {
                dens.push((0..r.len()).map(|j| w[j] * (rw[j] * a[j].sqrt()).powf(q)).sum());
            }
        }
        let lhs = trapezoid(&times, &dens).powf(1.0 / q);
        ratios.push(if rhs == 0.0 { 0.0 } else { lhs / rhs });
    }
    let max = ratios.iter().copied().fold(0.0, f64::max);
    report.lhs = max;
    report.pass = ratios.iter().all(|v| v.is_finite());
    report.details.insert("max_ratio".into(), max);
    report
        .details
        .insert("min_ratio".into(), ratios.iter().copied().fold(f64::INFINITY, f64::min).min(max));
    report.series.insert("ratios".into(), ratios);
    report.notes.push(format!("time window [-{0}, {0}] without tail correction", cfg.time_window));
    Ok(report)
}

/// `sup_r r^{1/2−ε}‖f(rω)‖_{L²_ω}` against `‖|D|^{1/2+ε} Λ_ω^{−ε} f‖`.
pub fn verify_sobolev_trace(epsilon: f64, f: &ChannelSet, plans: &PlanSet) -> Result<EstimateReport> {
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(invalid(format!("epsilon = {epsilon} outside (0, 1/2)")));
    }
    let mut report =
        EstimateReport::new("sobolev-trace", 0.0, serde_json::json!({ "epsilon": epsilon, "alpha": plans.alpha }));
    let r = f.grid.nodes();
    let lhs = (0..r.len())
        .map(|j| {
            let ang: f64 = f.channels.values().map(|c| c.f[j].norm_sqr() + c.g[j].norm_sqr()).sum();
            r[j].powf(0.5 - epsilon) * ang.sqrt()
        })
        .fold(0.0, f64::max);
    let rhs = powered_norm(plans, f, 0.5 + epsilon, -epsilon)?;
    let ratio = if rhs == 0.0 { 0.0 } else { lhs / rhs };
    report.lhs = lhs;
    report.pass = ratio.is_finite();
    report.details.insert("rhs".into(), rhs);
    report.details.insert("ratio".into(), ratio);
    Ok(report)
}

// ---------------------------------------------------------------------------
// norm identity

/// `‖D_A f‖` summed over channels against `‖∇_A f‖`, relative tolerance 1e−3.
pub fn verify_norm_identity(set: &ChannelSet, alpha: f64) -> Result<EstimateReport> {
    let mut report =
        EstimateReport::new("norm-identity", 1e-3, serde_json::json!({ "alpha": alpha, "grid": set.grid.spec() }));
    let mut dirac_sq = 0.0;
    for (l, s) in set.iter() {
        dirac_sq += apply_radial_dirac(Channel::new(l, alpha)?, s).norm_sqr();
    }
    let dirac = dirac_sq.sqrt();
    let grad = magnetic_gradient_norm(set, alpha);
    report.lhs = dirac;
    report.bound = Some(grad);
    if grad > 0.0 {
        let rel = (dirac - grad).abs() / grad;
        report.ratio = Some(dirac / grad);
        report.pass = rel < report.tolerance;
        report.details.insert("relative_difference".into(), rel);
    }
    Ok(report)
}

/// Large-`R` limit of [`bessel_average`].
pub const BESSEL_AVERAGE_LIMIT: f64 = FRAC_1_PI;
