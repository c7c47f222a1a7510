//! Time evolution `i∂_t u = D u` per channel and space-time norms.
//!
//! [`evolve_spectral`] is exact in time: it multiplies the transform
//! coefficients by phases and inverts. [`evolve_oracle`] is an independent
//! Crank–Nicolson integrator on a uniform radial grid, written for the
//! variables `(√r f, √r g)` in which the centered-difference operator is
//! exactly Hermitian, so every step is exactly unitary.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::grids::{EnergyGrid, GridScheme, RadialGrid, RadialSpinor};
use crate::partialwave::ChannelSet;
use crate::spectral::{BesselCache, BranchConvention, Channel, SpectralCoeff, SpectralPlan};
use crate::{Error, Result};

/// Values of `e^{−itx}` at `x = E` and `x = −E`.
fn phases(t: f64, e: f64) -> (Complex64, Complex64) {
    (Complex64::from_polar(1.0, -e * t), Complex64::from_polar(1.0, e * t))
}

fn evolve_coeff(c: &SpectralCoeff, t: f64, convention: BranchConvention) -> SpectralCoeff {
    c.apply_function(convention, |e| phases(t, e))
}

/// `e^{−itD} φ₀` through the transform.
pub fn evolve_spectral(
    plan: &SpectralPlan,
    phi0: &RadialSpinor,
    t: f64,
    convention: BranchConvention,
) -> RadialSpinor {
    plan.inverse(&evolve_coeff(&plan.forward(phi0), t, convention))
}

/// `e^{−it_i D} φ₀` for several times with a single forward transform.
pub fn evolve_spectral_times(
    plan: &SpectralPlan,
    phi0: &RadialSpinor,
    times: &[f64],
    convention: BranchConvention,
) -> Vec<RadialSpinor> {
    let c = plan.forward(phi0);
    let mut out = Vec::with_capacity(times.len());
    for chunk in times.chunks(64) {
        let cs: Vec<SpectralCoeff> = chunk.iter().map(|&t| evolve_coeff(&c, t, convention)).collect();
        out.extend(plan.inverse_batch(&cs));
    }
    out
}

/// Pentadiagonal SPD matrix in banded Cholesky form (`L` with two
/// subdiagonals).
struct BandedCholesky {
    d: Vec<f64>,
    l1: Vec<f64>,
    l2: Vec<f64>,
}

impl BandedCholesky {
    /// Factors `M` given by its diagonal `m0`, first and second
    /// subdiagonals `m1[i] = M[i][i−1]`, `m2[i] = M[i][i−2]`.
    fn factor(m0: &[f64], m1: &[f64], m2: &[f64]) -> Result<Self> {
        let n = m0.len();
        let mut d = vec![0.0; n];
        let mut l1 = vec![0.0; n];
        let mut l2 = vec![0.0; n];
        for i in 0..n {
            if i >= 2 {
                l2[i] = m2[i] / d[i - 2];
            }
            if i >= 1 {
                let cross = if i >= 2 { l2[i] * l1[i - 1] } else { 0.0 };
                l1[i] = (m1[i] - cross) / d[i - 1];
            }
            let pivot = m0[i] - l1[i] * l1[i] - l2[i] * l2[i];
            if !(pivot > 0.0) || !pivot.is_finite() {
                return Err(Error::Solver(format!("Cholesky pivot {pivot} at row {i}")));
            }
            d[i] = pivot.sqrt();
        }
        Ok(Self { d, l1, l2 })
    }

    fn solve(&self, b: &mut [Complex64]) {
        let n = b.len();
        for i in 0..n {
            let mut s = b[i];
            if i >= 1 {
                s -= b[i - 1] * self.l1[i];
            }
            if i >= 2 {
                s -= b[i - 2] * self.l2[i];
            }
            b[i] = s / self.d[i];
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            if i + 1 < n {
                s -= b[i + 1] * self.l1[i + 1];
            }
            if i + 2 < n {
                s -= b[i + 2] * self.l2[i + 2];
            }
            b[i] = s / self.d[i];
        }
    }
}

/// Crank–Nicolson integrator for one channel on a uniform grid.
///
/// With `F = √r f`, `G = √r g` and `P = δ + (k + ½)/r` (centered differences,
/// zero values outside the grid), the operator reads `D = ((0, −iP), (iPᵀ, 0))`.
/// Eliminating `F` leaves the SPD system `(I + (dt²/4) PᵀP) G = rhs`.
pub struct CrankNicolson {
    h: f64,
    dt: f64,
    v: Vec<f64>,
    chol: BandedCholesky,
}

impl CrankNicolson {
    pub fn new(ch: Channel, grid: &RadialGrid, dt: f64) -> Result<Self> {
        let h = grid.step().ok_or_else(|| {
            Error::Unsupported("the time-stepping oracle needs a uniform-trapezoid grid".into())
        })?;
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("time step must be positive, got {dt}")));
        }
        let n = grid.len();
        let kk = ch.k() + 0.5;
        let v: Vec<f64> = grid.nodes().iter().map(|r| kk / r).collect();
        let c = 0.25 * dt * dt;
        let e = 0.5 / h;
        // PᵀP: row j of P is (−e, v_j, e) at columns (j−1, j, j+1)
        let mut m0 = vec![1.0; n];
        let mut m1 = vec![0.0; n];
        let mut m2 = vec![0.0; n];
        for j in 0..n {
            let row = [(j as isize - 1, -e), (j as isize, v[j]), (j as isize + 1, e)];
            for &(a, pa) in &row {
                for &(b, pb) in &row {
                    if a < 0 || b < 0 || a >= n as isize || b >= n as isize || b > a {
                        continue;
                    }
                    let (a, b) = (a as usize, b as usize);
                    match a - b {
                        0 => m0[a] += c * pa * pb,
                        1 => m1[a] += c * pa * pb,
                        2 => m2[a] += c * pa * pb,
                        _ => unreachable!(),
                    }
                }
            }
        }
        let chol = BandedCholesky::factor(&m0, &m1, &m2)?;
        Ok(Self { h, dt, v, chol })
    }

    fn apply_p(&self, x: &[Complex64]) -> Vec<Complex64> {
        let n = x.len();
        let e = 0.5 / self.h;
        (0..n)
            .map(|j| {
                let up = if j + 1 < n { x[j + 1] } else { Complex64::default() };
                let down = if j > 0 { x[j - 1] } else { Complex64::default() };
                (up - down) * e + x[j] * self.v[j]
            })
            .collect()
    }

    fn apply_pt(&self, x: &[Complex64]) -> Vec<Complex64> {
        let n = x.len();
        let e = 0.5 / self.h;
        (0..n)
            .map(|j| {
                let up = if j + 1 < n { x[j + 1] } else { Complex64::default() };
                let down = if j > 0 { x[j - 1] } else { Complex64::default() };
                (down - up) * e + x[j] * self.v[j]
            })
            .collect()
    }

    /// One step on the scaled variables `(F, G)`.
    pub fn step(&self, big_f: &mut Vec<Complex64>, big_g: &mut Vec<Complex64>) {
        let half = 0.5 * self.dt;
        let pg = self.apply_p(big_g);
        let r1: Vec<Complex64> = big_f.iter().zip(&pg).map(|(f, p)| f - p * half).collect();
        let ptf = self.apply_pt(big_f);
        let ptr1 = self.apply_pt(&r1);
        let mut rhs: Vec<Complex64> = big_g
            .iter()
            .zip(ptf.iter().zip(&ptr1))
            .map(|(g, (a, b))| g + a * half + b * half)
            .collect();
        self.chol.solve(&mut rhs);
        let pg1 = self.apply_p(&rhs);
        *big_f = r1.iter().zip(&pg1).map(|(r, p)| r - p * half).collect();
        *big_g = rhs;
    }
}

/// `e^{−itD} φ₀` by Crank–Nicolson steps of size at most `dt`. The grid must be
/// uniform and the solution must stay away from `r_max` over `[0, t]`.
pub fn evolve_oracle(ch: Channel, phi0: &RadialSpinor, t: f64, dt: f64) -> Result<RadialSpinor> {
    if phi0.grid.scheme() != GridScheme::UniformTrapezoid {
        return Err(Error::Unsupported(
            "the time-stepping oracle needs a uniform-trapezoid grid".into(),
        ));
    }
    let steps = (t.abs() / dt).ceil().max(1.0) as usize;
    let step = t / steps as f64;
    let cn = CrankNicolson::new(ch, &phi0.grid, step.abs())?;
    let sq: Vec<f64> = phi0.grid.nodes().iter().map(|r| r.sqrt()).collect();
    let mut big_f: Vec<Complex64> = phi0.f.iter().zip(&sq).map(|(f, s)| f * s).collect();
    let mut big_g: Vec<Complex64> = phi0.g.iter().zip(&sq).map(|(g, s)| g * s).collect();
    if t < 0.0 {
        // diag(1, −1) anticommutes with D
        big_g.iter_mut().for_each(|z| *z = -*z);
    }
    for _ in 0..steps {
        cn.step(&mut big_f, &mut big_g);
    }
    if t < 0.0 {
        big_g.iter_mut().for_each(|z| *z = -*z);
    }
    let f = big_f.iter().zip(&sq).map(|(f, s)| f / s).collect();
    let g = big_g.iter().zip(&sq).map(|(g, s)| g / s).collect();
    RadialSpinor::new(phi0.grid.clone(), f, g)
}

/// Outcome of comparing both branch conventions against the oracle.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConventionChoice {
    pub selected: BranchConvention,
    pub t: f64,
    pub discrepancy_uniform: f64,
    pub discrepancy_signed: f64,
}

/// Picks the branch convention whose spectral evolution agrees best with the
/// time-stepping oracle at time `t`.
pub fn select_convention(plan: &SpectralPlan, phi0: &RadialSpinor, t: f64, dt: f64) -> Result<ConventionChoice> {
    let oracle = evolve_oracle(plan.channel, phi0, t, dt)?;
    let du = evolve_spectral(plan, phi0, t, BranchConvention::Uniform).rel_diff(&oracle);
    let ds = evolve_spectral(plan, phi0, t, BranchConvention::Signed).rel_diff(&oracle);
    let selected = if ds <= du { BranchConvention::Signed } else { BranchConvention::Uniform };
    Ok(ConventionChoice { selected, t, discrepancy_uniform: du, discrepancy_signed: ds })
}

/// Transform plans for a range of channels on shared grids.
#[derive(Debug, Clone)]
pub struct PlanSet {
    pub alpha: f64,
    pub rgrid: Arc<RadialGrid>,
    pub egrid: Arc<EnergyGrid>,
    pub plans: BTreeMap<i32, SpectralPlan>,
}

impl PlanSet {
    pub fn new(
        alpha: f64,
        l_min: i32,
        l_max: i32,
        rgrid: Arc<RadialGrid>,
        egrid: Arc<EnergyGrid>,
    ) -> Result<Self> {
        let mut cache = BesselCache::new(rgrid.clone(), egrid.clone(), 4);
        let mut plans = BTreeMap::new();
        for l in l_min..=l_max {
            plans.insert(l, SpectralPlan::with_cache(Channel::new(l, alpha)?, &mut cache));
        }
        Ok(Self { alpha, rgrid, egrid, plans })
    }

    pub fn plan(&self, l: i32) -> Result<&SpectralPlan> {
        self.plans
            .get(&l)
            .ok_or_else(|| Error::InvalidParameter(format!("no transform plan for channel {l}")))
    }

    /// Applies the spectral function `h` channel by channel.
    pub fn apply_function(
        &self,
        set: &ChannelSet,
        convention: BranchConvention,
        h: impl Fn(f64) -> (Complex64, Complex64) + Copy,
    ) -> Result<ChannelSet> {
        set.try_map(|l, s| Ok(self.plan(l)?.apply_function(s, convention, h)))
    }
}

/// Snapshots `u(t_i)` of a multi-channel solution.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<ChannelSet>,
}

impl Trajectory {
    pub fn new(times: Vec<f64>, states: Vec<ChannelSet>) -> Result<Self> {
        if times.len() != states.len() {
            return Err(Error::InvalidParameter("times and states differ in length".into()));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter("trajectory times must be ascending".into()));
        }
        Ok(Self { times, states })
    }

    /// Largest relative deviation of `‖u(t_i)‖` from `reference`.
    pub fn norm_drift(&self, reference: f64) -> f64 {
        self.states
            .iter()
            .map(|s| (s.l2_norm() - reference).abs() / reference)
            .fold(0.0, f64::max)
    }
}

/// Evolves every channel of `f` spectrally to each of `times`.
pub fn evolve_trajectory(
    plans: &PlanSet,
    f: &ChannelSet,
    times: &[f64],
    convention: BranchConvention,
) -> Result<Trajectory> {
    let mut per_channel: BTreeMap<i32, Vec<RadialSpinor>> = BTreeMap::new();
    for (l, s) in f.iter() {
        per_channel.insert(l, evolve_spectral_times(plans.plan(l)?, s, times, convention));
    }
    let mut states = Vec::with_capacity(times.len());
    for i in 0..times.len() {
        let chans = per_channel.iter().map(|(&l, v)| (l, v[i].clone()));
        let mut set = ChannelSet::from_channels(f.grid.clone(), chans)?;
        set.l_min = f.l_min;
        set.l_max = f.l_max;
        states.push(set);
    }
    Trajectory::new(times.to_vec(), states)
}

/// Space-time norm selector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum NormKind {
    /// `‖ |x|^μ u ‖_{L²_t L²_x}`.
    Homogeneous { mu: f64 },
    /// `‖ ⟨x⟩^μ u ‖_{L²_t L²_x}`.
    Japanese { mu: f64 },
    /// `‖ |x|^{−γ} |D|^{1/2−γ} u ‖_{L²_t L²_x}`.
    Smoothing { gamma: f64 },
    /// `‖ r^w u ‖_{L^q_t L^q_{r dr} L²_ω}`.
    Strichartz { q: f64, weight: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NormRecord {
    pub kind: NormKind,
    pub t_start: f64,
    pub t_end: f64,
    pub value: f64,
}

/// Per-snapshot spatial integrals `s(t_i)` whose time integral gives the
/// `p`-th power of the mixed norm, together with `p`.
pub fn snapshot_densities(
    traj: &Trajectory,
    kind: NormKind,
    plans: Option<&PlanSet>,
) -> Result<(Vec<f64>, f64)> {
    let mut out = Vec::with_capacity(traj.states.len());
    let power = match kind {
        NormKind::Strichartz { q, .. } => q,
        _ => 2.0,
    };
    if let NormKind::Strichartz { q, .. } = kind {
        if !(q >= 2.0 && q.is_finite()) {
            return Err(Error::Unsupported(format!("Strichartz exponent q = {q} not in [2, inf)")));
        }
    }
    for state in &traj.states {
        let r = state.grid.nodes();
        let w = state.grid.weights();
        let s = match kind {
            NormKind::Homogeneous { mu } => weighted_l2(state, |x| x.powf(2.0 * mu)),
            NormKind::Japanese { mu } => weighted_l2(state, |x| (1.0 + x * x).powf(mu)),
            NormKind::Smoothing { gamma } => {
                let plans = plans.ok_or_else(|| {
                    Error::Unsupported("smoothing norms need transform plans".into())
                })?;
                let powered = plans.apply_function(state, BranchConvention::Uniform, |e| {
                    let p = Complex64::new(e.powf(0.5 - gamma), 0.0);
                    (p, p)
                })?;
                weighted_l2(&powered, |x| x.powf(-2.0 * gamma))
            }
            NormKind::Strichartz { q, weight } => {
                let mut acc = 0.0;
                for j in 0..r.len() {
                    let ang: f64 =
                        state.channels.values().map(|c| c.f[j].norm_sqr() + c.g[j].norm_sqr()).sum();
                    acc += w[j] * (r[j].powf(weight) * ang.sqrt()).powf(q);
                }
                acc
            }
        };
        out.push(s);
    }
    Ok((out, power))
}

fn weighted_l2(set: &ChannelSet, weight_sq: impl Fn(f64) -> f64) -> f64 {
    let r = set.grid.nodes();
    let w = set.grid.weights();
    let ws: Vec<f64> = r.iter().zip(w).map(|(&x, wi)| wi * weight_sq(x)).collect();
    set.channels
        .values()
        .map(|c| {
            (0..r.len()).map(|j| ws[j] * (c.f[j].norm_sqr() + c.g[j].norm_sqr())).sum::<f64>()
        })
        .sum()
}

/// Trapezoid rule over the snapshot times.
pub fn trapezoid(times: &[f64], values: &[f64]) -> f64 {
    times
        .windows(2)
        .zip(values.windows(2))
        .map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0] + v[1]))
        .sum()
}

/// The requested mixed space-time norm over the trajectory's time window.
pub fn mixed_norm(traj: &Trajectory, kind: NormKind, plans: Option<&PlanSet>) -> Result<NormRecord> {
    let (dens, power) = snapshot_densities(traj, kind, plans)?;
    let value = trapezoid(&traj.times, &dens).max(0.0).powf(1.0 / power);
    Ok(NormRecord {
        kind,
        t_start: traj.times.first().copied().unwrap_or(0.0),
        t_end: traj.times.last().copied().unwrap_or(0.0),
        value,
    })
}

/// `n + 1` equally spaced times on `[t0, t1]`.
pub fn time_grid(t0: f64, t1: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|i| t0 + (t1 - t0) * i as f64 / n as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grids::GridSpec;

    fn bump(grid: Arc<RadialGrid>, r0: f64) -> RadialSpinor {
        RadialSpinor::from_fn(grid, |r| {
            let b = (-(r - r0).powi(2)).exp();
            (Complex64::new(b, 0.0), Complex64::new(0.0, 0.5 * b))
        })
    }

    #[test]
    fn oracle_step_is_unitary() {
        let grid = Arc::new(RadialGrid::new(GridSpec::uniform(20.0, 2000)).unwrap());
        let ch = Channel::new(0, 0.3).unwrap();
        let phi = bump(grid, 8.0);
        let one = evolve_oracle(ch, &phi, 0.01, 0.01).unwrap();
        assert!((one.l2_norm() / phi.l2_norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn oracle_needs_uniform_grid() {
        let grid = Arc::new(RadialGrid::new(GridSpec::composite(20.0, 400)).unwrap());
        let ch = Channel::new(0, 0.3).unwrap();
        assert!(matches!(evolve_oracle(ch, &bump(grid, 8.0), 0.1, 0.01), Err(Error::Unsupported(_))));
    }

    #[test]
    fn zero_trajectory_has_zero_norm() {
        let grid = Arc::new(RadialGrid::new(GridSpec::composite(5.0, 80)).unwrap());
        let set = ChannelSet::from_channels(grid.clone(), [(0, RadialSpinor::zeros(grid))]).unwrap();
        let traj = Trajectory::new(vec![0.0, 1.0], vec![set.clone(), set]).unwrap();
        let rec = mixed_norm(&traj, NormKind::Japanese { mu: -1.0 }, None).unwrap();
        assert_eq!(rec.value, 0.0);
    }

    #[test]
    fn smoothing_norm_requires_plans() {
        let grid = Arc::new(RadialGrid::new(GridSpec::composite(5.0, 80)).unwrap());
        let set = ChannelSet::from_channels(grid.clone(), [(0, RadialSpinor::zeros(grid))]).unwrap();
        let traj = Trajectory::new(vec![0.0], vec![set]).unwrap();
        assert!(matches!(
            mixed_norm(&traj, NormKind::Smoothing { gamma: 0.9 }, None),
            Err(Error::Unsupported(_))
        ));
    }
}
