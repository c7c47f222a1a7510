//! Generalized eigenfunctions of the radial Dirac operator, the operator
//! itself on a grid, and the Bessel-type transform diagonalizing it.
//!
//! # Conventions
//!
//! For a channel with `k = l + α`, the radial operator is
//! `D(f, g) = (−i(∂_r + (k+1)/r) g, −i(∂_r − k/r) f)` and its generalized
//! eigenfunctions are `χ_E = √(π/2) (ε^l J_{ν_f}(Er), i ε^{l+1} J_{ν_g}(Er))`.
//!
//! The transform uses `χ_E / √π` (see [`NORMALIZATION`]) and pairs it with the
//! data by the Hermitian inner product of `L²(r dr)`:
//!
//! * `plus(E)  = ⟨χ_E, φ⟩ / √π`
//! * `minus(E) = ⟨−χ_{−E}, φ⟩ / √π`, where `χ_{−E} = conj(χ_E)`.
//!
//! With this choice the transform is an isometry onto `L²(E dE)²`. The plus
//! branch carries the eigenvalue `+E` of `D`, the minus branch carries `−E`.
//! [`BranchConvention`] selects whether a spectral multiplier `m(E)` is applied
//! to both branches alike or with the branch sign.

use std::collections::VecDeque;
use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::sync::Arc;

use ndarray::{Array2, ArrayView2, Axis};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::grids::{EnergyGrid, RadialGrid, RadialSpinor};
use crate::specfun::{BesselJ, BesselOrder};
use crate::{Error, Result};

/// Factor relating the eigenfunctions to the isometric transform kernel.
pub const NORMALIZATION: f64 = 0.564_189_583_547_756_3;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// A partial-wave channel `l` at circulation `α`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Channel {
    pub l: i32,
    pub alpha: f64,
}

impl Channel {
    pub fn new(l: i32, alpha: f64) -> Result<Self> {
        if !alpha.is_finite() {
            return Err(Error::InvalidParameter(format!("circulation must be finite, got {alpha}")));
        }
        Ok(Self { l, alpha })
    }

    /// `l + α`.
    pub fn k(&self) -> f64 {
        self.l as f64 + self.alpha
    }

    pub fn nu_f(&self) -> f64 {
        self.k().abs()
    }

    pub fn nu_g(&self) -> f64 {
        ((self.l + 1) as f64 + self.alpha).abs()
    }

    pub fn eps(&self) -> f64 {
        if self.k() >= 0.0 {
            1.0
        } else {
            -1.0
        }
    }

    pub fn critical(&self) -> bool {
        let k = self.k();
        -1.0 < k && k < 0.0
    }

    /// `ε^n` for integer `n`.
    fn eps_pow(&self, n: i32) -> f64 {
        if self.eps() > 0.0 || n.rem_euclid(2) == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// `ε^l`, the phase of the upper eigenfunction component.
    pub fn phase_f(&self) -> Complex64 {
        Complex64::new(self.eps_pow(self.l), 0.0)
    }

    /// `i ε^{l+1}`, the phase of the lower eigenfunction component.
    pub fn phase_g(&self) -> Complex64 {
        I * self.eps_pow(self.l + 1)
    }
}

/// How a spectral multiplier acts on the minus branch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BranchConvention {
    /// Both branches are multiplied by `m(E)`: functions of `|D|`.
    #[default]
    Uniform,
    /// The minus branch is multiplied by `m(−E)`: functions of `D`.
    Signed,
}

/// The 2×2 matrix whose first row is `χ_E(r)` and second row `−χ_{−E}(r)`,
/// with the `√(π/2)` normalization of the eigenfunctions.
pub type EigenMatrix = [[Complex64; 2]; 2];

pub fn eigen_matrix(ch: Channel, energy: f64, r: f64) -> EigenMatrix {
    let amp = (0.5 * PI).sqrt();
    let jf = BesselJ::new(order(ch.nu_f())).eval(energy * r);
    let jg = BesselJ::new(order(ch.nu_g())).eval(energy * r);
    let f = ch.phase_f() * (amp * jf);
    let g = ch.phase_g() * (amp * jg);
    [[f, g], [-f, g]]
}

fn order(nu: f64) -> BesselOrder {
    BesselOrder::new(nu).expect("channel orders are nonnegative")
}

/// `χ_E` sampled on `grid`, normalized as `√(π/2)` times Bessel functions.
pub fn eigenfunction(ch: Channel, energy: f64, grid: Arc<RadialGrid>) -> Result<RadialSpinor> {
    if !(energy > 0.0 && energy.is_finite()) {
        return Err(Error::InvalidParameter(format!("energy must be positive, got {energy}")));
    }
    let amp = (0.5 * PI).sqrt();
    let bf = BesselJ::new(order(ch.nu_f()));
    let bg = BesselJ::new(order(ch.nu_g()));
    let (pf, pg) = (ch.phase_f() * amp, ch.phase_g() * amp);
    Ok(RadialSpinor::from_fn(grid, |r| (pf * bf.eval(energy * r), pg * bg.eval(energy * r))))
}

/// `D_l φ` with second-order finite differences.
pub fn apply_radial_dirac(ch: Channel, phi: &RadialSpinor) -> RadialSpinor {
    let k = ch.k();
    let r = phi.grid.nodes();
    let df = phi.grid.derivative(&phi.f);
    let dg = phi.grid.derivative(&phi.g);
    let mut f = Vec::with_capacity(r.len());
    let mut g = Vec::with_capacity(r.len());
    for j in 0..r.len() {
        f.push(-I * (dg[j] + phi.g[j] * ((k + 1.0) / r[j])));
        g.push(-I * (df[j] - phi.f[j] * (k / r[j])));
    }
    RadialSpinor { grid: phi.grid.clone(), f, g }
}

/// Transform coefficients `(plus, minus)` on an energy grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralCoeff {
    pub grid: Arc<EnergyGrid>,
    pub plus: Vec<Complex64>,
    pub minus: Vec<Complex64>,
}

impl SpectralCoeff {
    pub fn zeros(grid: Arc<EnergyGrid>) -> Self {
        let n = grid.len();
        Self { grid, plus: vec![Complex64::default(); n], minus: vec![Complex64::default(); n] }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.grid
            .weights()
            .iter()
            .zip(self.plus.iter().zip(&self.minus))
            .map(|(w, (p, m))| w * (p.norm_sqr() + m.norm_sqr()))
            .sum()
    }

    pub fn l2_norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Multiplies by `(m_plus(E), m_minus(E))` pointwise.
    pub fn multiplied(&self, m: impl Fn(f64) -> (Complex64, Complex64)) -> Self {
        let mut out = self.clone();
        for (k, &e) in self.grid.nodes().iter().enumerate() {
            let (a, b) = m(e);
            out.plus[k] *= a;
            out.minus[k] *= b;
        }
        out
    }

    /// Applies the spectral function `h` of `D` (or of `|D|`, depending on the
    /// convention) given as its values `h(E)` and `h(−E)`.
    pub fn apply_function(
        &self,
        convention: BranchConvention,
        h: impl Fn(f64) -> (Complex64, Complex64),
    ) -> Self {
        self.multiplied(|e| {
            let (pos, neg) = h(e);
            match convention {
                BranchConvention::Uniform => (pos, pos),
                BranchConvention::Signed => (pos, neg),
            }
        })
    }

    pub fn axpy(&self, c: Complex64, other: &SpectralCoeff) -> Self {
        Self {
            grid: self.grid.clone(),
            plus: self.plus.iter().zip(&other.plus).map(|(a, b)| a + c * b).collect(),
            minus: self.minus.iter().zip(&other.minus).map(|(a, b)| a + c * b).collect(),
        }
    }
}

/// `E^γ` on the plus branch and the corresponding value on the minus branch:
/// `E^γ` for [`BranchConvention::Uniform`], `(−E)^γ = E^γ e^{iπγ}` for
/// [`BranchConvention::Signed`].
pub fn power_multiplier(convention: BranchConvention, gamma: f64, e: f64) -> (Complex64, Complex64) {
    let p = e.powf(gamma);
    match convention {
        BranchConvention::Uniform => (Complex64::new(p, 0.0), Complex64::new(p, 0.0)),
        BranchConvention::Signed => (Complex64::new(p, 0.0), Complex64::from_polar(p, PI * gamma)),
    }
}

/// Dense matrix `J_ν(E_k r_j)` with energies along rows.
pub type BesselMatrix = Array2<f64>;

/// Fills `J_ν(E_k r_j)` and `J_{ν+1}(E_k r_j)` in one pass.
fn bessel_pair(nu: f64, rg: &RadialGrid, eg: &EnergyGrid) -> (BesselMatrix, BesselMatrix) {
    let ev = BesselJ::new(order(nu));
    let (ne, nr) = (eg.len(), rg.len());
    let r = rg.nodes();
    let e = eg.nodes();
    let symmetric = ne == nr && r == e;
    let mut lo = Array2::<f64>::zeros((ne, nr));
    let mut hi = Array2::<f64>::zeros((ne, nr));
    lo.axis_iter_mut(Axis(0))
        .into_par_iter()
        .zip(hi.axis_iter_mut(Axis(0)).into_par_iter())
        .enumerate()
        .for_each(|(k, (mut row_lo, mut row_hi))| {
            let upto = if symmetric { k + 1 } else { nr };
            for j in 0..upto {
                let (a, b) = ev.eval_with_next(e[k] * r[j]);
                row_lo[j] = a;
                row_hi[j] = b;
            }
        });
    if symmetric {
        for m in [&mut lo, &mut hi] {
            for k in 0..ne {
                for j in k + 1..nr {
                    m[[k, j]] = m[[j, k]];
                }
            }
        }
    }
    (lo, hi)
}

/// Small cache of Bessel matrices keyed by order, for one pair of grids.
/// Consecutive channels share an order (`ν_g(l) = ν_f(l+1)`), and every fill
/// produces the matrices for `ν` and `ν + 1` together.
#[derive(Debug)]
pub struct BesselCache {
    rgrid: Arc<RadialGrid>,
    egrid: Arc<EnergyGrid>,
    capacity: usize,
    entries: VecDeque<(i64, Arc<BesselMatrix>)>,
}

fn order_key(nu: f64) -> i64 {
    (nu * 1e10).round() as i64
}

impl BesselCache {
    pub fn new(rgrid: Arc<RadialGrid>, egrid: Arc<EnergyGrid>, capacity: usize) -> Self {
        Self { rgrid, egrid, capacity: capacity.max(2), entries: VecDeque::new() }
    }

    pub fn rgrid(&self) -> &Arc<RadialGrid> {
        &self.rgrid
    }

    pub fn egrid(&self) -> &Arc<EnergyGrid> {
        &self.egrid
    }

    fn lookup(&self, nu: f64) -> Option<Arc<BesselMatrix>> {
        let key = order_key(nu);
        self.entries.iter().find(|(k, _)| *k == key).map(|(_, m)| m.clone())
    }

    fn insert(&mut self, nu: f64, m: Arc<BesselMatrix>) {
        let key = order_key(nu);
        if self.entries.iter().any(|(k, _)| *k == key) {
            return;
        }
        if self.entries.len() >= self.capacity {
            self.entries.pop_front();
        }
        self.entries.push_back((key, m));
    }

    pub fn get(&mut self, nu: f64) -> Arc<BesselMatrix> {
        if let Some(m) = self.lookup(nu) {
            return m;
        }
        let (lo, hi) = bessel_pair(nu, &self.rgrid, &self.egrid);
        let lo = Arc::new(lo);
        self.insert(nu + 1.0, Arc::new(hi));
        self.insert(nu, lo.clone());
        lo
    }
}

/// Precomputed transform for one channel on fixed radial and energy grids.
#[derive(Debug, Clone)]
pub struct SpectralPlan {
    pub channel: Channel,
    rgrid: Arc<RadialGrid>,
    egrid: Arc<EnergyGrid>,
    jf: Arc<BesselMatrix>,
    jg: Arc<BesselMatrix>,
}

impl SpectralPlan {
    pub fn new(ch: Channel, rgrid: Arc<RadialGrid>, egrid: Arc<EnergyGrid>) -> Self {
        let mut cache = BesselCache::new(rgrid, egrid, 4);
        Self::with_cache(ch, &mut cache)
    }

    pub fn with_cache(ch: Channel, cache: &mut BesselCache) -> Self {
        let (nf, ng) = (ch.nu_f(), ch.nu_g());
        let (jf, jg) = if nf <= ng {
            let jf = cache.get(nf);
            (jf, cache.get(ng))
        } else {
            let jg = cache.get(ng);
            (cache.get(nf), jg)
        };
        Self { channel: ch, rgrid: cache.rgrid.clone(), egrid: cache.egrid.clone(), jf, jg }
    }

    pub fn rgrid(&self) -> &Arc<RadialGrid> {
        &self.rgrid
    }

    pub fn egrid(&self) -> &Arc<EnergyGrid> {
        &self.egrid
    }

    pub fn forward(&self, phi: &RadialSpinor) -> SpectralCoeff {
        self.forward_batch(std::slice::from_ref(phi)).pop().expect("one input")
    }

    pub fn inverse(&self, c: &SpectralCoeff) -> RadialSpinor {
        self.inverse_batch(std::slice::from_ref(c)).pop().expect("one input")
    }

    /// Forward transform of several spinors with one matrix product per
    /// component.
    pub fn forward_batch(&self, phis: &[RadialSpinor]) -> Vec<SpectralCoeff> {
        let w = self.rgrid.weights();
        let xf = pack(phis.iter().map(|p| &p.f[..]), w);
        let xg = pack(phis.iter().map(|p| &p.g[..]), w);
        let a = self.jf.dot(&xf);
        let b = self.jg.dot(&xg);
        let a = unpack(a.view());
        let b = unpack(b.view());
        let (pf, pg) = (self.channel.phase_f(), self.channel.phase_g());
        a.into_iter()
            .zip(b)
            .map(|(a, b)| {
                let mut plus = Vec::with_capacity(a.len());
                let mut minus = Vec::with_capacity(a.len());
                for (x, y) in a.iter().zip(&b) {
                    // conj(phase_f) = phase_f, conj(phase_g) = -phase_g
                    let u = pf * x;
                    let v = pg * y;
                    plus.push((u - v) * FRAC_1_SQRT_2);
                    minus.push(-(u + v) * FRAC_1_SQRT_2);
                }
                SpectralCoeff { grid: self.egrid.clone(), plus, minus }
            })
            .collect()
    }

    pub fn inverse_batch(&self, cs: &[SpectralCoeff]) -> Vec<RadialSpinor> {
        let (pf, pg) = (self.channel.phase_f(), self.channel.phase_g());
        let amp_f: Vec<Vec<Complex64>> = cs
            .iter()
            .map(|c| {
                c.plus.iter().zip(&c.minus).map(|(p, m)| pf * (p - m) * FRAC_1_SQRT_2).collect()
            })
            .collect();
        let amp_g: Vec<Vec<Complex64>> = cs
            .iter()
            .map(|c| {
                c.plus.iter().zip(&c.minus).map(|(p, m)| pg * (p + m) * FRAC_1_SQRT_2).collect()
            })
            .collect();
        let w = self.egrid.weights();
        let yf = pack(amp_f.iter().map(|v| &v[..]), w);
        let yg = pack(amp_g.iter().map(|v| &v[..]), w);
        let f = unpack(self.jf.t().dot(&yf).view());
        let g = unpack(self.jg.t().dot(&yg).view());
        f.into_iter()
            .zip(g)
            .map(|(f, g)| RadialSpinor { grid: self.rgrid.clone(), f, g })
            .collect()
    }

    /// `h(D) φ` (or `h(|D|) φ`) through the transform.
    pub fn apply_function(
        &self,
        phi: &RadialSpinor,
        convention: BranchConvention,
        h: impl Fn(f64) -> (Complex64, Complex64),
    ) -> RadialSpinor {
        self.inverse(&self.forward(phi).apply_function(convention, h))
    }
}

/// Weighted values as a real matrix with columns `(re, im)` per input.
fn pack<'a>(cols: impl Iterator<Item = &'a [Complex64]>, w: &[f64]) -> Array2<f64> {
    let cols: Vec<&[Complex64]> = cols.collect();
    let mut x = Array2::<f64>::zeros((w.len(), 2 * cols.len()));
    for (b, c) in cols.iter().enumerate() {
        for (j, z) in c.iter().enumerate() {
            x[[j, 2 * b]] = w[j] * z.re;
            x[[j, 2 * b + 1]] = w[j] * z.im;
        }
    }
    x
}

fn unpack(m: ArrayView2<f64>) -> Vec<Vec<Complex64>> {
    (0..m.ncols() / 2)
        .map(|b| {
            (0..m.nrows()).map(|k| Complex64::new(m[[k, 2 * b]], m[[k, 2 * b + 1]])).collect()
        })
        .collect()
}

/// One-shot forward transform. Prefer [`SpectralPlan`] for repeated use.
pub fn forward_transform(ch: Channel, phi: &RadialSpinor, eg: Arc<EnergyGrid>) -> SpectralCoeff {
    SpectralPlan::new(ch, phi.grid.clone(), eg).forward(phi)
}

/// One-shot inverse transform. Prefer [`SpectralPlan`] for repeated use.
pub fn inverse_transform(ch: Channel, c: &SpectralCoeff, rg: Arc<RadialGrid>) -> RadialSpinor {
    SpectralPlan::new(ch, rg, c.grid.clone()).inverse(c)
}
