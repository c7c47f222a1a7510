//! Quadrature grids for the measures `r dr` and `E dE`, and radial spinors
//! living on them.
//!
//! The measure weight is folded into the quadrature weights at construction,
//! so `Σ_j w_j h(x_j)` approximates `∫ h(x) x dx` directly. Nodes never include
//! the origin.

use std::ops::Deref;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::quad::Rule;
use crate::{Error, Result};

/// Nodes per composite Gauss panel.
pub const PANEL_ORDER: usize = 8;
pub const DEFAULT_R_MAX: f64 = 40.0;
pub const DEFAULT_E_MAX: f64 = 40.0;
pub const DEFAULT_NODES: usize = 4000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GridScheme {
    /// Equal panels of [`PANEL_ORDER`] Gauss–Legendre nodes.
    CompositeGauss,
    /// Nodes `j h`, `j = 1..n`, trapezoid weights (the vanishing origin term
    /// of `h(0)·0` is dropped).
    UniformTrapezoid,
}

/// Serializable grid descriptor; a grid is rebuilt from it deterministically.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub max: f64,
    pub n: usize,
    pub scheme: GridScheme,
}

impl GridSpec {
    pub fn composite(max: f64, n: usize) -> Self {
        Self { max, n, scheme: GridScheme::CompositeGauss }
    }

    pub fn uniform(max: f64, n: usize) -> Self {
        Self { max, n, scheme: GridScheme::UniformTrapezoid }
    }

    fn validate(&self) -> Result<()> {
        if !(self.max.is_finite() && self.max > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "grid extent must be positive, got {}",
                self.max
            )));
        }
        if self.n < 16 {
            return Err(Error::InvalidParameter(format!(
                "grid needs at least 16 nodes, got {}",
                self.n
            )));
        }
        if self.scheme == GridScheme::CompositeGauss && self.n % PANEL_ORDER != 0 {
            return Err(Error::InvalidParameter(format!(
                "composite Gauss grid size {} is not a multiple of {PANEL_ORDER}",
                self.n
            )));
        }
        Ok(())
    }
}

/// Nodes and measure-including weights on `(0, max]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    spec: GridSpec,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl Grid {
    pub fn new(spec: GridSpec) -> Result<Self> {
        spec.validate()?;
        let (nodes, plain) = match spec.scheme {
            GridScheme::CompositeGauss => {
                let rule = Rule::uniform_panels(0.0, spec.max, spec.n / PANEL_ORDER, PANEL_ORDER);
                (rule.nodes, rule.weights)
            }
            GridScheme::UniformTrapezoid => {
                let h = spec.max / spec.n as f64;
                let nodes: Vec<f64> = (1..=spec.n).map(|j| j as f64 * h).collect();
                let mut w = vec![h; spec.n];
                w[spec.n - 1] = 0.5 * h;
                (nodes, w)
            }
        };
        let weights = nodes.iter().zip(&plain).map(|(x, w)| x * w).collect();
        Ok(Self { spec, nodes, weights })
    }

    pub fn spec(&self) -> GridSpec {
        self.spec
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn max(&self) -> f64 {
        self.spec.max
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn scheme(&self) -> GridScheme {
        self.spec.scheme
    }

    /// Node spacing of a uniform grid.
    pub fn step(&self) -> Option<f64> {
        match self.spec.scheme {
            GridScheme::UniformTrapezoid => Some(self.spec.max / self.spec.n as f64),
            GridScheme::CompositeGauss => None,
        }
    }

    /// Second-order derivative on the (possibly nonuniform) nodes: centered
    /// three-point formula in the interior, one-sided three-point formulas at
    /// the two end nodes.
    pub fn derivative(&self, v: &[Complex64]) -> Vec<Complex64> {
        let x = &self.nodes;
        let n = x.len();
        debug_assert_eq!(v.len(), n);
        let mut d = vec![Complex64::new(0.0, 0.0); n];
        for j in 1..n - 1 {
            let h1 = x[j] - x[j - 1];
            let h2 = x[j + 1] - x[j];
            d[j] = v[j - 1] * (-h2 / (h1 * (h1 + h2)))
                + v[j] * ((h2 - h1) / (h1 * h2))
                + v[j + 1] * (h1 / (h2 * (h1 + h2)));
        }
        let (h1, h2) = (x[1] - x[0], x[2] - x[1]);
        d[0] = v[0] * (-(2.0 * h1 + h2) / (h1 * (h1 + h2)))
            + v[1] * ((h1 + h2) / (h1 * h2))
            + v[2] * (-h1 / (h2 * (h1 + h2)));
        let (h1, h2) = (x[n - 2] - x[n - 3], x[n - 1] - x[n - 2]);
        d[n - 1] = v[n - 3] * (h2 / (h1 * (h1 + h2)))
            + v[n - 2] * (-(h1 + h2) / (h1 * h2))
            + v[n - 1] * ((2.0 * h2 + h1) / (h2 * (h1 + h2)));
        d
    }

    /// `Σ_j w_j h_j`, i.e. `∫ h(x) x dx`.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.len());
        self.weights.iter().zip(values).map(|(w, v)| w * v).sum()
    }

    pub fn integrate_fn(&self, h: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, w)| w * h(x)).sum()
    }
}

macro_rules! grid_newtype {
    ($name:ident, $doc:literal) => {
        #[doc = $doc]
        #[derive(Debug, Clone, PartialEq)]
        pub struct $name(Grid);

        impl $name {
            pub fn new(spec: GridSpec) -> Result<Self> {
                Grid::new(spec).map(Self)
            }

            pub fn grid(&self) -> &Grid {
                &self.0
            }
        }

        impl Deref for $name {
            type Target = Grid;
            fn deref(&self) -> &Grid {
                &self.0
            }
        }

        impl Serialize for $name {
            fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                self.0.spec.serialize(s)
            }
        }

        impl<'de> Deserialize<'de> for $name {
            fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
                let spec = GridSpec::deserialize(d)?;
                Self::new(spec).map_err(serde::de::Error::custom)
            }
        }
    };
}

grid_newtype!(RadialGrid, "Radial grid for the measure `r dr`.");
grid_newtype!(EnergyGrid, "Energy grid for the measure `E dE`.");

impl RadialGrid {
    pub fn default_grid() -> Self {
        Self::new(GridSpec::composite(DEFAULT_R_MAX, DEFAULT_NODES)).expect("default grid is valid")
    }
}

impl EnergyGrid {
    pub fn default_grid() -> Self {
        Self::new(GridSpec::composite(DEFAULT_E_MAX, DEFAULT_NODES)).expect("default grid is valid")
    }
}

pub fn make_radial_grid(r_max: f64, n: usize, scheme: GridScheme) -> Result<RadialGrid> {
    RadialGrid::new(GridSpec { max: r_max, n, scheme })
}

pub fn make_energy_grid(e_max: f64, n: usize, scheme: GridScheme) -> Result<EnergyGrid> {
    EnergyGrid::new(GridSpec { max: e_max, n, scheme })
}

/// The two radial components `(f, g)` of one partial-wave channel, sampled
/// at the nodes of a shared radial grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialSpinor {
    pub grid: Arc<RadialGrid>,
    pub f: Vec<Complex64>,
    pub g: Vec<Complex64>,
}

impl RadialSpinor {
    pub fn new(grid: Arc<RadialGrid>, f: Vec<Complex64>, g: Vec<Complex64>) -> Result<Self> {
        if f.len() != grid.len() || g.len() != grid.len() {
            return Err(Error::InvalidParameter(format!(
                "spinor lengths ({}, {}) do not match grid length {}",
                f.len(),
                g.len(),
                grid.len()
            )));
        }
        if f.iter().chain(&g).any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidParameter("spinor has non-finite entries".into()));
        }
        Ok(Self { grid, f, g })
    }

    pub fn zeros(grid: Arc<RadialGrid>) -> Self {
        let n = grid.len();
        Self { grid, f: vec![Complex64::new(0.0, 0.0); n], g: vec![Complex64::new(0.0, 0.0); n] }
    }

    pub fn from_fn(grid: Arc<RadialGrid>, h: impl Fn(f64) -> (Complex64, Complex64)) -> Self {
        let (f, g) = grid.nodes().iter().map(|&r| h(r)).unzip();
        Self { grid, f, g }
    }

    pub fn len(&self) -> usize {
        self.f.len()
    }

    pub fn is_empty(&self) -> bool {
        self.f.is_empty()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.grid
            .weights()
            .iter()
            .zip(self.f.iter().zip(&self.g))
            .map(|(w, (f, g))| w * (f.norm_sqr() + g.norm_sqr()))
            .sum()
    }

    pub fn l2_norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// `⟨self, other⟩ = ∫ (conj(f) f' + conj(g) g') r dr`, antilinear in `self`.
    pub fn inner(&self, other: &RadialSpinor) -> Complex64 {
        debug_assert_eq!(self.len(), other.len());
        let w = self.grid.weights();
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..self.len() {
            acc += w[j] * (self.f[j].conj() * other.f[j] + self.g[j].conj() * other.g[j]);
        }
        acc
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Self {
            grid: self.grid.clone(),
            f: self.f.iter().map(|z| z * c).collect(),
            g: self.g.iter().map(|z| z * c).collect(),
        }
    }

    /// `self + c·other`.
    pub fn axpy(&self, c: Complex64, other: &RadialSpinor) -> Self {
        Self {
            grid: self.grid.clone(),
            f: self.f.iter().zip(&other.f).map(|(a, b)| a + c * b).collect(),
            g: self.g.iter().zip(&other.g).map(|(a, b)| a + c * b).collect(),
        }
    }

    /// Relative L² distance `‖self − other‖ / ‖other‖`.
    pub fn rel_diff(&self, other: &RadialSpinor) -> f64 {
        let d = self.axpy(Complex64::new(-1.0, 0.0), other).l2_norm();
        let n = other.l2_norm();
        if n == 0.0 {
            d
        } else {
            d / n
        }
    }
}

pub fn l2_norm(phi: &RadialSpinor) -> f64 {
    phi.l2_norm()
}

#[derive(Serialize, Deserialize)]
struct SpinorRepr {
    grid: GridSpec,
    f_re: Vec<f64>,
    f_im: Vec<f64>,
    g_re: Vec<f64>,
    g_im: Vec<f64>,
}

fn split(v: &[Complex64]) -> (Vec<f64>, Vec<f64>) {
    v.iter().map(|z| (z.re, z.im)).unzip()
}

fn join(re: Vec<f64>, im: Vec<f64>) -> Vec<Complex64> {
    re.into_iter().zip(im).map(|(a, b)| Complex64::new(a, b)).collect()
}

impl Serialize for RadialSpinor {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let (f_re, f_im) = split(&self.f);
        let (g_re, g_im) = split(&self.g);
        SpinorRepr { grid: self.grid.spec(), f_re, f_im, g_re, g_im }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for RadialSpinor {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = SpinorRepr::deserialize(d)?;
        let grid = RadialGrid::new(r.grid).map_err(serde::de::Error::custom)?;
        RadialSpinor::new(Arc::new(grid), join(r.f_re, r.f_im), join(r.g_re, r.g_im))
            .map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn composite_gauss_is_exact_on_low_polynomials() {
        let g = make_radial_grid(1.0, 64, GridScheme::CompositeGauss).unwrap();
        assert!((g.integrate_fn(|_| 1.0) - 0.5).abs() < 1e-15);
        assert!((g.integrate_fn(|r| r) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn uniform_trapezoid_reproduces_measure() {
        let g = make_radial_grid(3.0, 300, GridScheme::UniformTrapezoid).unwrap();
        assert!((g.integrate_fn(|_| 1.0) - 4.5).abs() < 1e-12);
        assert_eq!(g.step(), Some(0.01));
    }

    #[test]
    fn gaussian_integral_on_default_grid() {
        let g = RadialGrid::default_grid();
        assert!((g.integrate_fn(|r| (-r * r).exp()) - 0.5).abs() < 1e-13);
        assert!(g.nodes()[0] > 0.0);
    }

    #[test]
    fn derivative_is_exact_on_quadratics() {
        for spec in [GridSpec::composite(2.0, 32), GridSpec::uniform(2.0, 40)] {
            let g = Grid::new(spec).unwrap();
            let v: Vec<Complex64> =
                g.nodes().iter().map(|&x| Complex64::new(x * x - 3.0 * x, 1.0)).collect();
            let d = g.derivative(&v);
            for (x, dx) in g.nodes().iter().zip(&d) {
                assert!((dx.re - (2.0 * x - 3.0)).abs() < 1e-10);
                assert!(dx.im.abs() < 1e-10);
            }
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(make_radial_grid(0.0, 64, GridScheme::CompositeGauss).is_err());
        assert!(make_radial_grid(1.0, 8, GridScheme::UniformTrapezoid).is_err());
        assert!(make_radial_grid(1.0, 60, GridScheme::CompositeGauss).is_err());
    }

    #[test]
    fn spinor_json_round_trip() {
        let g = Arc::new(make_radial_grid(2.0, 16, GridScheme::CompositeGauss).unwrap());
        let s = RadialSpinor::from_fn(g, |r| (Complex64::new(r, -r), Complex64::new(0.5, r * r)));
        let text = serde_json::to_string(&s).unwrap();
        let back: RadialSpinor = serde_json::from_str(&text).unwrap();
        assert_eq!(back, s);
    }
}
