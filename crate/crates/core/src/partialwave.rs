//! Angular decomposition of 2-spinor fields on the plane into partial-wave
//! channels.
//!
//! Channel `l` collects the angular mode `e^{ilφ}` of the upper component and
//! `e^{i(l+1)φ}` of the lower one. The angular transform is normalized so that
//! `Σ_l ‖channel_l‖² = ‖Φ‖²_{L²(ℝ²)}` holds exactly for band-limited fields.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::grids::{GridSpec, RadialGrid, RadialSpinor};
use crate::{Error, Result};

/// Spinor field sampled on the polar product grid `(r_j, φ_k = 2πk/M)`.
/// Values are stored row-major in `j`, i.e. entry `j*M + k`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinorField {
    pub grid: Arc<RadialGrid>,
    pub angles: usize,
    pub upper: Vec<Complex64>,
    pub lower: Vec<Complex64>,
}

impl SpinorField {
    pub fn new(
        grid: Arc<RadialGrid>,
        angles: usize,
        upper: Vec<Complex64>,
        lower: Vec<Complex64>,
    ) -> Result<Self> {
        if angles < 4 || angles % 2 != 0 {
            return Err(Error::InvalidParameter(format!(
                "angular count must be even and at least 4, got {angles}"
            )));
        }
        let n = grid.len() * angles;
        if upper.len() != n || lower.len() != n {
            return Err(Error::InvalidParameter(format!(
                "field arrays must have {n} entries"
            )));
        }
        if upper.iter().chain(&lower).any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::InvalidParameter("field has non-finite entries".into()));
        }
        Ok(Self { grid, angles, upper, lower })
    }

    pub fn zeros(grid: Arc<RadialGrid>, angles: usize) -> Result<Self> {
        let n = grid.len() * angles;
        Self::new(grid, angles, vec![Complex64::default(); n], vec![Complex64::default(); n])
    }

    /// Samples `h(r, φ) -> (Φ₁, Φ₂)` on the polar grid.
    pub fn from_fn(
        grid: Arc<RadialGrid>,
        angles: usize,
        h: impl Fn(f64, f64) -> (Complex64, Complex64),
    ) -> Result<Self> {
        let mut upper = Vec::with_capacity(grid.len() * angles);
        let mut lower = Vec::with_capacity(grid.len() * angles);
        for &r in grid.nodes() {
            for k in 0..angles {
                let (a, b) = h(r, angle(k, angles));
                upper.push(a);
                lower.push(b);
            }
        }
        Self::new(grid, angles, upper, lower)
    }

    pub fn angle(&self, k: usize) -> f64 {
        angle(k, self.angles)
    }

    /// `∫∫ |Φ|² r dr dφ` by the product rule.
    pub fn norm_sqr(&self) -> f64 {
        let dphi = 2.0 * PI / self.angles as f64;
        let m = self.angles;
        self.grid
            .weights()
            .iter()
            .enumerate()
            .map(|(j, w)| {
                let row = j * m..(j + 1) * m;
                let s: f64 = self.upper[row.clone()]
                    .iter()
                    .chain(&self.lower[row])
                    .map(|z| z.norm_sqr())
                    .sum();
                w * dphi * s
            })
            .sum()
    }

    pub fn l2_norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Field rotated by `steps` angular nodes: `Φ(r, φ − 2π steps / M)`.
    pub fn rotated(&self, steps: usize) -> Self {
        let m = self.angles;
        let mut out = self.clone();
        for j in 0..self.grid.len() {
            for k in 0..m {
                let src = j * m + (k + m - steps % m) % m;
                out.upper[j * m + k] = self.upper[src];
                out.lower[j * m + k] = self.lower[src];
            }
        }
        out
    }
}

fn angle(k: usize, m: usize) -> f64 {
    2.0 * PI * k as f64 / m as f64
}

/// Partial-wave channels `l_min..=l_max` on a shared radial grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    pub grid: Arc<RadialGrid>,
    pub l_min: i32,
    pub l_max: i32,
    pub channels: BTreeMap<i32, RadialSpinor>,
}

impl ChannelSet {
    /// A set without channels.
    pub fn empty(grid: Arc<RadialGrid>) -> Self {
        Self { grid, l_min: 0, l_max: -1, channels: BTreeMap::new() }
    }

    /// Builds a set from explicit channels; gaps in the index range are
    /// filled with zero spinors.
    pub fn from_channels(
        grid: Arc<RadialGrid>,
        channels: impl IntoIterator<Item = (i32, RadialSpinor)>,
    ) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (l, s) in channels {
            if s.grid.spec() != grid.spec() {
                return Err(Error::InvalidParameter(format!(
                    "channel {l} lives on a different grid"
                )));
            }
            map.insert(l, s);
        }
        let (Some(&l_min), Some(&l_max)) = (map.keys().next(), map.keys().next_back()) else {
            return Ok(Self::empty(grid));
        };
        for l in l_min..=l_max {
            map.entry(l).or_insert_with(|| RadialSpinor::zeros(grid.clone()));
        }
        Ok(Self { grid, l_min, l_max, channels: map })
    }

    pub fn get(&self, l: i32) -> Option<&RadialSpinor> {
        self.channels.get(&l)
    }

    pub fn iter(&self) -> impl Iterator<Item = (i32, &RadialSpinor)> {
        self.channels.iter().map(|(&l, s)| (l, s))
    }

    pub fn norm_sqr(&self) -> f64 {
        self.channels.values().map(RadialSpinor::norm_sqr).sum()
    }

    pub fn l2_norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Applies `op` to every channel, keeping the index range.
    pub fn try_map(&self, mut op: impl FnMut(i32, &RadialSpinor) -> Result<RadialSpinor>) -> Result<Self> {
        let mut channels = BTreeMap::new();
        for (&l, s) in &self.channels {
            channels.insert(l, op(l, s)?);
        }
        Ok(Self { grid: self.grid.clone(), l_min: self.l_min, l_max: self.l_max, channels })
    }

    pub fn map(&self, mut op: impl FnMut(i32, &RadialSpinor) -> RadialSpinor) -> Self {
        self.try_map(|l, s| Ok(op(l, s))).expect("infallible")
    }

    /// Smallest angular count that separates all modes of this set.
    pub fn min_angles(&self) -> usize {
        min_angles(self.l_min, self.l_max)
    }
}

/// `2(|l_min| + |l_max| + 2)`.
pub fn min_angles(l_min: i32, l_max: i32) -> usize {
    2 * (l_min.unsigned_abs() as usize + l_max.unsigned_abs() as usize + 2)
}

fn check_angles(m: usize, l_min: i32, l_max: i32) -> Result<()> {
    let need = min_angles(l_min, l_max);
    if m < need {
        return Err(Error::Aliasing(format!(
            "channels {l_min}..={l_max} need at least {need} angular nodes, got {m}"
        )));
    }
    Ok(())
}

/// Projects a field onto the channels `l_min..=l_max`:
/// `f_l(r) = √(2π)/M Σ_k Φ₁(r, φ_k) e^{−ilφ_k}` and likewise `g_l` with mode
/// `l + 1` of `Φ₂`.
pub fn decompose(field: &SpinorField, l_min: i32, l_max: i32) -> Result<ChannelSet> {
    if l_min > l_max {
        return Err(Error::InvalidParameter(format!("empty channel range {l_min}..={l_max}")));
    }
    let m = field.angles;
    check_angles(m, l_min, l_max)?;
    let nr = field.grid.len();
    let scale = (2.0 * PI).sqrt() / m as f64;
    let mut channels = BTreeMap::new();
    for l in l_min..=l_max {
        let tw_f = twiddles(-(l as i64), m);
        let tw_g = twiddles(-(l as i64 + 1), m);
        let mut f = Vec::with_capacity(nr);
        let mut g = Vec::with_capacity(nr);
        for j in 0..nr {
            let row = j * m..(j + 1) * m;
            let a: Complex64 = field.upper[row.clone()].iter().zip(&tw_f).map(|(v, t)| v * t).sum();
            let b: Complex64 = field.lower[row].iter().zip(&tw_g).map(|(v, t)| v * t).sum();
            f.push(a * scale);
            g.push(b * scale);
        }
        channels.insert(l, RadialSpinor { grid: field.grid.clone(), f, g });
    }
    Ok(ChannelSet { grid: field.grid.clone(), l_min, l_max, channels })
}

/// Inverse of [`decompose`]: `Φ₁ = (2π)^{−1/2} Σ_l f_l e^{ilφ}`,
/// `Φ₂ = (2π)^{−1/2} Σ_l g_l e^{i(l+1)φ}` on `angles` nodes.
pub fn synthesize(set: &ChannelSet, angles: usize) -> Result<SpinorField> {
    if !set.channels.is_empty() {
        check_angles(angles, set.l_min, set.l_max)?;
    }
    let mut field = SpinorField::zeros(set.grid.clone(), angles)?;
    let scale = 1.0 / (2.0 * PI).sqrt();
    let m = angles;
    for (&l, s) in &set.channels {
        let tw_f = twiddles(l as i64, m);
        let tw_g = twiddles(l as i64 + 1, m);
        for j in 0..set.grid.len() {
            let (a, b) = (s.f[j] * scale, s.g[j] * scale);
            for k in 0..m {
                field.upper[j * m + k] += a * tw_f[k];
                field.lower[j * m + k] += b * tw_g[k];
            }
        }
    }
    Ok(field)
}

/// `e^{i mode φ_k}` for `k = 0..m`, with the exponent reduced mod `m` first so
/// that equal residues give bit-identical factors.
fn twiddles(mode: i64, m: usize) -> Vec<Complex64> {
    (0..m)
        .map(|k| {
            let idx = (mode * k as i64).rem_euclid(m as i64);
            Complex64::from_polar(1.0, angle(idx as usize, m))
        })
        .collect()
}

/// `‖∇_A Φ‖_{L²}` for the field represented by `set`: each scalar mode
/// `h(r) e^{imφ}` contributes `∫ (|h'|² + ((m + α)/r)² |h|²) r dr`, with `m = l`
/// for `f_l` and `m = l + 1` for `g_l`.
pub fn magnetic_gradient_norm(set: &ChannelSet, alpha: f64) -> f64 {
    let grid = &set.grid;
    let r = grid.nodes();
    let w = grid.weights();
    let mut total = 0.0;
    for (&l, s) in &set.channels {
        for (h, m) in [(&s.f, l as f64), (&s.g, l as f64 + 1.0)] {
            let dh = grid.derivative(h);
            let k = m + alpha;
            for j in 0..r.len() {
                let c = k / r[j];
                total += w[j] * (dh[j].norm_sqr() + c * c * h[j].norm_sqr());
            }
        }
    }
    total.sqrt()
}

#[derive(Serialize, Deserialize)]
struct ChannelRepr {
    l: i32,
    f_re: Vec<f64>,
    f_im: Vec<f64>,
    g_re: Vec<f64>,
    g_im: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct ChannelSetRepr {
    grid: GridSpec,
    l_min: i32,
    l_max: i32,
    channels: Vec<ChannelRepr>,
}

#[derive(Serialize, Deserialize)]
struct FieldRepr {
    grid: GridSpec,
    angles: usize,
    upper_re: Vec<f64>,
    upper_im: Vec<f64>,
    lower_re: Vec<f64>,
    lower_im: Vec<f64>,
}

fn split(v: &[Complex64]) -> (Vec<f64>, Vec<f64>) {
    v.iter().map(|z| (z.re, z.im)).unzip()
}

fn join(re: Vec<f64>, im: Vec<f64>) -> Vec<Complex64> {
    re.into_iter().zip(im).map(|(a, b)| Complex64::new(a, b)).collect()
}

impl Serialize for ChannelSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let channels = self
            .channels
            .iter()
            .map(|(&l, c)| {
                let (f_re, f_im) = split(&c.f);
                let (g_re, g_im) = split(&c.g);
                ChannelRepr { l, f_re, f_im, g_re, g_im }
            })
            .collect();
        ChannelSetRepr { grid: self.grid.spec(), l_min: self.l_min, l_max: self.l_max, channels }
            .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ChannelSet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let r = ChannelSetRepr::deserialize(d)?;
        let grid = Arc::new(RadialGrid::new(r.grid).map_err(D::Error::custom)?);
        let mut chans = Vec::with_capacity(r.channels.len());
        for c in r.channels {
            let s = RadialSpinor::new(grid.clone(), join(c.f_re, c.f_im), join(c.g_re, c.g_im))
                .map_err(D::Error::custom)?;
            chans.push((c.l, s));
        }
        let mut set = ChannelSet::from_channels(grid, chans).map_err(D::Error::custom)?;
        if !set.channels.is_empty() && (r.l_min > set.l_min || r.l_max < set.l_max) {
            return Err(D::Error::custom("channel outside declared l range"));
        }
        for l in r.l_min..=r.l_max {
            set.channels.entry(l).or_insert_with(|| RadialSpinor::zeros(set.grid.clone()));
        }
        set.l_min = r.l_min;
        set.l_max = r.l_max;
        Ok(set)
    }
}

impl Serialize for SpinorField {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let (upper_re, upper_im) = split(&self.upper);
        let (lower_re, lower_im) = split(&self.lower);
        FieldRepr { grid: self.grid.spec(), angles: self.angles, upper_re, upper_im, lower_re, lower_im }
            .serialize(s)
    }
}

impl<'de> Deserialize<'de> for SpinorField {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let r = FieldRepr::deserialize(d)?;
        let grid = Arc::new(RadialGrid::new(r.grid).map_err(D::Error::custom)?);
        SpinorField::new(grid, r.angles, join(r.upper_re, r.upper_im), join(r.lower_re, r.lower_im))
            .map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grids::GridSpec;

    fn grid() -> Arc<RadialGrid> {
        Arc::new(RadialGrid::new(GridSpec::composite(10.0, 160)).unwrap())
    }

    #[test]
    fn radial_field_lands_in_channel_zero() {
        let f = SpinorField::from_fn(grid(), 16, |r, _| {
            (Complex64::new((-r * r).exp(), 0.0), Complex64::default())
        })
        .unwrap();
        let set = decompose(&f, -2, 2).unwrap();
        for (l, s) in set.iter() {
            let nf = s.l2_norm();
            if l == 0 {
                assert!(nf > 0.1);
                assert!(s.g.iter().all(|z| z.norm() < 1e-15));
            } else {
                assert!(nf < 1e-14, "l={l}");
            }
        }
    }

    #[test]
    fn lower_mode_one_belongs_to_channel_zero() {
        let f = SpinorField::from_fn(grid(), 16, |r, phi| {
            (Complex64::default(), Complex64::from_polar((-r).exp(), phi))
        })
        .unwrap();
        let set = decompose(&f, -2, 2).unwrap();
        assert!(set.get(0).unwrap().g.iter().any(|z| z.norm() > 0.1));
        assert!((set.norm_sqr() - f.norm_sqr()).abs() < 1e-12 * f.norm_sqr());
    }

    #[test]
    fn too_few_angles_is_aliasing() {
        let f = SpinorField::zeros(grid(), 8).unwrap();
        assert!(matches!(decompose(&f, -3, 3), Err(Error::Aliasing(_))));
    }

    #[test]
    fn empty_set_synthesizes_zero() {
        let f = synthesize(&ChannelSet::empty(grid()), 8).unwrap();
        assert!(f.upper.iter().chain(&f.lower).all(|z| *z == Complex64::default()));
    }

    #[test]
    fn json_round_trip() {
        let f = SpinorField::from_fn(grid(), 12, |r, phi| {
            (Complex64::from_polar(r, 2.0 * phi), Complex64::new(0.0, r.sin()))
        })
        .unwrap();
        let set = decompose(&f, -1, 1).unwrap();
        let back: ChannelSet = serde_json::from_str(&serde_json::to_string(&set).unwrap()).unwrap();
        assert_eq!(back, set);
        let fb: SpinorField = serde_json::from_str(&serde_json::to_string(&f).unwrap()).unwrap();
        assert_eq!(fb, f);
    }

    #[test]
    fn gradient_of_gaussian() {
        let g = Arc::new(RadialGrid::new(GridSpec::composite(40.0, 4000)).unwrap());
        let s = RadialSpinor::from_fn(g.clone(), |r| (Complex64::new((-0.5 * r * r).exp(), 0.0), Complex64::default()));
        let set = ChannelSet::from_channels(g, [(0, s)]).unwrap();
        let v = magnetic_gradient_norm(&set, 0.0);
        assert!((v - 0.5f64.sqrt()).abs() < 1e-4, "{v}");
    }
}
