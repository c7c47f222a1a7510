use std::sync::Arc;

use abdirac::grids::{GridSpec, RadialGrid};
use abdirac::partialwave::{decompose, min_angles, synthesize, SpinorField};
use num_complex::Complex64;

fn field(grid: Arc<RadialGrid>, angles: usize) -> SpinorField {
    SpinorField::from_fn(grid, angles, |r, phi| {
        let g = (-(r - 5.0).powi(2)).exp();
        let up = Complex64::from_polar(g, 2.0 * phi) + Complex64::new(0.5 * g, 0.0);
        let down = Complex64::from_polar(0.3 * g, -phi);
        (up, down)
    })
    .unwrap()
}

#[test]
fn decompose_synthesize_round_trip_preserves_norm() {
    let grid = Arc::new(RadialGrid::new(GridSpec::composite(15.0, 304)).unwrap());
    let angles = min_angles(-3, 3).max(16);
    let f = field(grid, angles);
    let set = decompose(&f, -3, 3).unwrap();
    assert!((set.l2_norm() - f.l2_norm()).abs() < 1e-12 * f.l2_norm());
    let back = synthesize(&set, angles).unwrap();
    let err: f64 = back.upper.iter().zip(&f.upper).chain(back.lower.iter().zip(&f.lower)).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    assert!(err < 1e-12, "{err}");
}

#[test]
fn rotation_acts_diagonally_on_channels() {
    let grid = Arc::new(RadialGrid::new(GridSpec::composite(15.0, 200)).unwrap());
    let angles = 32;
    let f = field(grid, angles);
    let set = decompose(&f, -3, 3).unwrap();
    let rot = decompose(&f.rotated(1), -3, 3).unwrap();
    for (l, s) in set.iter() {
        let r = rot.get(l).unwrap();
        assert!((r.l2_norm() - s.l2_norm()).abs() < 1e-12 * (1.0 + s.l2_norm()));
    }
}

#[test]
fn too_few_angles_are_rejected() {
    let grid = Arc::new(RadialGrid::new(GridSpec::composite(15.0, 200)).unwrap());
    let f = field(grid, 4);
    assert!(decompose(&f, -5, 5).is_err());
}
