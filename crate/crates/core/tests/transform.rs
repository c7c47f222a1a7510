use std::sync::Arc;

use abdirac::estimates::bump;
use abdirac::grids::{EnergyGrid, GridSpec, RadialGrid};
use abdirac::spectral::{apply_radial_dirac, eigenfunction, Channel, SpectralPlan};
use num_complex::Complex64;
use proptest::prelude::*;

fn grids() -> (Arc<RadialGrid>, Arc<EnergyGrid>) {
    (
        Arc::new(RadialGrid::new(GridSpec::composite(40.0, 1600)).unwrap()),
        Arc::new(EnergyGrid::new(GridSpec::composite(16.0, 1200)).unwrap()),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn isometry_and_round_trip(
        l in -4i32..=4,
        alpha in 0.0f64..1.0,
        r0 in 8.0f64..20.0,
        sigma in 0.8f64..1.5,
        re in -1.0f64..1.0,
        im in -1.0f64..1.0,
    ) {
        let (rg, eg) = grids();
        let plan = SpectralPlan::new(Channel::new(l, alpha).unwrap(), rg.clone(), eg);
        let phi = bump(rg, r0, sigma, Complex64::new(1.0, 0.0), Complex64::new(re, im));
        let c = plan.forward(&phi);
        prop_assert!((c.l2_norm() - phi.l2_norm()).abs() < 1e-6 * phi.l2_norm());
        prop_assert!(plan.inverse(&c).rel_diff(&phi) < 1e-5);
    }
}

#[test]
fn transform_is_linear() {
    let (rg, eg) = grids();
    let plan = SpectralPlan::new(Channel::new(1, 0.4).unwrap(), rg.clone(), eg);
    let a = bump(rg.clone(), 10.0, 1.0, Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
    let b = bump(rg, 14.0, 0.7, Complex64::new(0.0, 0.0), Complex64::new(0.0, 1.0));
    let z = Complex64::new(0.3, -2.0);
    let lhs = plan.forward(&a.axpy(z, &b));
    let rhs = plan.forward(&a).axpy(z, &plan.forward(&b));
    assert!(lhs.axpy(Complex64::new(-1.0, 0.0), &rhs).l2_norm() < 1e-12 * rhs.l2_norm());
}

fn max_interior_residual(ch: Channel, h: f64) -> f64 {
    let grid = Arc::new(RadialGrid::new(GridSpec::uniform(20.0, (20.0 / h).round() as usize)).unwrap());
    let chi = eigenfunction(ch, 1.0, grid.clone()).unwrap();
    let d = apply_radial_dirac(ch, &chi);
    let r = grid.nodes();
    (0..r.len())
        .filter(|&j| (1.0..=19.0).contains(&r[j]))
        .map(|j| (d.f[j] - chi.f[j]).norm().max((d.g[j] - chi.g[j]).norm()))
        .fold(0.0, f64::max)
}

#[test]
fn eigenfunction_residual_is_second_order_in_regular_channels() {
    for (l, alpha) in [(0, 0.3), (2, 0.5), (-2, 0.3), (-1, 0.0)] {
        let ch = Channel::new(l, alpha).unwrap();
        let coarse = max_interior_residual(ch, 0.02);
        let fine = max_interior_residual(ch, 0.01);
        let order = (coarse / fine).log2();
        assert!((1.9..2.1).contains(&order), "l={l} alpha={alpha}: order {order}");
    }
}

#[test]
fn channel_indices() {
    let ch = Channel::new(-1, 0.3).unwrap();
    assert!(ch.critical());
    assert!((ch.nu_f() - 0.7).abs() < 1e-15 && (ch.nu_g() - 0.3).abs() < 1e-15);
    assert!(!Channel::new(-1, 0.0).unwrap().critical());
    assert!(Channel::new(0, f64::NAN).is_err());
}
