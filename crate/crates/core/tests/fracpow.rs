use std::sync::Arc;

use abdirac::estimates::bump;
use abdirac::fracpow::{apply_fractional_power, kernel_closed_form, kernel_exponent_range, weber_schafheitlin};
use abdirac::grids::{EnergyGrid, GridSpec, RadialGrid};
use abdirac::spectral::{apply_radial_dirac, BranchConvention, Channel, SpectralPlan};
use num_complex::Complex64;
use proptest::prelude::*;

proptest! {
    #[test]
    fn kernel_is_symmetric(l in -3i32..=3, alpha in 0.05f64..0.95, t in 0.05f64..0.95, r in 0.2f64..3.0, s in 0.2f64..3.0) {
        let ch = Channel::new(l, alpha).unwrap();
        let (lo, hi) = kernel_exponent_range(ch);
        let p = lo + t * (hi - lo);
        prop_assume!((r - s).abs() > 1e-3);
        let a = kernel_closed_form(ch, p, r, s).unwrap().matrix();
        let b = kernel_closed_form(ch, p, s, r).unwrap().matrix();
        for i in 0..2 {
            for j in 0..2 {
                prop_assert_eq!(a[i][j], b[j][i]);
            }
        }
    }
}

#[test]
fn kernel_rejects_divergent_exponents() {
    let ch = Channel::new(0, 0.3).unwrap();
    assert!(kernel_closed_form(ch, 0.1, 1.0, 2.0).is_err());
    assert!(kernel_closed_form(ch, -2.7, 1.0, 2.0).is_err());
}

#[test]
fn weber_schafheitlin_elementary_case() {
    // ∫ J_0(rt) J_1(st) dt = 1/s for r < s.
    let v = weber_schafheitlin(0.0, 1.0, 0.0, 0.5, 2.0).unwrap();
    assert!((v - 0.5).abs() < 1e-13, "{v}");
}

#[test]
fn powers_compose_and_first_power_matches_operator_norm() {
    let rg = Arc::new(RadialGrid::new(GridSpec::composite(40.0, 1600)).unwrap());
    let eg = Arc::new(EnergyGrid::new(GridSpec::composite(16.0, 1200)).unwrap());
    let ch = Channel::new(3, 0.4).unwrap();
    let plan = SpectralPlan::new(ch, rg.clone(), eg);
    let phi = bump(rg, 15.0, 1.0, Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.5));
    let conv = BranchConvention::Uniform;
    let a = apply_fractional_power(&plan, 0.3, &apply_fractional_power(&plan, 0.4, &phi, conv), conv);
    let b = apply_fractional_power(&plan, 0.7, &phi, conv);
    assert!(a.rel_diff(&b) < 1e-4, "{}", a.rel_diff(&b));
    let one = apply_fractional_power(&plan, 1.0, &phi, conv).l2_norm();
    let direct = apply_radial_dirac(ch, &phi).l2_norm();
    assert!((one / direct - 1.0).abs() < 1e-3, "{one} vs {direct}");
}
