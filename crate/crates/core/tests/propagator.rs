use std::sync::Arc;

use abdirac::estimates::{bump, random_channel_set};
use abdirac::grids::{EnergyGrid, GridSpec, RadialGrid, RadialSpinor};
use abdirac::propagator::{
    evolve_oracle, evolve_spectral, evolve_trajectory, mixed_norm, select_convention, time_grid, NormKind,
    PlanSet,
};
use abdirac::spectral::{BranchConvention, Channel, SpectralPlan};
use num_complex::Complex64;
use proptest::prelude::*;

fn setup(l: i32, alpha: f64) -> (SpectralPlan, RadialSpinor) {
    setup_on(GridSpec::uniform(40.0, 2000), l, alpha)
}

fn setup_on(radial: GridSpec, l: i32, alpha: f64) -> (SpectralPlan, RadialSpinor) {
    let rg = Arc::new(RadialGrid::new(radial).unwrap());
    let eg = Arc::new(EnergyGrid::new(GridSpec::composite(12.0, 1200)).unwrap());
    let phi = bump(rg.clone(), 15.0, 1.0, Complex64::new(1.0, 0.0), Complex64::new(0.2, -0.4));
    (SpectralPlan::new(Channel::new(l, alpha).unwrap(), rg, eg), phi)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn spectral_flow_is_unitary_and_a_group(l in -3i32..=3, alpha in 0.0f64..0.99, s in -3.0f64..3.0, t in -3.0f64..3.0) {
        prop_assume!(!Channel::new(l, alpha).unwrap().critical());
        let (plan, phi) = setup_on(GridSpec::composite(40.0, 1600), l, alpha);
        let conv = BranchConvention::Signed;
        let us = evolve_spectral(&plan, &phi, s, conv);
        let drift = (us.l2_norm() - phi.l2_norm()).abs() / phi.l2_norm();
        prop_assert!(drift < 1e-5, "{drift}");
        let composed = evolve_spectral(&plan, &us, t, conv);
        let direct = evolve_spectral(&plan, &phi, s + t, conv);
        let err = composed.rel_diff(&direct);
        prop_assert!(err < 1e-4, "{err}");
    }
}

#[test]
fn spectral_flow_in_critical_channels() {
    for alpha in [0.3, 0.77] {
        let (plan, phi) = setup_on(GridSpec::composite(40.0, 1600), -1, alpha);
        let conv = BranchConvention::Signed;
        let us = evolve_spectral(&plan, &phi, 1.8, conv);
        assert!((us.l2_norm() - phi.l2_norm()).abs() < 1e-5 * phi.l2_norm());
        let composed = evolve_spectral(&plan, &us, -0.8, conv);
        let direct = evolve_spectral(&plan, &phi, 1.0, conv);
        assert!(composed.rel_diff(&direct) < 1e-3);
    }
}

#[test]
fn oracle_is_unitary_and_reversible() {
    let (_, phi) = setup(1, 0.3);
    let ch = Channel::new(1, 0.3).unwrap();
    let u = evolve_oracle(ch, &phi, 1.0, 0.01).unwrap();
    assert!((u.l2_norm() - phi.l2_norm()).abs() < 1e-12 * phi.l2_norm());
    let back = evolve_oracle(ch, &u, -1.0, 0.01).unwrap();
    assert!(back.rel_diff(&phi) < 1e-10);
}

#[test]
fn oracle_converges_at_second_order_in_time() {
    let (_, phi) = setup(0, 0.3);
    let ch = Channel::new(0, 0.3).unwrap();
    let u: Vec<RadialSpinor> =
        [0.04, 0.02, 0.01].iter().map(|&dt| evolve_oracle(ch, &phi, 1.0, dt).unwrap()).collect();
    let e1 = u[0].rel_diff(&u[1]);
    let e2 = u[1].rel_diff(&u[2]);
    let order = (e1 / e2).log2();
    assert!((1.8..2.2).contains(&order), "order {order}");
}

#[test]
fn spectral_flow_matches_oracle_in_regular_channel() {
    let (plan, phi) = setup(2, 0.5);
    let ch = Channel::new(2, 0.5).unwrap();
    let spectral = evolve_spectral(&plan, &phi, 1.0, BranchConvention::Signed);
    let oracle = evolve_oracle(ch, &phi, 1.0, 0.005).unwrap();
    assert!(spectral.rel_diff(&oracle) < 1e-2);
}

#[test]
fn convention_selection_prefers_signed() {
    let (plan, phi) = setup(0, 0.3);
    let choice = select_convention(&plan, &phi, 1.0, 0.005).unwrap();
    assert_eq!(choice.selected, BranchConvention::Signed);
    assert!(choice.discrepancy_signed < choice.discrepancy_uniform);
}

#[test]
fn oracle_requires_uniform_grid() {
    let rg = Arc::new(RadialGrid::new(GridSpec::composite(20.0, 400)).unwrap());
    let phi = bump(rg, 10.0, 1.0, Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
    assert!(evolve_oracle(Channel::new(0, 0.3).unwrap(), &phi, 1.0, 0.01).is_err());
}

#[test]
fn unweighted_mixed_norm_is_sqrt_time_times_data_norm() {
    let rg = Arc::new(RadialGrid::new(GridSpec::composite(40.0, 1600)).unwrap());
    let eg = Arc::new(EnergyGrid::new(GridSpec::composite(12.0, 800)).unwrap());
    let plans = PlanSet::new(0.3, -1, 1, rg.clone(), eg).unwrap();
    let f = random_channel_set(rg, -1, 1, 7).unwrap();
    let times = time_grid(0.0, 4.0, 41);
    let traj = evolve_trajectory(&plans, &f, &times, BranchConvention::Signed).unwrap();
    assert!(traj.norm_drift(f.l2_norm()) < 1e-6);
    let rec = mixed_norm(&traj, NormKind::Japanese { mu: 0.0 }, None).unwrap();
    let expected = 2.0 * f.l2_norm();
    assert!((rec.value - expected).abs() < 1e-5 * expected, "{} vs {expected}", rec.value);
}
