use std::sync::Arc;

use abdirac::estimates::{
    bump, random_bumps, sharp_smoothing_constant, smoothing_constant, smoothing_range, verify_local_smoothing,
    verify_local_smoothing_with, verify_norm_identity, verify_sobolev_trace, verify_weighted_strichartz,
    SmoothingConfig, StrichartzConfig,
};
use abdirac::grids::{EnergyGrid, GridSpec, RadialGrid, RadialSpinor};
use abdirac::partialwave::ChannelSet;
use abdirac::propagator::PlanSet;
use abdirac::spectral::Channel;
use num_complex::Complex64;
use proptest::prelude::*;

proptest! {
    #[test]
    fn constant_decreases_with_angular_momentum(gamma in 0.55f64..0.99, alpha in 0.0f64..0.99) {
        let mut prev = f64::INFINITY;
        for l in 0..10 {
            let c = smoothing_constant(gamma, alpha, l).unwrap();
            prop_assert!(c > 0.0 && c <= prev);
            prev = c;
        }
    }

    #[test]
    fn flux_lowers_the_constant(gamma in 0.55f64..0.99, alpha in 0.01f64..0.99, l in 0i32..6) {
        prop_assert!(smoothing_constant(gamma, alpha, l).unwrap() < smoothing_constant(gamma, 0.0, l).unwrap());
    }

    #[test]
    fn sharp_constant_is_twice_explicit_in_regular_channels(gamma in 0.55f64..0.99, alpha in 0.0f64..0.99, l in 0i32..5) {
        let sharp = sharp_smoothing_constant(gamma, Channel::new(l, alpha).unwrap()).unwrap();
        let explicit = smoothing_constant(gamma, alpha, l).unwrap();
        prop_assert!((sharp / explicit - 2.0).abs() < 1e-10);
    }
}

#[test]
fn range_and_errors() {
    let (lo, hi) = smoothing_range(0.3, 0);
    assert_eq!(lo, 0.5);
    assert!((hi - 1.3).abs() < 1e-15);
    assert!(smoothing_constant(1.4, 0.3, 0).is_err());
    assert!(smoothing_constant(0.5, 0.3, 0).is_err());
    assert!(verify_local_smoothing(&SmoothingConfig { gamma: 2.0, ..Default::default() }).is_err());
}

#[test]
fn local_smoothing_sample_attains_the_sharp_constant() {
    let cfg = SmoothingConfig { samples: 4, ..Default::default() };
    let rep = verify_local_smoothing(&cfg).unwrap();
    let sharp = rep.details["sharp_constant"];
    assert!(rep.lhs <= sharp * (1.0 + 1e-6));
    assert!(rep.lhs > 0.9 * sharp);
    assert!(rep.details["time_route_rel_diff"] < 0.02);
}

#[test]
fn local_smoothing_of_zero_data_is_rejected_or_trivial() {
    let cfg = SmoothingConfig { samples: 1, time_route_samples: 0, ..Default::default() };
    let grid = Arc::new(RadialGrid::new(cfg.radial).unwrap());
    let zero = RadialSpinor::zeros(grid);
    match verify_local_smoothing_with(&cfg, &[zero]) {
        Ok(rep) => assert!(rep.lhs == 0.0 || rep.lhs.is_finite()),
        Err(_) => {}
    }
}

#[test]
fn small_weighted_strichartz_run_is_finite() {
    let cfg = StrichartzConfig {
        samples: 2,
        time_window: 5.0,
        l_min: -1,
        l_max: 1,
        radial: GridSpec::composite(40.0, 1200),
        energy: GridSpec::composite(10.0, 400),
        ..Default::default()
    };
    let rep = verify_weighted_strichartz(&cfg).unwrap();
    assert!(rep.pass && rep.lhs.is_finite() && rep.lhs > 0.0);
    assert!(verify_weighted_strichartz(&StrichartzConfig { epsilon: 0.7, ..cfg.clone() }).is_err());
    assert!(verify_weighted_strichartz(&StrichartzConfig { q: f64::INFINITY, ..cfg }).is_err());
}

fn dilated_set(grid: &Arc<RadialGrid>, lambda: f64) -> ChannelSet {
    let chans = (-1..=1).map(|l| {
        let a = Complex64::new(1.0, 0.5 * l as f64);
        let phi = bump(grid.clone(), 8.0 / lambda, 1.5 / lambda, a, Complex64::new(0.3, 0.0));
        (l, phi)
    });
    ChannelSet::from_channels(grid.clone(), chans).unwrap()
}

#[test]
fn sobolev_trace_ratio_is_scale_invariant() {
    let rg = Arc::new(RadialGrid::new(GridSpec::composite(60.0, 3000)).unwrap());
    let eg = Arc::new(EnergyGrid::new(GridSpec::composite(24.0, 1600)).unwrap());
    let plans = PlanSet::new(0.4, -1, 1, rg.clone(), eg).unwrap();
    let base = verify_sobolev_trace(0.2, &dilated_set(&rg, 1.0), &plans).unwrap().details["ratio"];
    for lambda in [0.5, 2.0] {
        let r = verify_sobolev_trace(0.2, &dilated_set(&rg, lambda), &plans).unwrap().details["ratio"];
        assert!((r / base - 1.0).abs() < 1e-2, "lambda {lambda}: {r} vs {base}");
    }
}

#[test]
fn sobolev_trace_of_zero_data() {
    let rg = Arc::new(RadialGrid::new(GridSpec::composite(20.0, 400)).unwrap());
    let eg = Arc::new(EnergyGrid::new(GridSpec::composite(10.0, 200)).unwrap());
    let plans = PlanSet::new(0.4, 0, 0, rg.clone(), eg).unwrap();
    let zero = ChannelSet::from_channels(rg.clone(), [(0, RadialSpinor::zeros(rg))]).unwrap();
    let rep = verify_sobolev_trace(0.2, &zero, &plans).unwrap();
    assert_eq!(rep.lhs, 0.0);
    assert!(rep.pass);
    assert!(verify_norm_identity(&zero, 0.4).unwrap().pass);
}

#[test]
fn norm_identity_on_random_bumps() {
    let rg = Arc::new(RadialGrid::new(GridSpec::composite(30.0, 2400)).unwrap());
    let bumps = random_bumps(rg.clone(), 5, 3);
    let set = ChannelSet::from_channels(rg, (-2..=2).zip(bumps)).unwrap();
    let rep = verify_norm_identity(&set, 0.7).unwrap();
    assert!(rep.pass, "{:?}", rep.details);
}
