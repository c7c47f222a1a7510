use abdirac::specfun::{
    bessel_j, gamma_fn, gauss_2f1, gauss_2f1_at_one, BesselOrder, HypergeometricParams,
};
use proptest::prelude::*;

fn j(nu: f64, x: f64) -> f64 {
    bessel_j(BesselOrder::new(nu).unwrap(), x)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn bessel_three_term_recurrence(nu in 1.0f64..8.0, x in 0.5f64..30.0) {
        let lhs = j(nu - 1.0, x) + j(nu + 1.0, x);
        let rhs = 2.0 * nu / x * j(nu, x);
        prop_assert!((lhs - rhs).abs() < 1e-11 * (1.0 + 2.0 * nu / x), "{lhs} vs {rhs}");
    }

    #[test]
    fn bessel_is_bounded(nu in 0.0f64..10.0, x in 0.0f64..50.0) {
        prop_assert!(j(nu, x).abs() <= 1.0);
    }

    #[test]
    fn gamma_recurrence(x in 0.1f64..20.0) {
        let a = gamma_fn(x + 1.0).unwrap();
        let b = x * gamma_fn(x).unwrap();
        prop_assert!(((a - b) / a).abs() < 1e-13);
    }

    #[test]
    fn hypergeometric_symmetric_in_a_b(a in -2.0f64..3.0, b in -2.0f64..3.0, c in 0.3f64..4.0, z in 0.0f64..0.9) {
        let p = HypergeometricParams::new(a, b, c).unwrap();
        let q = HypergeometricParams::new(b, a, c).unwrap();
        let (u, v) = (gauss_2f1(p, z).unwrap(), gauss_2f1(q, z).unwrap());
        prop_assert!((u - v).abs() <= 1e-12 * u.abs().max(1.0));
    }

    #[test]
    fn hypergeometric_value_at_one_is_the_limit(a in -0.9f64..2.0, b in -0.9f64..2.0, s in 0.6f64..2.5) {
        let p = HypergeometricParams::new(a, b, a + b + s).unwrap();
        let at_one = gauss_2f1_at_one(p).unwrap();
        let near = gauss_2f1(p, 1.0 - 1e-9).unwrap();
        prop_assert!((at_one - near).abs() < 1e-4 * at_one.abs().max(1.0));
    }
}

#[test]
fn known_values() {
    let pi = std::f64::consts::PI;
    assert!((gamma_fn(0.5).unwrap() - pi.sqrt()).abs() < 1e-15);
    assert!((j(0.5, 1.3) - (2.0 / (pi * 1.3)).sqrt() * 1.3f64.sin()).abs() < 1e-15);
    assert!((j(0.0, 2.404825557695773)).abs() < 1e-14);
    let p = HypergeometricParams::new(1.0, 1.0, 2.0).unwrap();
    assert!((gauss_2f1(p, 0.5).unwrap() - 2.0 * 2f64.ln()).abs() < 1e-14);
}

#[test]
fn invalid_arguments_are_rejected() {
    assert!(BesselOrder::new(-0.5).is_err());
    assert!(BesselOrder::new(f64::NAN).is_err());
    assert!(gamma_fn(0.0).is_err());
    assert!(gamma_fn(-3.0).is_err());
    let divergent = HypergeometricParams::new(1.0, 1.0, 1.5).unwrap();
    assert!(gauss_2f1_at_one(divergent).is_err());
}
