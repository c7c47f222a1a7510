use std::ffi::CStr;
use std::ptr;

use abdirac_ffi::*;

#[test]
fn scalar_functions() {
    let mut v = 0.0;
    unsafe {
        assert_eq!(abd_gamma(0.5, &mut v), AbdStatus::Ok);
        assert!((v - std::f64::consts::PI.sqrt()).abs() < 1e-14);
        assert_eq!(abd_bessel_j(0.5, 2.0, &mut v), AbdStatus::Ok);
        assert!((v - (2.0 / std::f64::consts::PI / 2.0).sqrt() * 2f64.sin()).abs() < 1e-14);
        assert_eq!(abd_hyp2f1(1.0, 1.0, 2.0, 0.5, &mut v), AbdStatus::Ok);
        assert!((v - 2.0 * 2f64.ln()).abs() < 1e-13);
        assert_eq!(abd_smoothing_constant(1.0, 0.5, 0, &mut v), AbdStatus::Ok);
        assert!((v - 2.0 * std::f64::consts::PI / 3.0).abs() < 1e-13);
        assert_eq!(abd_weber_schafheitlin(1.0, 1.0, 0.5, 1.0, 2.0, &mut v), AbdStatus::Ok);
        assert!((v - 0.193143383501).abs() < 1e-9);
    }
}

#[test]
fn errors_set_status_and_message() {
    let mut v = 0.0;
    unsafe {
        assert_eq!(abd_gamma(-2.0, &mut v), AbdStatus::Pole);
        assert_eq!(abd_hyp2f1_at_one(1.0, 1.0, 1.5, &mut v), AbdStatus::Domain);
        let msg = CStr::from_ptr(abd_last_error()).to_str().unwrap();
        assert!(msg.contains("diverges"), "{msg}");
        assert_eq!(abd_smoothing_constant(0.4, 0.3, 0, &mut v), AbdStatus::InvalidParameter);
        assert_eq!(abd_gamma(1.0, ptr::null_mut()), AbdStatus::NullPointer);
        let version = CStr::from_ptr(abd_version()).to_str().unwrap();
        assert!(version.starts_with("abdirac "));
    }
}

#[test]
fn transform_handle_round_trip() {
    unsafe {
        let mut h: *mut AbdTransform = ptr::null_mut();
        assert_eq!(abd_transform_new(1, 0.3, 30.0, 800, 16.0, 800, AbdScheme::CompositeGauss, &mut h), AbdStatus::Ok);
        let n = abd_transform_radial_len(h);
        let m = abd_transform_energy_len(h);
        assert_eq!((n, m), (800, 800));
        let mut r = vec![0.0; n];
        assert_eq!(abd_transform_radial_nodes(h, r.as_mut_ptr(), n), AbdStatus::Ok);
        assert_eq!(abd_transform_radial_nodes(h, r.as_mut_ptr(), n - 1), AbdStatus::InvalidParameter);
        let mut f = vec![0.0; 2 * n];
        let mut g = vec![0.0; 2 * n];
        for (j, &x) in r.iter().enumerate() {
            let b = (-(x - 10.0f64).powi(2)).exp();
            f[2 * j] = b;
            g[2 * j + 1] = 0.5 * b;
        }
        let mut plus = vec![0.0; 2 * m];
        let mut minus = vec![0.0; 2 * m];
        assert_eq!(abd_transform_forward(h, f.as_ptr(), g.as_ptr(), plus.as_mut_ptr(), minus.as_mut_ptr()), AbdStatus::Ok);
        let mut f2 = vec![0.0; 2 * n];
        let mut g2 = vec![0.0; 2 * n];
        assert_eq!(abd_transform_inverse(h, plus.as_ptr(), minus.as_ptr(), f2.as_mut_ptr(), g2.as_mut_ptr()), AbdStatus::Ok);
        let err = f.iter().zip(&f2).chain(g.iter().zip(&g2)).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-6, "{err}");

        assert_eq!(abd_transform_evolve(h, 0.0, f.as_ptr(), g.as_ptr(), f2.as_mut_ptr(), g2.as_mut_ptr()), AbdStatus::Ok);
        let err = f.iter().zip(&f2).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-6, "{err}");
        abd_transform_free(h);
        abd_transform_free(ptr::null_mut());
    }
}

#[test]
fn header_is_generated() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/abdirac.h")).unwrap();
    for name in ["abd_transform_new", "abd_bessel_j", "AbdStatus", "ABDIRAC_H"] {
        assert!(header.contains(name), "{name}");
    }
}
