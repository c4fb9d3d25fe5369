use harvest_core::ExpComplex;
use num_complex::Complex64;

#[test]
fn round_trip_and_overflow() {
    let z = ExpComplex::from_complex(Complex64::new(3.0, -4.0));
    assert!((z.to_complex() - Complex64::new(3.0, -4.0)).norm() < 1e-14);
    assert!((z.ln_abs() - 5.0_f64.ln()).abs() < 1e-15);
    let big = ExpComplex::new(Complex64::new(-1.0, 0.0), 2000.0);
    assert_eq!(big.to_complex().re, f64::NEG_INFINITY);
    assert!((big.ln_abs() - 2000.0).abs() < 1e-12);
    let tiny = ExpComplex::new(Complex64::new(1.0, 1.0), -2000.0);
    assert_eq!(tiny.to_complex(), Complex64::new(0.0, 0.0));
}

#[test]
fn addition_across_scales() {
    let a = ExpComplex::new(Complex64::new(1.0, 0.0), 1000.0);
    let b = ExpComplex::new(Complex64::new(2.0, 0.0), 1000.0);
    assert!(((a + b).ln_abs() - (1000.0 + 3.0_f64.ln())).abs() < 1e-12);
    let c = ExpComplex::from_complex(Complex64::new(5.0, 0.0));
    assert_eq!((a + c).ln_abs(), a.ln_abs());
    assert!((a - a).is_zero());
    let p = a * b;
    assert!((p.ln_abs() - (2000.0 + 2.0_f64.ln())).abs() < 1e-12);
}
