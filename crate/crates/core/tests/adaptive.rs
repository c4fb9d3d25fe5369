use std::f64::consts::PI;

use harvest_core::quadrature::{integrate, integrate_path, Tolerance};
use num_complex::Complex64;

fn tol() -> Tolerance {
    Tolerance::new(1e-14, 1e-12, 500)
}

#[test]
fn gaussian_integral() {
    let est = integrate(
        |x| Complex64::new((-x * x).exp(), 0.0),
        &[-10.0, 0.0, 10.0],
        &tol(),
    );
    assert!(est.converged);
    assert!((est.value.re - PI.sqrt()).abs() < 1e-13);
}

#[test]
fn oscillatory_phase() {
    // ∫ e^{-x²} e^{ikx} = √π e^{-k²/4}
    let k = 3.0;
    let est = integrate(
        |x| Complex64::new(0.0, k * x).exp() * (-x * x).exp(),
        &[-12.0, 12.0],
        &tol(),
    );
    assert!((est.value - PI.sqrt() * (-k * k / 4.0_f64).exp()).norm() < 1e-12);
}

#[test]
fn endpoint_singularity_converges() {
    // ∫₀¹ x^{-1/2} = 2
    let est = integrate(
        |x| Complex64::new(x.powf(-0.5), 0.0),
        &[0.0, 1.0],
        &Tolerance::new(1e-10, 1e-10, 2000),
    );
    assert!((est.value.re - 2.0).abs() < 1e-8, "{:?}", est);
}

#[test]
fn closed_contour_picks_up_residue() {
    // ∮ dz / z around the unit square = 2πi
    let v = [
        Complex64::new(1.0, -1.0),
        Complex64::new(1.0, 1.0),
        Complex64::new(-1.0, 1.0),
        Complex64::new(-1.0, -1.0),
        Complex64::new(1.0, -1.0),
    ];
    let est = integrate_path(|z| z.inv(), &v, &tol());
    assert!((est.value - Complex64::new(0.0, 2.0 * PI)).norm() < 1e-11);
}

#[test]
fn reports_non_convergence() {
    let est = integrate(
        |x| Complex64::new(1.0 / x, 0.0),
        &[0.0, 1.0],
        &Tolerance::new(1e-12, 1e-12, 20),
    );
    assert!(!est.converged);
}
