use std::f64::consts::PI;

use harvest_core::quadrature::{
    a_shifted, integrate, integrate_path, x_shifted_residue_free, QuadratureSettings, Tolerance,
};
use harvest_core::wightman::Kernel;
use harvest_core::{DetectorConfig, HarvestError, Scenario};
use num_complex::Complex64;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn settings() -> QuadratureSettings {
    QuadratureSettings::default()
}

/// Exact inertial response (1 − √π z·erfcx z)/(4π), z = σΩ.
fn inertial_a_exact(z: f64) -> f64 {
    let erfcx = statrs::function::erf::erfc(z) * (z * z).exp();
    (1.0 - PI.sqrt() * z * erfcx) / (4.0 * PI)
}

#[test]
fn small_kappa_response_matches_inertial_closed_form() {
    let cfg = DetectorConfig::new(Scenario::ParallelAccel, 1e-6, 1.0, 1.0, 10.0, 0.01);
    let a = a_shifted(&cfg, &settings()).unwrap();
    let exact = inertial_a_exact(1.0);
    assert!((a.complex().re - exact).abs() < 1e-3 * exact, "{} {}", a.complex(), exact);
    let inertial = DetectorConfig::new(Scenario::Inertial, 0.0, 1.0, 1.0, 10.0, 0.01);
    let b = a_shifted(&inertial, &settings()).unwrap();
    assert!((b.complex().re - exact).abs() < 1e-9 * exact);
}

#[test]
fn response_matches_saddle_at_large_gap() {
    let cfg = DetectorConfig::new(Scenario::AntiParallelAccel, 0.001, 1.0, 1250.0, 1000.0, 0.01);
    let a = a_shifted(&cfg, &settings()).unwrap();
    let g: f64 = 0.001;
    let saddle = (0.5 * g / 1.25f64.sin()).powi(2) / (2.0 * PI);
    assert!((a.complex().re - saddle).abs() < 0.05 * saddle);
    assert!((a.complex().re - 4.42e-8).abs() < 0.01e-8);
    assert!(a.complex().im.abs() < 1e-8 * a.complex().re);
}

#[test]
fn response_near_window_edge_converges() {
    let cfg = DetectorConfig::new(Scenario::ParallelAccel, 1.0, 1.0, PI - 1e-3, 10.0, 0.01);
    let a = a_shifted(&cfg, &settings()).unwrap();
    assert!(a.complex().re > 0.0);
}

#[test]
fn response_rejects_w_beyond_pi() {
    let cfg = DetectorConfig::new(Scenario::ParallelAccel, 1.0, 1.0, 3.2, 10.0, 0.01);
    assert!(matches!(a_shifted(&cfg, &settings()), Err(HarvestError::InvalidParameter(_))));
}

#[test]
fn response_is_scenario_independent() {
    let mut vals = Vec::new();
    for s in [
        Scenario::ParallelAccel,
        Scenario::AntiParallelAccel,
        Scenario::DeSitterComoving,
        Scenario::ThermalInertial,
    ] {
        let cfg = DetectorConfig::new(s, 0.3, 1.5, 0.8, 3.0, 0.01);
        vals.push(a_shifted(&cfg, &settings()).unwrap().complex());
    }
    for v in &vals[1..] {
        assert_eq!(*v, vals[0]);
    }
}

#[test]
fn parallel_coherence_matches_saddle_at_large_gap() {
    let cfg = DetectorConfig::new(Scenario::ParallelAccel, 0.001, 1.0, 1250.0, 1000.0, 0.01);
    let x = x_shifted_residue_free(&cfg, &settings()).unwrap();
    let saddle = -1.0 / (2.0 * PI) * 1e-6;
    assert!((x.complex() - saddle).norm() < 0.05 * saddle.abs(), "{}", x.complex());
    assert!(x.residue().is_zero());
}

#[test]
fn thermal_factorizes() {
    // With D_th x-independent, the nested and factorized forms agree.
    let cfg = DetectorConfig::new(Scenario::ThermalInertial, 0.5, 1.0, 0.7, 3.0, 0.01);
    let x = x_shifted_residue_free(&cfg, &settings()).unwrap().complex();
    let g = 0.5;
    let a = 1.5;
    let r = 12.0 * g / 2f64.sqrt();
    // real axis with a dip under the pole at v = a/2
    let (pole, h) = (0.5 * a, 0.5 * g);
    let path = [
        c(0.0, 0.0),
        c(pole - h, 0.0),
        c(pole - h, -h),
        c(pole + h, -h),
        c(pole + h, 0.0),
        c(r, 0.0),
    ];
    let outer = integrate_path(
        |v| {
            let inner = integrate(
                |u| {
                    Kernel::Thermal.reduced(c(u, 0.35), v, 0.0, a).unwrap() * (-(u / g).powi(2)).exp()
                },
                &[-r, 0.0, r],
                &Tolerance::new(1e-16, 1e-11, 500),
            );
            inner.value * (-(v * v) / (g * g)).exp()
        },
        &path,
        &Tolerance::new(1e-16, 1e-10, 500),
    );
    let nested = outer.value * (-1.0 / (4.0 * PI * PI));
    assert!((nested - x).norm() < 1e-8 * x.norm(), "{} {}", nested, x);
}

#[test]
fn antiparallel_near_resonance_sign_structure() {
    let kappa = 0.001;
    let omega = 1250.0;
    let lcrit = 2.0 / kappa * (1.0 - 1.25f64.cos());
    let re = |dl: f64| {
        let cfg = DetectorConfig::new(Scenario::AntiParallelAccel, kappa, 1.0, omega, lcrit + dl, 0.01);
        x_shifted_residue_free(&cfg, &settings()).unwrap().complex().re
    };
    // the corridor half-width is about σ here, so −0.2 sits inside it
    assert!(re(-1.0).is_finite() && re(-1.0) < 0.0);
    assert!(re(-0.2) > 0.0);
}

#[test]
fn truncation_radius_is_converged() {
    let cfg = DetectorConfig::new(Scenario::ParallelAccel, 0.4, 1.0, 1.0, 2.0, 0.01);
    let base = settings();
    let mut wide = settings();
    wide.truncation_radius = 24.0;
    let a = x_shifted_residue_free(&cfg, &base).unwrap().complex();
    let b = x_shifted_residue_free(&cfg, &wide).unwrap().complex();
    assert!((a - b).norm() < 1e-12 + 1e-9 * a.norm());
}

#[test]
fn settings_validation() {
    let mut s = settings();
    s.epsilon_ladder = vec![1e-3, 1e-2];
    assert!(s.validate().is_err());
    s.epsilon_ladder = vec![1e-2, 1e-3];
    assert!(s.validate().is_ok());
    s.rel_tol = 0.0;
    assert!(s.validate().is_err());
}
