use std::f64::consts::PI;

use harvest_core::detector::{light_cone, reduce, trajectory, unruh_temperature, window, Detector};
use harvest_core::{DetectorConfig, HarvestError, Scenario};
use proptest::prelude::*;

fn cfg(scenario: Scenario, kappa: f64, separation: f64) -> DetectorConfig {
    DetectorConfig::new(scenario, kappa, 1.0, 1.0, separation, 0.01)
}

#[test]
fn light_cone_matches_trajectory() {
    for scenario in [Scenario::ParallelAccel, Scenario::AntiParallelAccel] {
        let cfg = DetectorConfig::new(scenario, 0.7, 1.0, 1.0, 2.0, 0.01);
        for det in [Detector::A, Detector::B] {
            for tau in [-3.0, -0.2, 0.0, 0.5, 4.0] {
                let e = trajectory(&cfg, det, tau).unwrap();
                let (u, v) = light_cone(&cfg, det, tau).unwrap();
                assert!((u - (e.t - e.x)).abs() < 1e-12 * (1.0 + e.t.abs()));
                assert!((v - (e.t + e.x)).abs() < 1e-12 * (1.0 + e.t.abs()));
            }
        }
    }
}

#[test]
fn trajectory_at_origin() {
    for s in [Scenario::ParallelAccel, Scenario::AntiParallelAccel] {
        let c = cfg(s, 0.7, 3.0);
        let a = trajectory(&c, Detector::A, 0.0).unwrap();
        let b = trajectory(&c, Detector::B, 0.0).unwrap();
        assert_eq!((a.t, a.x), (0.0, 1.5));
        assert_eq!((b.t, b.x), (0.0, -1.5));
    }
}

#[test]
fn trajectory_hand_value() {
    let c = cfg(Scenario::ParallelAccel, 1.0, 2.0);
    let e = trajectory(&c, Detector::A, 1.0).unwrap();
    assert!((e.t - 1.0_f64.sinh()).abs() < 1e-15);
    assert!((e.t - 1.17520).abs() < 1e-5);
    assert!((e.x - 1.54308).abs() < 1e-5);
}

#[test]
fn trajectory_rejects_zero_kappa() {
    let c = cfg(Scenario::ParallelAccel, 0.0, 2.0);
    assert!(matches!(
        trajectory(&c, Detector::A, 0.3),
        Err(HarvestError::ZeroAcceleration(_))
    ));
}

#[test]
fn window_values() {
    let c = DetectorConfig::new(Scenario::ParallelAccel, 1.0, 2.0, 1.0, 5.0, 0.05);
    assert_eq!(window(&c, 0.0), 0.05);
    assert!((window(&c, 2.0) - 0.05 * (-0.5_f64).exp()).abs() < 1e-17);
    let mut prev = window(&c, 0.0);
    for i in 1..50 {
        let v = window(&c, i as f64 * 0.5);
        assert!(v < prev || v == 0.0);
        prev = v;
    }
}

#[test]
fn temperature() {
    assert_eq!(unruh_temperature(0.0), 0.0);
    assert!((unruh_temperature(2.0 * PI) - 1.0).abs() < 1e-15);
    assert!((unruh_temperature(1.0) - 0.159155).abs() < 1e-6);
}

#[test]
fn reduce_examples() {
    let p = reduce(&DetectorConfig::new(
        Scenario::AntiParallelAccel,
        0.001,
        1.0,
        1250.0,
        1000.0,
        0.01,
    ))
    .unwrap();
    assert!((p.a - 1.0).abs() < 1e-12);
    assert!((p.w - 1.25).abs() < 1e-12);
    assert!((p.g - 0.001).abs() < 1e-15);
    assert!((p.b - 0.5).abs() < 1e-12);

    let p = reduce(&DetectorConfig::new(
        Scenario::ParallelAccel,
        2.0,
        1.0,
        PI / 2.0,
        1.0,
        0.01,
    ))
    .unwrap();
    assert_eq!((p.a, p.b), (2.0, 0.0));
    assert!((p.w - PI).abs() < 1e-15);

    let p = reduce(&cfg(Scenario::ParallelAccel, 1.0, 4.0)).unwrap();
    assert_eq!(p.b, -1.0);

    assert!(reduce(&cfg(Scenario::Inertial, 0.0, 4.0)).is_err());
}

#[test]
fn validation_messages() {
    let mut c = cfg(Scenario::AntiParallelAccel, 1.0, 2.0);
    c.omega = 3.2;
    let err = c.validate_for_amplitudes().unwrap_err();
    assert!(err.to_string().contains("κσ²Ω must be < π"));
    assert!(cfg(Scenario::Inertial, 0.5, 1.0).validate().is_err());
    assert!(cfg(Scenario::Inertial, 0.0, 1.0).validate().is_ok());
    assert!(!cfg(Scenario::Inertial, 0.0, 1.0).spacelike_ok());
    assert!(cfg(Scenario::Inertial, 0.0, 10.5).spacelike_ok());
}

proptest! {
    #[test]
    fn trajectory_symmetries(tau in -4.0f64..4.0, kappa in 0.05f64..3.0, l in 0.1f64..10.0) {
        for s in [Scenario::ParallelAccel, Scenario::AntiParallelAccel] {
            let c = cfg(s, kappa, l);
            let a = trajectory(&c, Detector::A, tau).unwrap();
            let am = trajectory(&c, Detector::A, -tau).unwrap();
            let b = trajectory(&c, Detector::B, tau).unwrap();
            prop_assert!((a.t + am.t).abs() <= 1e-12 * a.t.abs().max(1.0));
            prop_assert!((a.x - am.x).abs() <= 1e-12 * a.x.abs().max(1.0));
            match s {
                Scenario::ParallelAccel => prop_assert!((a.x - b.x - l).abs() <= 1e-9 * a.x.abs().max(1.0)),
                _ => prop_assert!((a.x + b.x).abs() <= 1e-9 * a.x.abs().max(1.0)),
            }
        }
    }

    #[test]
    fn window_bounded_and_even(tau in -50.0f64..50.0, sigma in 0.01f64..10.0) {
        let c = DetectorConfig::new(Scenario::ParallelAccel, 1.0, sigma, 1.0, 1.0, 0.02);
        let v = window(&c, tau);
        prop_assert_eq!(v, window(&c, -tau));
        prop_assert!(v <= 0.02 && v >= 0.0);
    }
}
