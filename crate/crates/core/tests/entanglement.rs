use harvest_core::entanglement::{
    assemble, correlators, correlators_by_trace, is_entangled, ln_negativity, negativity, pt_eigenvalues, pt_oracle,
    sample_measurements, AssemblyMethod, Basis, StateScale, TwoDetectorState,
};
use harvest_core::quadrature::QuadratureSettings;
use harvest_core::{DetectorConfig, ExpComplex, HarvestError, Scenario};
use num_complex::Complex64;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn raw(a: f64, b: Complex64, cc: f64, x: Complex64) -> TwoDetectorState {
    TwoDetectorState::new(a, b, cc, x, StateScale::Raw)
}

#[test]
fn negativity_examples() {
    let s = raw(0.1, c(0.0, 0.0), 0.02, c(0.2, 0.0));
    assert!((negativity(&s) - 0.1).abs() < 1e-15);
    assert!((pt_oracle(&s).unwrap() - 0.1).abs() < 1e-12);
    let ev = pt_eigenvalues(&s).unwrap();
    // central block gives A ± |X|
    assert!(ev.iter().any(|e| (e + 0.1).abs() < 1e-12), "{ev:?}");
    assert!(ev.iter().any(|e| (e - 0.3).abs() < 1e-12), "{ev:?}");

    let edge = raw(0.1, c(0.0, 0.0), 0.02, c(0.0, 0.1));
    assert_eq!(negativity(&edge), 0.0);
    assert!(!is_entangled(&edge));
    assert!(pt_oracle(&edge).unwrap() < 1e-12);
}

#[test]
fn zero_coherence_is_separable() {
    for &(a, b, cc) in &[(0.1, c(0.01, 0.02), 0.02), (0.2, c(0.0, 0.0), 0.0), (0.05, c(-0.03, 0.0), 0.03)] {
        let s = raw(a, b, cc, c(0.0, 0.0));
        assert!(pt_oracle(&s).unwrap() < 1e-12);
        assert_eq!(negativity(&s), 0.0);
    }
}

#[test]
fn log_negativity_survives_overflow() {
    let x = ExpComplex::new(c(-1.0, 0.0), 5.0e5);
    let s = TwoDetectorState::from_amplitudes(1e-7, x, StateScale::Scaled);
    assert!(is_entangled(&s));
    assert!((ln_negativity(&s) - 5.0e5).abs() < 1e-9);
    let tiny = TwoDetectorState::from_amplitudes(1e-7, ExpComplex::new(c(1.0, 0.0), -40.0), StateScale::Scaled);
    assert!(!is_entangled(&tiny));
    assert_eq!(ln_negativity(&tiny), f64::NEG_INFINITY);
}

#[test]
fn invalid_states_are_rejected() {
    let s = raw(-0.1, c(0.0, 0.0), 0.0, c(0.0, 0.0));
    assert!(matches!(pt_oracle(&s), Err(HarvestError::InvalidState(_))));
    let s = raw(0.6, c(0.0, 0.0), 0.1, c(0.0, 0.0));
    assert!(pt_oracle(&s).is_err());
}

#[test]
fn raw_conversion_refuses_underflow() {
    let s = TwoDetectorState::from_amplitudes(0.01, ExpComplex::from(c(-0.02, 0.0)), StateScale::Scaled);
    assert!(matches!(s.to_raw(0.01, 1250.0, false), Err(HarvestError::Underflow(_))));
    let r = s.to_raw(0.1, 1.0, false).unwrap();
    assert_eq!(r.scale, StateScale::Raw);
    let f = 0.01 * (-1.0f64).exp();
    assert!((r.a - 0.01 * f).abs() < 1e-15);
    let back = r.to_scaled(0.1, 1.0);
    assert!((back.a - 0.01).abs() < 1e-14);
}

#[test]
fn correlator_examples() {
    let s = raw(0.1, c(0.0, 0.0), 0.02, c(0.05, 0.0));
    let (xx, yy) = correlators(&s);
    assert!((xx + 0.1).abs() < 1e-15 && (yy - 0.1).abs() < 1e-15);
    assert!((yy - xx - 0.2).abs() < 1e-15);

    let s = raw(0.1, c(0.03, 0.01), 0.02, c(0.0, 0.05));
    let (xx, yy) = correlators(&s);
    assert!((xx - 0.06).abs() < 1e-15 && (yy - 0.06).abs() < 1e-15);

    let (tx, ty) = correlators_by_trace(&s).unwrap();
    assert!((tx - xx).abs() < 1e-14 && (ty - yy).abs() < 1e-14);
}

#[test]
fn sampling_is_deterministic() {
    let s = raw(0.1, c(0.0, 0.0), 0.02, c(0.05, 0.0));
    let r1 = sample_measurements(&s, Basis::XX, 1000, 7).unwrap();
    let r2 = sample_measurements(&s, Basis::XX, 1000, 7).unwrap();
    assert_eq!(r1.outcomes, r2.outcomes);
    let r3 = sample_measurements(&s, Basis::XX, 1000, 8).unwrap();
    assert_ne!(r1.outcomes, r3.outcomes);
}

#[test]
fn sampled_estimator_converges() {
    let x = 0.04;
    let s = raw(0.1, c(0.0, 0.0), 0.02, c(x, 0.0));
    let n = 200_000;
    let xx = sample_measurements(&s, Basis::XX, n, 11).unwrap();
    let yy = sample_measurements(&s, Basis::YY, n, 12).unwrap();
    let est = yy.correlator() - xx.correlator();
    let se = (xx.standard_error().powi(2) + yy.standard_error().powi(2)).sqrt();
    assert!((est - 4.0 * x).abs() < 5.0 * se, "est {est} se {se}");

    let z = raw(0.1, c(0.0, 0.0), 0.02, c(0.0, 0.0));
    let xx = sample_measurements(&z, Basis::XX, n, 3).unwrap();
    let yy = sample_measurements(&z, Basis::YY, n, 4).unwrap();
    assert!(xx.correlator().abs() < 5.0 * xx.standard_error());
    assert!(yy.correlator().abs() < 5.0 * yy.standard_error());
}

#[test]
fn scaled_states_cannot_be_sampled() {
    let s = TwoDetectorState::from_amplitudes(0.1, ExpComplex::from(c(0.05, 0.0)), StateScale::Scaled);
    assert!(sample_measurements(&s, Basis::XX, 10, 1).is_err());
}

#[test]
fn assembly_residue_bookkeeping() {
    let settings = QuadratureSettings::default();
    let par = DetectorConfig::from_dimensionless(Scenario::ParallelAccel, 1.0, 1.25, 0.01, 1.0);
    let asm = assemble(&par, AssemblyMethod::Saddle, &settings).unwrap();
    assert!(asm.x.residue().is_zero());
    assert!(asm.residue.is_none());

    let anti = DetectorConfig::from_dimensionless(Scenario::AntiParallelAccel, 3.0, 1.2, 0.05, 1.0);
    let asm = assemble(&anti, AssemblyMethod::Quadrature, &settings).unwrap();
    assert!(asm.x.residue().is_zero());

    let neck = DetectorConfig::from_dimensionless(Scenario::AntiParallelAccel, 1.0, 2.6, 0.01, 1.0);
    let asm = assemble(&neck, AssemblyMethod::Saddle, &settings).unwrap();
    assert!(!asm.x.residue().is_zero());
    assert!(asm.entangled());
}

#[test]
fn assembled_negativity_matches_state() {
    let settings = QuadratureSettings::default();
    let cfg = DetectorConfig::from_dimensionless(Scenario::ParallelAccel, 0.5, 1.0, 0.01, 1.0);
    let asm = assemble(&cfg, AssemblyMethod::Saddle, &settings).unwrap();
    let n = (asm.x.complex().norm() - asm.a.complex().re).max(0.0);
    assert!((asm.negativity() - n).abs() <= 1e-12 * n.max(1e-300));
}

fn state_strategy() -> impl Strategy<Value = TwoDetectorState> {
    (0.0..0.2f64, 0.0..0.2f64, -0.3..0.3f64, 0.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64).prop_map(
        |(a, cc, xr, xi_frac, br, bi)| {
            let xi = xi_frac * 0.1;
            // |B|² ≤ A·C keeps the corner block positive
            let bmax = (a * cc).sqrt();
            let b = c(br, bi) * (bmax / 2f64.sqrt());
            raw(a, b, cc, c(xr * 0.5, xi))
        },
    )
}

proptest! {
    #[test]
    fn pt_oracle_matches_closed_form(s in state_strategy()) {
        prop_assume!(s.validate().is_ok());
        let n = pt_oracle(&s).unwrap();
        prop_assert!((n - negativity(&s)).abs() < 1e-12);
        prop_assert_eq!(n > 1e-12, is_entangled(&s) && negativity(&s) > 1e-12);
    }

    #[test]
    fn corner_block_does_not_change_negativity(s in state_strategy(), k in 0.0..1.0f64) {
        prop_assume!(s.validate().is_ok());
        let mut t = s;
        t.b = s.b * k;
        t.c = s.c * k.max(0.5);
        prop_assume!(t.validate().is_ok());
        prop_assert!((pt_oracle(&t).unwrap() - pt_oracle(&s).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn correlator_identity_by_trace(s in state_strategy()) {
        let (xx, yy) = correlators_by_trace(&s).unwrap();
        let x = s.x.to_complex();
        prop_assert!((yy - xx - 4.0 * x.re).abs() < 1e-14);
    }
}
