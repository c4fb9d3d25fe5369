//! Closed-form saddle-point amplitudes, entanglement criteria and the
//! resonance relation between separation and gap.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::detector::{DetectorConfig, Scenario};
use crate::error::{HarvestError, Result};
use crate::quadrature::{AmplitudeKind, Method, ScaledAmplitude};

/// Anti-parallel denominators below this (in units of a) count as resonant.
pub const RESONANCE_GUARD: f64 = 1e-9;

/// The two sides of an entanglement inequality lhs < rhs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub entangled: bool,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
}

impl CriterionResult {
    fn new(lhs: f64, rhs: f64) -> Self {
        let margin = rhs - lhs;
        CriterionResult {
            entangled: margin > 0.0,
            lhs,
            rhs,
            margin,
        }
    }
}

fn check_w(w: f64) -> Result<()> {
    if !(w > 0.0 && w < PI) || w.sin() < 1e-300 {
        return Err(HarvestError::OutOfValidity(format!(
            "saddle forms need 0 < κσ²Ω < π (got {w})"
        )));
    }
    Ok(())
}

/// Ã = (1/2π)[(g/2) csc w]², or 1/(8π(σΩ)²) for inertial detectors.
pub fn a_saddle(cfg: &DetectorConfig) -> Result<ScaledAmplitude> {
    cfg.validate()?;
    let v = if cfg.scenario == Scenario::Inertial {
        1.0 / (8.0 * PI * cfg.sigma_omega().powi(2))
    } else {
        let w = cfg.w();
        check_w(w)?;
        let g = cfg.kappa * cfg.sigma;
        (0.5 * g / w.sin()).powi(2) / (2.0 * PI)
    };
    Ok(ScaledAmplitude::new(
        Complex64::new(v, 0.0),
        AmplitudeKind::AScaled,
        0.0,
        Method::ClosedForm,
    ))
}

/// Residue-free X̃ at the saddle for each scenario.
pub fn x_saddle(cfg: &DetectorConfig) -> Result<ScaledAmplitude> {
    cfg.validate()?;
    let (sigma, l, kappa) = (cfg.sigma, cfg.separation, cfg.kappa);
    let base = -(sigma / l).powi(2) / (2.0 * PI);
    let v = match cfg.scenario {
        Scenario::ParallelAccel | Scenario::Inertial => Complex64::new(base, 0.0),
        Scenario::DeSitterComoving => {
            let w = cfg.w();
            Complex64::new(base, 0.0) * Complex64::new(0.0, -2.0 * w).exp()
        }
        Scenario::ThermalInertial => {
            let c = 1.0 / (0.5 * l * kappa).tanh();
            Complex64::new(-(kappa * sigma * sigma / (2.0 * l)) * c / (2.0 * PI), 0.0)
        }
        Scenario::AntiParallelAccel => {
            let den = l * kappa + 2.0 * (cfg.w().cos() - 1.0);
            if den.abs() < RESONANCE_GUARD {
                return Err(HarvestError::ResonanceDivergence(den.abs()));
            }
            Complex64::new(-(sigma * kappa / den).powi(2) / (2.0 * PI), 0.0)
        }
    };
    Ok(ScaledAmplitude::new(v, AmplitudeKind::XScaled, 0.0, Method::Saddle))
}

/// Closed-form criterion on the reduced plane (a, w).
pub fn criterion_point(scenario: Scenario, a: f64, w: f64) -> Result<CriterionResult> {
    match scenario {
        Scenario::ParallelAccel | Scenario::DeSitterComoving => Ok(CriterionResult::new(0.5 * a, w.sin())),
        Scenario::ThermalInertial => {
            let u = 0.5 * a;
            Ok(CriterionResult::new(u * u.tanh(), w.sin().powi(2)))
        }
        Scenario::Inertial => Err(HarvestError::InvalidParameter(
            "the inertial criterion is stated in L and σ²Ω; use `criterion`".into(),
        )),
        Scenario::AntiParallelAccel => Err(HarvestError::UnsupportedClosedForm(
            "anti-parallel entanglement needs residue assembly",
        )),
    }
}

/// Closed-form entanglement criterion for the configuration.
pub fn criterion(cfg: &DetectorConfig) -> Result<CriterionResult> {
    match cfg.scenario {
        Scenario::AntiParallelAccel => Err(HarvestError::UnsupportedClosedForm(
            "anti-parallel entanglement needs residue assembly",
        )),
        Scenario::Inertial => {
            cfg.validate()?;
            Ok(CriterionResult::new(
                0.5 * cfg.separation,
                cfg.sigma * cfg.sigma * cfg.omega,
            ))
        }
        s => {
            cfg.validate()?;
            criterion_point(s, cfg.separation * cfg.kappa, cfg.w())
        }
    }
}

/// Ñ = max{|X̃| − Ã, 0} from the closed forms, written as a positive factor
/// times the criterion margin so that Ñ > 0 exactly when the criterion holds.
pub fn negativity_closed_form(cfg: &DetectorConfig) -> Result<f64> {
    let c = criterion(cfg)?;
    if !c.entangled {
        return Ok(0.0);
    }
    let n = match cfg.scenario {
        Scenario::Inertial => {
            let s = cfg.separation * cfg.sigma_omega();
            c.margin * (c.rhs + c.lhs) / (s * s) / (2.0 * PI)
        }
        Scenario::ThermalInertial => {
            let g = cfg.kappa * cfg.sigma;
            let sin2 = c.rhs;
            (g * g / 4.0) / (c.lhs * sin2) * c.margin / (2.0 * PI)
        }
        _ => {
            // (1/2π)[(g/a)² − (g/2)² csc² w]
            let g = cfg.kappa * cfg.sigma;
            let a = cfg.separation * cfg.kappa;
            let s = cfg.w().sin();
            g * g / (a * a * s * s) * c.margin * (c.rhs + c.lhs) / (2.0 * PI)
        }
    };
    Ok(n.max(f64::MIN_POSITIVE))
}

/// Separation at which the anti-parallel saddle denominator vanishes:
/// (2/κ)(1 − cos κσ²Ω).
pub fn critical_distance(kappa: f64, sigma: f64, omega: f64) -> Result<f64> {
    let w = kappa * sigma * sigma * omega;
    if !(kappa > 0.0) || !(w > 0.0 && w < PI) {
        return Err(HarvestError::OutOfValidity(format!(
            "critical distance needs κ > 0 and 0 < κσ²Ω < π (got κ={kappa}, w={w})"
        )));
    }
    // 1 − cos w = 2 sin²(w/2)
    Ok(4.0 * (0.5 * w).sin().powi(2) / kappa)
}

/// Gap at which separation L is critical: arccos(1 − Lκ/2)/(κσ²).
pub fn resonant_omega(kappa: f64, sigma: f64, separation: f64) -> Result<f64> {
    let a = separation * kappa;
    if !(kappa > 0.0 && sigma > 0.0) || !(a > 0.0 && a < 4.0) {
        return Err(HarvestError::OutOfValidity(format!(
            "resonance needs 0 < Lκ < 4 (got {a})"
        )));
    }
    // arccos(1 − a/2) = 2 arcsin(√(a)/2), accurate at small a
    Ok(2.0 * (0.5 * a.sqrt()).asin() / (kappa * sigma * sigma))
}
