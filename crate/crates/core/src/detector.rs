//! Detector parameters, trajectories, the Gaussian switching window and the
//! dimensionless groupings used throughout. Natural units, c = ħ = k_B = 1.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{HarvestError, Result};

/// Which pair of worldlines (or field state) the detectors see.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    /// Both detectors accelerate in the same direction.
    ParallelAccel,
    /// Detectors accelerate away from each other.
    AntiParallelAccel,
    /// Comoving detectors in de Sitter space with expansion rate κ.
    DeSitterComoving,
    /// Inertial detectors in a thermal bath at temperature κ/2π.
    ThermalInertial,
    /// Inertial detectors in the Minkowski vacuum (κ = 0).
    Inertial,
}

impl Scenario {
    pub const ALL: [Scenario; 5] = [
        Scenario::ParallelAccel,
        Scenario::AntiParallelAccel,
        Scenario::DeSitterComoving,
        Scenario::ThermalInertial,
        Scenario::Inertial,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::ParallelAccel => "parallel",
            Scenario::AntiParallelAccel => "antiparallel",
            Scenario::DeSitterComoving => "desitter",
            Scenario::ThermalInertial => "thermal",
            Scenario::Inertial => "inertial",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "parallel" | "parallelaccel" => Some(Scenario::ParallelAccel),
            "antiparallel" | "antiparallelaccel" => Some(Scenario::AntiParallelAccel),
            "desitter" | "desittercomoving" | "ds" => Some(Scenario::DeSitterComoving),
            "thermal" | "thermalinertial" => Some(Scenario::ThermalInertial),
            "inertial" => Some(Scenario::Inertial),
            _ => None,
        }
    }

    /// Scenarios with an explicit pair of accelerated worldlines.
    pub fn has_trajectories(self) -> bool {
        matches!(self, Scenario::ParallelAccel | Scenario::AntiParallelAccel)
    }
}

/// Label of one of the two detectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Detector {
    A,
    B,
}

/// Physical inputs for one run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorConfig {
    /// Acceleration (or expansion rate / temperature scale), inverse length.
    pub kappa: f64,
    /// Standard deviation of the Gaussian window.
    pub sigma: f64,
    /// Energy gap.
    pub omega: f64,
    /// Closest-approach, comoving or proper separation depending on scenario.
    #[serde(rename = "L")]
    pub separation: f64,
    /// Peak coupling.
    pub eta0: f64,
    pub scenario: Scenario,
}

impl DetectorConfig {
    pub fn new(
        scenario: Scenario,
        kappa: f64,
        sigma: f64,
        omega: f64,
        separation: f64,
        eta0: f64,
    ) -> Self {
        Self {
            kappa,
            sigma,
            omega,
            separation,
            eta0,
            scenario,
        }
    }

    /// Configuration with σ = 1/κ·g reconstructed from a dimensionless point,
    /// so that a = Lκ and w = κσ²Ω.
    pub fn from_dimensionless(scenario: Scenario, a: f64, w: f64, g: f64, sigma: f64) -> Self {
        let kappa = g / sigma;
        Self {
            kappa,
            sigma,
            omega: w / (kappa * sigma * sigma),
            separation: a / kappa,
            eta0: 1e-3,
            scenario,
        }
    }

    /// κσ²Ω, the phase the contour shift sweeps through.
    pub fn w(&self) -> f64 {
        self.kappa * self.sigma * self.sigma * self.omega
    }

    /// σΩ, which sets the e^{(σΩ)²} rescaling.
    pub fn sigma_omega(&self) -> f64 {
        self.sigma * self.omega
    }

    /// Reporting flag: the windows are well inside the separation.
    pub fn spacelike_ok(&self) -> bool {
        self.sigma < self.separation / 10.0
    }

    /// Check the per-field domains; does not check the κσ²Ω < π window.
    pub fn validate(&self) -> Result<()> {
        let finite = [self.kappa, self.sigma, self.omega, self.separation, self.eta0]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(HarvestError::InvalidParameter(
                "all parameters must be finite".into(),
            ));
        }
        if self.sigma <= 0.0 {
            return Err(HarvestError::InvalidParameter("σ must be > 0".into()));
        }
        if self.omega <= 0.0 {
            return Err(HarvestError::InvalidParameter("Ω must be > 0".into()));
        }
        if self.separation <= 0.0 {
            return Err(HarvestError::InvalidParameter("L must be > 0".into()));
        }
        if self.eta0 <= 0.0 || self.eta0 >= 1.0 {
            return Err(HarvestError::InvalidParameter("η₀ must lie in (0, 1)".into()));
        }
        match self.scenario {
            Scenario::Inertial => {
                if self.kappa != 0.0 {
                    return Err(HarvestError::InvalidParameter(
                        "the inertial scenario requires κ = 0".into(),
                    ));
                }
            }
            _ => {
                if self.kappa <= 0.0 {
                    return Err(HarvestError::InvalidParameter(
                        "κ must be > 0 (use the inertial scenario for κ = 0)".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Full validation for anything that evaluates the excitation probability.
    pub fn validate_for_amplitudes(&self) -> Result<()> {
        self.validate()?;
        if self.scenario != Scenario::Inertial && self.w() >= PI {
            return Err(HarvestError::InvalidParameter(format!(
                "κσ²Ω must be < π (got {})",
                self.w()
            )));
        }
        Ok(())
    }
}

/// Invariant coordinates of parameter space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimensionlessPoint {
    /// Lκ
    pub a: f64,
    /// κσ²Ω
    pub w: f64,
    /// κσ
    pub g: f64,
    /// 1 − a/2; its sign tells whether the Rindler wedges overlap.
    pub b: f64,
}

impl DimensionlessPoint {
    pub fn new(a: f64, w: f64, g: f64) -> Self {
        Self {
            a,
            w,
            g,
            b: 1.0 - a / 2.0,
        }
    }
}

/// A point in the (t, x) plane; the transverse coordinates vanish.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpacetimeEvent {
    pub t: f64,
    pub x: f64,
}

impl SpacetimeEvent {
    pub fn new(t: f64, x: f64) -> Self {
        Self { t, x }
    }
}

/// Worldline of detector `detector` at proper time `tau`.
pub fn trajectory(cfg: &DetectorConfig, detector: Detector, tau: f64) -> Result<SpacetimeEvent> {
    if !cfg.scenario.has_trajectories() {
        return Err(HarvestError::InvalidParameter(format!(
            "no explicit trajectory for the {} scenario",
            cfg.scenario.name()
        )));
    }
    let k = cfg.kappa;
    if k == 0.0 {
        return Err(HarvestError::ZeroAcceleration("trajectory"));
    }
    let half_l = cfg.separation / 2.0;
    let t = (k * tau).sinh() / k;
    // cosh(κτ) − 1 = 2 sinh²(κτ/2) without cancellation at small κτ
    let lift = 2.0 * (0.5 * k * tau).sinh().powi(2) / k;
    let x = match (detector, cfg.scenario) {
        (Detector::A, _) => lift + half_l,
        (Detector::B, Scenario::ParallelAccel) => lift - half_l,
        (Detector::B, _) => -lift - half_l,
    };
    Ok(SpacetimeEvent { t, x })
}

/// Light-cone coordinates (t − x, t + x) of a detector, computed without the
/// cancellation that t and x suffer individually at large κτ.
pub fn light_cone(cfg: &DetectorConfig, detector: Detector, tau: f64) -> Result<(f64, f64)> {
    trajectory(cfg, detector, tau)?;
    let k = cfg.kappa;
    let half_l = cfg.separation / 2.0;
    // t + lift = (e^{κτ} − 1)/κ, t − lift = (1 − e^{−κτ})/κ
    let up = (k * tau).exp_m1() / k;
    let down = -(-k * tau).exp_m1() / k;
    Ok(match (detector, cfg.scenario) {
        (Detector::A, _) => (down - half_l, up + half_l),
        (Detector::B, Scenario::ParallelAccel) => (down + half_l, up - half_l),
        (Detector::B, _) => (up + half_l, down - half_l),
    })
}

/// Gaussian switching function η(τ).
pub fn window(cfg: &DetectorConfig, tau: f64) -> f64 {
    cfg.eta0 * (-tau * tau / (2.0 * cfg.sigma * cfg.sigma)).exp()
}

/// Unruh temperature κ/2π.
pub fn unruh_temperature(kappa: f64) -> f64 {
    kappa / (2.0 * PI)
}

/// Reduce a configuration to (a, w, g, b).
pub fn reduce(cfg: &DetectorConfig) -> Result<DimensionlessPoint> {
    if cfg.kappa == 0.0 {
        return Err(HarvestError::ZeroAcceleration("reduce"));
    }
    Ok(DimensionlessPoint::new(
        cfg.separation * cfg.kappa,
        cfg.w(),
        cfg.kappa * cfg.sigma,
    ))
}
