//! Shifted-contour quadrature for Ã and the residue-free part of X̃, plus the
//! direct oscillatory oracles in [`oracle`].
//!
//! Stored amplitudes use the scaled convention Ã = e^{(σΩ)²}A/η₀² and
//! X̃ = e^{(σΩ)²}X/η₀².

pub mod adaptive;
pub mod oracle;

use std::cell::RefCell;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::detector::{DetectorConfig, Scenario};
use crate::error::{HarvestError, Result};
use crate::expnum::ExpComplex;
use crate::wightman::{detect_reduced, Kernel};

pub use adaptive::{integrate, integrate_path, Estimate, Tolerance};
pub use oracle::{a_direct_oracle, x_direct_oracle, OracleDiagnostics};

/// Which amplitude a [`ScaledAmplitude`] holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AmplitudeKind {
    #[serde(rename = "A_scaled")]
    AScaled,
    #[serde(rename = "X_scaled")]
    XScaled,
}

/// How a value was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Quadrature,
    Saddle,
    DirectOracle,
    ClosedForm,
}

/// Residue-free / residue split of X̃.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeParts {
    pub residue_free: Complex64,
    pub residue: ExpComplex,
}

/// An amplitude in the scaled convention.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaledAmplitude {
    pub value: ExpComplex,
    pub kind: AmplitudeKind,
    pub parts: Option<AmplitudeParts>,
    /// Absolute error estimate of the mantissa-scaled value (0 for closed forms).
    pub error: f64,
    pub method: Method,
}

impl ScaledAmplitude {
    pub fn new(value: Complex64, kind: AmplitudeKind, error: f64, method: Method) -> Self {
        Self {
            value: value.into(),
            kind,
            parts: None,
            error,
            method,
        }
    }

    /// X̃ with an explicit residue breakdown; the total is their sum.
    pub fn with_parts(residue_free: Complex64, residue: ExpComplex, error: f64, method: Method) -> Self {
        Self {
            value: ExpComplex::from(residue_free) + residue,
            kind: AmplitudeKind::XScaled,
            parts: Some(AmplitudeParts {
                residue_free,
                residue,
            }),
            error,
            method,
        }
    }

    /// Plain complex value; may be infinite when the scaled magnitude overflows.
    pub fn complex(&self) -> Complex64 {
        self.value.to_complex()
    }

    pub fn ln_abs(&self) -> f64 {
        self.value.ln_abs()
    }

    pub fn residue(&self) -> ExpComplex {
        self.parts.map(|p| p.residue).unwrap_or(ExpComplex::ZERO)
    }

    pub fn residue_free(&self) -> Complex64 {
        match self.parts {
            Some(p) => p.residue_free,
            None => self.complex(),
        }
    }
}

/// Numerical knobs for every integral in the crate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSettings {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Gaussian truncation in units of √2·σ.
    pub truncation_radius: f64,
    pub max_subdivisions: usize,
    /// Oracle regulators as multiples of min(σ, 1/κ), strictly decreasing.
    pub epsilon_ladder: Vec<f64>,
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        Self {
            abs_tol: 1e-15,
            rel_tol: 1e-9,
            truncation_radius: 12.0,
            max_subdivisions: 4000,
            epsilon_ladder: vec![1e-2, 1e-3, 1e-4],
        }
    }
}

impl QuadratureSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err(HarvestError::InvalidParameter("tolerances must be > 0".into()));
        }
        if !(self.truncation_radius > 0.0) || self.max_subdivisions == 0 {
            return Err(HarvestError::InvalidParameter(
                "truncation radius and subdivision cap must be > 0".into(),
            ));
        }
        if self.epsilon_ladder.is_empty()
            || self.epsilon_ladder.iter().any(|e| !(*e > 0.0))
            || self.epsilon_ladder.windows(2).any(|p| p[1] >= p[0])
        {
            return Err(HarvestError::InvalidParameter(
                "epsilon ladder must be positive and strictly decreasing".into(),
            ));
        }
        Ok(())
    }

    pub(crate) fn tolerance(&self) -> Tolerance {
        Tolerance::new(self.abs_tol, self.rel_tol, self.max_subdivisions)
    }
}

/// Collects the first error raised inside an integrand closure.
#[derive(Default)]
pub(crate) struct ErrorSink(RefCell<Option<HarvestError>>);

impl ErrorSink {
    pub(crate) fn take(&self, r: Result<Complex64>) -> Complex64 {
        match r {
            Ok(v) => v,
            Err(e) => {
                let mut slot = self.0.borrow_mut();
                if slot.is_none() {
                    *slot = Some(e);
                }
                Complex64::new(0.0, 0.0)
            }
        }
    }

    pub(crate) fn check(self) -> Result<()> {
        match self.0.into_inner() {
            Some(e) => Err(e),
            None => Ok(()),
        }
    }
}

pub(crate) fn converged(est: &Estimate) -> Result<()> {
    if est.converged && est.is_finite() {
        Ok(())
    } else {
        Err(HarvestError::NonConvergence {
            estimate: est.value.norm(),
            error: est.error,
            subdivisions: est.subdivisions,
        })
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Ã on the contour shifted down by 2iσ²Ω, evaluated with ε = 0.
pub fn a_shifted(cfg: &DetectorConfig, settings: &QuadratureSettings) -> Result<ScaledAmplitude> {
    cfg.validate_for_amplitudes()?;
    settings.validate()?;
    let tol = settings.tolerance();
    let sink = ErrorSink::default();
    let est = if cfg.scenario == Scenario::Inertial {
        // y = σs: Ã = −(√π/(4π²σ))∫ds e^{−s²/4}/(s − 2iσΩ)²
        let z = cfg.sigma_omega();
        let r = settings.truncation_radius * 2f64.sqrt();
        let est = integrate(
            |s| {
                let d = c(s, -2.0 * z);
                c((-0.25 * s * s).exp(), 0.0) / (d * d)
            },
            &[-r, 0.0, r],
            &tol,
        );
        Estimate {
            value: est.value * (-(PI.sqrt()) / (4.0 * PI * PI * cfg.sigma)),
            error: est.error * PI.sqrt() / (4.0 * PI * PI * cfg.sigma),
            ..est
        }
    } else {
        // v = κy/2: Ã = −(√π g/(8π²))∫dv e^{−v²/g²} csch²(v − iw)
        let g = cfg.kappa * cfg.sigma;
        let w = cfg.w();
        let r = settings.truncation_radius * g / 2f64.sqrt();
        let pref = PI.sqrt() * g / (8.0 * PI * PI);
        let est = integrate(
            |v| {
                let f = sink.take(detect_reduced(c(v, -w), 0.0));
                f * (-(v / g).powi(2)).exp()
            },
            &[-r, 0.0, r],
            &tol,
        );
        Estimate {
            value: est.value * pref,
            error: est.error * pref,
            ..est
        }
    };
    sink.check()?;
    converged(&est)?;
    Ok(ScaledAmplitude::new(
        est.value,
        AmplitudeKind::AScaled,
        est.error,
        Method::Quadrature,
    ))
}

/// Polygon from 0 to `end` on the real axis that dips below a pole at `pole`.
fn dip_below(pole: f64, depth: f64, end: f64) -> Vec<Complex64> {
    if pole <= 0.0 || pole >= end {
        return vec![c(0.0, 0.0), c(end, 0.0)];
    }
    let h = depth.min(0.5 * pole).min(0.5 * (end - pole));
    vec![
        c(0.0, 0.0),
        c(pole - h, 0.0),
        c(pole - h, -h),
        c(pole + h, -h),
        c(pole + h, 0.0),
        c(end, 0.0),
    ]
}

/// Locations v ≥ 0 where the anti-parallel kernel has a pole on the shifted
/// line (always at u = 0): b·e^{±v} = cos w.
pub fn antiparallel_line_poles(a: f64, w: f64) -> Vec<f64> {
    let b = 1.0 - 0.5 * a;
    let r = w.cos() / b;
    if !(r > 0.0) || !r.is_finite() {
        return Vec::new();
    }
    let v = r.ln().abs();
    vec![v]
}

/// Residue-free X̃ on the x-contour shifted up by 2iσ²Ω, with ε = 0.
pub fn x_shifted_residue_free(
    cfg: &DetectorConfig,
    settings: &QuadratureSettings,
) -> Result<ScaledAmplitude> {
    cfg.validate_for_amplitudes()?;
    settings.validate()?;
    let tol = settings.tolerance();
    let sink = ErrorSink::default();

    let est = match Kernel::for_scenario(cfg.scenario) {
        None => {
            // x-independent: ∫dx e^{−x²/4σ²} = 2σ√π
            let sigma = cfg.sigma;
            let l = cfg.separation;
            let end = settings.truncation_radius * 2f64.sqrt() * sigma;
            let path = dip_below(l, sigma, end);
            let est = integrate_path(
                |y| {
                    let d = y * y - l * l;
                    if d.norm() < 1e-300 {
                        sink.take(Err(HarvestError::SingularEvaluation {
                            kernel: "inertial",
                            magnitude: d.norm(),
                        }));
                    }
                    (-(y * y) / (4.0 * sigma * sigma)).exp() / d
                },
                &path,
                &tol,
            );
            // −2σ√π · (−1/4π²) ∫ e^{..}/(y² − L²)
            let pref = 2.0 * sigma * PI.sqrt() / (4.0 * PI * PI);
            Estimate {
                value: est.value * pref,
                error: est.error * pref,
                ..est
            }
        }
        Some(Kernel::Thermal) => {
            let g = cfg.kappa * cfg.sigma;
            let a = cfg.separation * cfg.kappa;
            let end = settings.truncation_radius * g / 2f64.sqrt();
            let path = dip_below(0.5 * a, 0.5 * g.min(1.0), end);
            let est = integrate_path(
                |v| sink.take(Kernel::Thermal.reduced(c(0.0, 0.0), v, 0.0, a)) * (-(v * v) / (g * g)).exp(),
                &path,
                &tol,
            );
            let pref = -g * PI.sqrt() / (4.0 * PI * PI);
            Estimate {
                value: est.value * pref,
                error: est.error * pref.abs(),
                ..est
            }
        }
        Some(kernel) => {
            let g = cfg.kappa * cfg.sigma;
            let a = cfg.separation * cfg.kappa;
            let w = cfg.w();
            let r = settings.truncation_radius * g / 2f64.sqrt();
            let mut outer_points = vec![0.0];
            if kernel == Kernel::AntiParallel {
                for v in antiparallel_line_poles(a, w) {
                    if v == 0.0 || v.abs() < 1e-12 {
                        return Err(HarvestError::ResonanceDivergence(
                            (a + 2.0 * (w.cos() - 1.0)).abs(),
                        ));
                    }
                    if v < r {
                        outer_points.push(v);
                    }
                }
            }
            outer_points.push(r);
            let inner_tol = Tolerance::new(
                settings.abs_tol * 1e-2,
                settings.rel_tol * 0.1,
                settings.max_subdivisions,
            );
            let inner_failed = RefCell::new(None::<Estimate>);
            let est = integrate(
                |v| {
                    let inner = integrate(
                        |u| {
                            let f = sink.take(kernel.reduced(c(u, w), c(v, 0.0), 0.0, a));
                            f * (-(u / g).powi(2)).exp()
                        },
                        &[-r, 0.0, r],
                        &inner_tol,
                    );
                    if !inner.converged {
                        let mut slot = inner_failed.borrow_mut();
                        if slot.is_none() {
                            *slot = Some(inner);
                        }
                    }
                    inner.value * (-(v / g).powi(2)).exp()
                },
                &outer_points,
                &tol,
            );
            if let Some(bad) = inner_failed.into_inner() {
                converged(&bad)?;
            }
            let pref = -1.0 / (4.0 * PI * PI);
            Estimate {
                value: est.value * pref,
                error: est.error * pref.abs(),
                ..est
            }
        }
    };
    sink.check()?;
    converged(&est)?;
    Ok(ScaledAmplitude::with_parts(
        est.value,
        ExpComplex::ZERO,
        est.error,
        Method::Quadrature,
    ))
}
