//! Direct evaluation of the original (τ, τ′) double integrals with a finite
//! regulator ε, extrapolated to ε → 0. These need no contour shift and serve
//! as ground truth for the shifted-contour and residue machinery.

use std::cell::RefCell;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{converged, AmplitudeKind, ErrorSink, Estimate, Method, QuadratureSettings, ScaledAmplitude};
use super::adaptive::{integrate, Tolerance};
use crate::detector::{light_cone, Detector, DetectorConfig, Scenario};
use crate::error::{HarvestError, Result};
use crate::wightman::{d_plus_minkowski_complex, Kernel, KernelArgs};

/// Largest σΩ for which the e^{(σΩ)²} rescaling of a direct integral is trusted.
pub const ORACLE_MAX_SIGMA_OMEGA: f64 = 2.0;

/// Per-ε values and the extrapolation verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleDiagnostics {
    pub epsilons: Vec<f64>,
    pub values: Vec<Complex64>,
    pub extrapolated: Complex64,
    /// Successive differences shrink along the ladder.
    pub monotone: bool,
}

fn guard(cfg: &DetectorConfig, settings: &QuadratureSettings) -> Result<Vec<f64>> {
    cfg.validate()?;
    settings.validate()?;
    if cfg.sigma_omega() > ORACLE_MAX_SIGMA_OMEGA {
        return Err(HarvestError::OracleUnreliable(format!(
            "σΩ = {} exceeds the oracle range {}",
            cfg.sigma_omega(),
            ORACLE_MAX_SIGMA_OMEGA
        )));
    }
    let unit = if cfg.kappa > 0.0 {
        cfg.sigma.min(1.0 / cfg.kappa)
    } else {
        cfg.sigma
    };
    Ok(settings.epsilon_ladder.iter().map(|e| e * unit).collect())
}

/// Neville extrapolation of (ε_k, v_k) to ε = 0.
pub fn richardson(eps: &[f64], vals: &[Complex64]) -> Complex64 {
    let n = eps.len();
    let mut p: Vec<Complex64> = vals.to_vec();
    for m in 1..n {
        for k in 0..n - m {
            let (h0, h1) = (eps[k], eps[k + m]);
            p[k] = (p[k + 1] * h0 - p[k] * h1) / (h0 - h1);
        }
    }
    p[0]
}

fn finish(eps: Vec<f64>, vals: Vec<Complex64>, kind: AmplitudeKind) -> Result<(ScaledAmplitude, OracleDiagnostics)> {
    let extrapolated = richardson(&eps, &vals);
    let diffs: Vec<f64> = vals.windows(2).map(|p| (p[1] - p[0]).norm()).collect();
    let monotone = diffs.windows(2).all(|d| d[1] <= d[0]);
    let diag = OracleDiagnostics {
        epsilons: eps,
        values: vals.clone(),
        extrapolated,
        monotone,
    };
    if !monotone {
        return Err(HarvestError::OracleUnreliable(format!(
            "non-monotone ε ladder: {:?}",
            diag.values
        )));
    }
    let spread = diffs.last().copied().unwrap_or(0.0);
    Ok((
        ScaledAmplitude::new(extrapolated, kind, spread, Method::DirectOracle),
        diag,
    ))
}

fn tolerances(settings: &QuadratureSettings) -> (Tolerance, Tolerance) {
    let rel = settings.rel_tol.max(1e-8);
    (
        Tolerance::new(settings.abs_tol, rel, settings.max_subdivisions),
        Tolerance::new(settings.abs_tol * 1e-2, rel * 0.1, settings.max_subdivisions),
    )
}

fn nested<F>(outer_pts: &[f64], inner_pts: &dyn Fn(f64) -> Vec<f64>, f: F, tol: (Tolerance, Tolerance)) -> Result<Estimate>
where
    F: Fn(f64, f64) -> Complex64,
{
    let bad = RefCell::new(None::<Estimate>);
    let est = integrate(
        |x| {
            let pts = inner_pts(x);
            let inner = integrate(|y| f(x, y), &pts, &tol.1);
            if !inner.converged && bad.borrow().is_none() {
                *bad.borrow_mut() = Some(inner);
            }
            inner.value
        },
        outer_pts,
        &tol.0,
    );
    if let Some(b) = bad.into_inner() {
        converged(&b)?;
    }
    converged(&est)?;
    Ok(est)
}

/// Direct Ã from the (τ, τ′) double integral along detector a's worldline.
pub fn a_direct_oracle(
    cfg: &DetectorConfig,
    settings: &QuadratureSettings,
) -> Result<(ScaledAmplitude, OracleDiagnostics)> {
    let ladder = guard(cfg, settings)?;
    let sigma = cfg.sigma;
    let omega = cfg.omega;
    let span = settings.truncation_radius * 2f64.sqrt() * sigma;
    // The single-detector response is the same for every scenario; the
    // accelerated worldline is used whenever κ > 0.
    let traj_cfg = DetectorConfig {
        scenario: if cfg.kappa > 0.0 {
            Scenario::ParallelAccel
        } else {
            Scenario::Inertial
        },
        ..*cfg
    };
    let mut vals = Vec::new();
    for &eps in &ladder {
        let sink = ErrorSink::default();
        // dτ dτ′ = dx dy / 2, x = τ + τ′, y = τ − τ′
        let est = nested(
            &[-span, 0.0, span],
            &|_| vec![-span, 0.0, span],
            |x, y| {
                let tau = 0.5 * (x + y);
                let taup = 0.5 * (x - y);
                let d = if traj_cfg.scenario == Scenario::Inertial {
                    d_plus_minkowski_complex(Complex64::new(y, 0.0), Complex64::new(0.0, 0.0), eps)
                } else {
                    light_cone(&traj_cfg, Detector::A, tau).and_then(|e1| {
                        light_cone(&traj_cfg, Detector::A, taup).and_then(|e2| d_plus_light_cone(e1, e2, eps))
                    })
                };
                let d = sink.take(d);
                let expo = Complex64::new(
                    -(x * x + y * y) / (4.0 * sigma * sigma) + (sigma * omega).powi(2),
                    -omega * y,
                );
                d * expo.exp() * 0.5
            },
            tolerances(settings),
        )?;
        sink.check()?;
        vals.push(est.value);
    }
    finish(ladder, vals, AmplitudeKind::AScaled)
}

/// Regulated Wightman function from light-cone coordinates; the interval
/// Δu·Δv stays accurate where t² and x² are both huge.
fn d_plus_light_cone(e1: (f64, f64), e2: (f64, f64), eps: f64) -> Result<Complex64> {
    let du = e1.0 - e2.0;
    let dv = e1.1 - e2.1;
    let dt = 0.5 * (du + dv);
    let den = Complex64::new(du * dv - eps * eps, -2.0 * eps * dt);
    if !(den.norm() > 0.0) || !den.is_finite() {
        return Err(HarvestError::SingularEvaluation {
            kernel: "minkowski",
            magnitude: den.norm(),
        });
    }
    Ok(-(den * (4.0 * PI * PI)).inv())
}

fn parallel_poles(v: f64, a: f64) -> Vec<f64> {
    let l = 0.5 * a;
    if v <= 0.0 {
        return Vec::new();
    }
    let u = (v.sinh() / l).ln();
    vec![u, -u]
}

fn antiparallel_poles(v: f64, a: f64) -> Vec<f64> {
    let b = 1.0 - 0.5 * a;
    let z = b * v.exp();
    if z >= 1.0 {
        let u = z.acosh();
        vec![-u, u]
    } else {
        Vec::new()
    }
}

/// Direct X̃ from the time-ordered double integral, both Wightman orderings.
pub fn x_direct_oracle(
    cfg: &DetectorConfig,
    settings: &QuadratureSettings,
) -> Result<(ScaledAmplitude, OracleDiagnostics)> {
    let ladder = guard(cfg, settings)?;
    let sigma = cfg.sigma;
    let omega = cfg.omega;
    let kappa = cfg.kappa;
    let l = cfg.separation;
    let a = l * kappa;
    let span = settings.truncation_radius * 2f64.sqrt() * sigma;

    // Real-axis singular curves of the regulated kernel, as breakpoints.
    let mut outer = vec![0.0];
    match cfg.scenario {
        Scenario::ThermalInertial | Scenario::Inertial if l < span => outer.push(l),
        Scenario::AntiParallelAccel => {
            let b = 1.0 - 0.5 * a;
            if b > 0.0 {
                let y0 = 2.0 / kappa * (1.0 / b).ln();
                if y0 > 0.0 && y0 < span {
                    outer.push(y0);
                }
            }
        }
        _ => {}
    }
    outer.push(span);
    let scenario = cfg.scenario;
    let inner_pts = move |y: f64| -> Vec<f64> {
        let v = 0.5 * kappa * y;
        let mut pts = vec![-span, 0.0, span];
        let extra = match scenario {
            Scenario::ParallelAccel | Scenario::DeSitterComoving => parallel_poles(v, a),
            Scenario::AntiParallelAccel => antiparallel_poles(v, a),
            _ => Vec::new(),
        };
        for u in extra {
            let x = 2.0 * u / kappa;
            if x.is_finite() && x.abs() < span {
                pts.push(x);
            }
        }
        pts.sort_by(|p, q| p.total_cmp(q));
        pts.dedup();
        pts
    };

    let mut vals = Vec::new();
    for &eps in &ladder {
        let sink = ErrorSink::default();
        let est = nested(
            &outer,
            &inner_pts,
            |y, x| {
                let tau = 0.5 * (x + y);
                let taup = 0.5 * (x - y);
                let d = match scenario {
                    Scenario::ParallelAccel | Scenario::AntiParallelAccel => {
                        let pair = |p: Detector, q: Detector| {
                            light_cone(cfg, p, tau)
                                .and_then(|e1| light_cone(cfg, q, taup).and_then(|e2| d_plus_light_cone(e1, e2, eps)))
                        };
                        match (pair(Detector::A, Detector::B), pair(Detector::B, Detector::A)) {
                            (Ok(p), Ok(q)) => Ok(0.5 * (p + q)),
                            (Err(e), _) | (_, Err(e)) => Err(e),
                        }
                    }
                    Scenario::Inertial => d_plus_minkowski_complex(
                        Complex64::new(y, 0.0),
                        Complex64::new(l, 0.0),
                        eps,
                    ),
                    Scenario::DeSitterComoving => {
                        Kernel::DeSitter.eval(&KernelArgs::real(x, y, eps), kappa, l)
                    }
                    Scenario::ThermalInertial => {
                        Kernel::Thermal.eval(&KernelArgs::real(x, y, eps), kappa, l)
                    }
                };
                let d = sink.take(d);
                let expo = Complex64::new(
                    -(x * x + y * y) / (4.0 * sigma * sigma) + (sigma * omega).powi(2),
                    omega * x,
                );
                // X = −½∫dy∫dx …·[D_ab + D_ba] and D is their mean
                -d * expo.exp()
            },
            tolerances(settings),
        )?;
        sink.check()?;
        vals.push(est.value);
    }
    finish(ladder, vals, AmplitudeKind::XScaled)
}
