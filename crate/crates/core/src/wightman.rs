//! Vacuum Wightman kernels on the trajectory pairs, evaluated at complex
//! sum/difference times.
//!
//! Each accelerated kernel is written as `κ²/(16π²)·f(κx/2, κy/2)`; the
//! dimensionless `f` is what the quadrature layer integrates.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::detector::{DetectorConfig, DimensionlessPoint, Scenario, SpacetimeEvent};
use crate::error::{HarvestError, Result};

/// Denominators smaller than this (in κ-units) are treated as poles.
pub const POLE_GUARD: f64 = 1e-12;

/// Arguments of a two-point kernel: x = τ + τ′, y = τ − τ′ and the regulator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelArgs {
    pub x: Complex64,
    pub y: Complex64,
    pub epsilon: f64,
}

impl KernelArgs {
    pub fn new(x: Complex64, y: Complex64, epsilon: f64) -> Self {
        Self { x, y, epsilon }
    }

    pub fn real(x: f64, y: f64, epsilon: f64) -> Self {
        Self::new(Complex64::new(x, 0.0), Complex64::new(y, 0.0), epsilon)
    }
}

fn i() -> Complex64 {
    Complex64::new(0.0, 1.0)
}

fn guard(kernel: &'static str, den: Complex64, scale: f64) -> Result<()> {
    let m = den.norm();
    if !(m >= POLE_GUARD * scale) {
        return Err(HarvestError::SingularEvaluation {
            kernel,
            magnitude: m,
        });
    }
    Ok(())
}

/// Which two-detector kernel to integrate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kernel {
    Parallel,
    AntiParallel,
    DeSitter,
    Thermal,
}

impl Kernel {
    pub fn for_scenario(scenario: Scenario) -> Option<Self> {
        match scenario {
            Scenario::ParallelAccel => Some(Kernel::Parallel),
            Scenario::AntiParallelAccel => Some(Kernel::AntiParallel),
            Scenario::DeSitterComoving => Some(Kernel::DeSitter),
            Scenario::ThermalInertial => Some(Kernel::Thermal),
            Scenario::Inertial => None,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Kernel::Parallel => "parallel",
            Kernel::AntiParallel => "antiparallel",
            Kernel::DeSitter => "desitter",
            Kernel::Thermal => "thermal",
        }
    }

    /// Dimensionless kernel f(u, v) with u = κx/2, v = κy/2 and e = κε/2, so
    /// that D = κ²/(16π²)·f.
    pub fn reduced(self, u: Complex64, v: Complex64, e: f64, a: f64) -> Result<Complex64> {
        let l = 0.5 * a;
        let ie = i() * e;
        match self {
            Kernel::Parallel => {
                let s = v.sinh();
                let d1 = l + ie - (-u).exp() * s;
                let d2 = l - ie + u.exp() * s;
                guard(self.name(), d1, 1.0)?;
                guard(self.name(), d2, 1.0)?;
                Ok((d1 * d2).inv())
            }
            Kernel::AntiParallel => {
                let b = 1.0 - l;
                let c = u.cosh();
                let d1 = (-v).exp() * (-b) - ie + c;
                let d2 = v.exp() * (-b) + ie + c;
                guard(self.name(), d1, 1.0)?;
                guard(self.name(), d2, 1.0)?;
                Ok((d1 * d2).inv())
            }
            Kernel::DeSitter => {
                let s = (v - ie).sinh();
                let den = (2.0 * u).exp() * (l * l) - s * s;
                guard(self.name(), den, 1.0)?;
                Ok(den.inv())
            }
            Kernel::Thermal => {
                let s1 = (l - v + ie).sinh();
                let s2 = (l + v - ie).sinh();
                guard(self.name(), s1, 1.0)?;
                guard(self.name(), s2, 1.0)?;
                Ok(((l - v + ie).cosh() / s1 + (l + v - ie).cosh() / s2) / a)
            }
        }
    }

    /// Physical kernel D(x, y) for acceleration κ and separation L.
    pub fn eval(self, args: &KernelArgs, kappa: f64, separation: f64) -> Result<Complex64> {
        if kappa <= 0.0 {
            return Err(HarvestError::ZeroAcceleration("kernel evaluation"));
        }
        let h = 0.5 * kappa;
        let f = self.reduced(args.x * h, args.y * h, args.epsilon * h, separation * kappa)?;
        Ok(f * (kappa * kappa / (16.0 * PI * PI)))
    }
}

/// Minkowski vacuum Wightman function between two events.
pub fn d_plus_minkowski(e1: SpacetimeEvent, e2: SpacetimeEvent, epsilon: f64) -> Result<Complex64> {
    let dt = Complex64::new(e1.t - e2.t, -epsilon);
    let dx = e1.x - e2.x;
    let den = dt * dt - dx * dx;
    let scale = (e1.t - e2.t).powi(2) + dx * dx + epsilon * epsilon;
    guard("minkowski", den, scale.max(f64::MIN_POSITIVE))?;
    Ok(-(den * (4.0 * PI * PI)).inv())
}

/// Same as [`d_plus_minkowski`] with complex event coordinates.
pub fn d_plus_minkowski_complex(
    dt: Complex64,
    dx: Complex64,
    epsilon: f64,
) -> Result<Complex64> {
    let dt = dt - i() * epsilon;
    let den = dt * dt - dx * dx;
    let scale = dt.norm_sqr() + dx.norm_sqr();
    guard("minkowski", den, scale.max(f64::MIN_POSITIVE))?;
    Ok(-(den * (4.0 * PI * PI)).inv())
}

fn kappa_of(point: &DimensionlessPoint, separation: f64) -> f64 {
    point.a / separation
}

/// Parallel-acceleration kernel D∥; κ is recovered as a/L.
pub fn d_parallel(args: &KernelArgs, point: &DimensionlessPoint, separation: f64) -> Result<Complex64> {
    Kernel::Parallel.eval(args, kappa_of(point, separation), separation)
}

/// Anti-parallel kernel D⇄; κ is recovered as a/L.
pub fn d_antiparallel(
    args: &KernelArgs,
    point: &DimensionlessPoint,
    separation: f64,
) -> Result<Complex64> {
    Kernel::AntiParallel.eval(args, kappa_of(point, separation), separation)
}

/// Comoving de Sitter kernel; κ is the expansion rate.
pub fn d_desitter(args: &KernelArgs, point: &DimensionlessPoint, separation: f64) -> Result<Complex64> {
    Kernel::DeSitter.eval(args, kappa_of(point, separation), separation)
}

/// Thermal-bath kernel at temperature κ/2π; independent of x.
pub fn d_thermal(args: &KernelArgs, point: &DimensionlessPoint, separation: f64) -> Result<Complex64> {
    Kernel::Thermal.eval(args, kappa_of(point, separation), separation)
}

/// Kernel of the cfg's scenario at physical (x, y); the inertial scenario
/// uses the κ = 0 Minkowski form.
pub fn d_scenario(cfg: &DetectorConfig, args: &KernelArgs) -> Result<Complex64> {
    match Kernel::for_scenario(cfg.scenario) {
        Some(k) => k.eval(args, cfg.kappa, cfg.separation),
        None => d_inertial(args.y, cfg.separation, args.epsilon),
    }
}

/// Two inertial detectors at rest a distance L apart.
pub fn d_inertial(y: Complex64, separation: f64, epsilon: f64) -> Result<Complex64> {
    d_plus_minkowski_complex(y, Complex64::new(separation, 0.0), epsilon)
}

/// Single-detector response kernel −κ²/(16π²)·csch²[κ(y − iε)/2].
pub fn d_detect(y: Complex64, kappa: f64, epsilon: f64) -> Result<Complex64> {
    if kappa == 0.0 {
        return d_plus_minkowski_complex(y, Complex64::new(0.0, 0.0), epsilon);
    }
    let s = ((y - i() * epsilon) * (0.5 * kappa)).sinh();
    guard("detect", s, 1.0)?;
    Ok(-(s * s).inv() * (kappa * kappa / (16.0 * PI * PI)))
}

/// Reduced detector kernel −csch²(v − ie), so that D_detect = κ²/(16π²)·f.
pub fn detect_reduced(v: Complex64, e: f64) -> Result<Complex64> {
    let s = (v - i() * e).sinh();
    guard("detect", s, 1.0)?;
    Ok(-(s * s).inv())
}
