//! Pole bookkeeping for the anti-parallel coherence term.
//!
//! Shifting the x-contour of the anti-parallel integral up by 2iσ²Ω sweeps
//! across a curve of kernel poles. Parameterizing that curve by
//! θ = arccosh(b e^{±v}) turns the swept residues into a single contour
//! integral of
//!
//! ```text
//! I(θ) = (i/2π) / (cosh²θ − b²) · exp{−F(θ)/g²},   F = log²(cosh θ/b) + (θ − iw)²
//! ```
//!
//! with X̃_res = −∫ I dθ along i·min(w, π/2) → 0 → −∞ for b > 0, and along
//! i·π/2 → i·w for b < 0. The integrand reaches e^{O(1)/g²}, so every value is
//! carried as an [`ExpComplex`].
//!
//! For b > 0 the straight contour cancels catastrophically at small g. It is
//! deformed instead: keep the imaginary axis down to a critical height t_c,
//! then follow a numerically traced steepest-descent path into Re θ < 0. The
//! integrand is analytic in the open left half of the strip 0 < Im θ < π, so
//! the only bookkeeping is the simple pole at θ₀ = i·arccos b on the axis,
//! handled as a principal value plus half-residues.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::detector::{DetectorConfig, DimensionlessPoint, Scenario};
use crate::error::{HarvestError, Result};
use crate::expnum::ExpComplex;
use crate::quadrature::adaptive::{integrate, integrate_path, Tolerance};
use crate::quadrature::{Method, QuadratureSettings, ScaledAmplitude};

/// Which of the two pole families y ↦ arccosh(b e^{±κy/2}) a point lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }

    pub fn opposite(self) -> Self {
        match self {
            Branch::Plus => Branch::Minus,
            Branch::Minus => Branch::Plus,
        }
    }
}

/// A pole location θ with Im θ ∈ [0, π).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThetaPoint {
    pub theta: Complex64,
    pub branch: Branch,
    /// Real θ; the regulator places it at Im θ = 0⁺.
    pub on_real_axis: bool,
}

impl ThetaPoint {
    /// Pole position in x = τ + τ′.
    pub fn x_pole(&self, kappa: f64) -> Complex64 {
        self.theta * (2.0 / kappa)
    }
}

/// θ on the given branch for reduced time v = κy/2.
pub fn theta_of_v(v: f64, branch: Branch, b: f64) -> ThetaPoint {
    let z = b * (branch.sign() * v).exp();
    // arccosh(z ∓ i0) with Im ∈ [0, π): the regulator picks the sign of Re θ
    // once |z| ≥ 1.
    let re_sign = match branch {
        Branch::Plus => -1.0,
        Branch::Minus => 1.0,
    };
    let theta = if z.abs() < 1.0 {
        Complex64::new(0.0, z.acos())
    } else if z >= 1.0 {
        Complex64::new(re_sign * z.acosh(), 0.0)
    } else {
        Complex64::new(re_sign * (-z).acosh(), PI)
    };
    ThetaPoint {
        theta,
        branch,
        on_real_axis: theta.im == 0.0,
    }
}

/// θ±(y) for the anti-parallel configuration.
pub fn theta_of_y(y: f64, branch: Branch, cfg: &DetectorConfig) -> Result<ThetaPoint> {
    if !(y >= 0.0) {
        return Err(HarvestError::InvalidParameter(format!("y must be ≥ 0 (got {y})")));
    }
    if cfg.kappa <= 0.0 {
        return Err(HarvestError::ZeroAcceleration("theta_of_y"));
    }
    let b = 1.0 - 0.5 * cfg.separation * cfg.kappa;
    Ok(theta_of_v(0.5 * cfg.kappa * y, branch, b))
}

/// Whether the pole at (y, branch) is swept by the x-shift: b e^{±κy/2} > cos w.
pub fn pole_included(y: f64, branch: Branch, cfg: &DetectorConfig) -> bool {
    let b = 1.0 - 0.5 * cfg.separation * cfg.kappa;
    b * (branch.sign() * 0.5 * cfg.kappa * y).exp() > cfg.w().cos()
}

/// Residue in x of the anti-parallel kernel at the pole θ_s, whose partner
/// on the other branch is θ_opp (cosh θ_s cosh θ_opp = b²):
/// (κ/8π²)·csch θ_s / (cosh θ_s − cosh θ_opp).
pub fn residue_of_kernel(theta_s: Complex64, theta_opp: Complex64, kappa: f64) -> Result<Complex64> {
    let (cs, co) = (theta_s.cosh(), theta_opp.cosh());
    let gap = cs - co;
    if gap.norm() < 1e-12 * (1.0 + cs.norm()) {
        return Err(HarvestError::DegeneratePole(gap.norm()));
    }
    let sh = theta_s.sinh();
    if sh.norm() < 1e-300 {
        return Err(HarvestError::DegeneratePole(sh.norm()));
    }
    Ok(Complex64::new(kappa / (8.0 * PI * PI), 0.0) / (sh * gap))
}

/// Exponent F(θ) = log²(cosh θ/b) + (θ − iw)², principal log.
pub fn exponent(theta: Complex64, b: f64, w: f64) -> Complex64 {
    let l = (theta.cosh() / b).ln();
    let d = theta - Complex64::new(0.0, w);
    l * l + d * d
}

fn d_exponent(theta: Complex64, b: f64, w: f64) -> Complex64 {
    let l = (theta.cosh() / b).ln();
    2.0 * l * theta.tanh() + 2.0 * (theta - Complex64::new(0.0, w))
}

fn d2_exponent(theta: Complex64, b: f64) -> Complex64 {
    let l = (theta.cosh() / b).ln();
    let t = theta.tanh();
    2.0 * t * t + 2.0 * l * (1.0 - t * t) + 2.0
}

fn prefactor(theta: Complex64, b: f64) -> Result<Complex64> {
    let c = theta.cosh();
    let den = c * c - b * b;
    if den.norm() < 1e-14 {
        return Err(HarvestError::SingularEvaluation {
            kernel: "residue integrand",
            magnitude: den.norm(),
        });
    }
    Ok(Complex64::new(0.0, 1.0 / (2.0 * PI)) / den)
}

/// I(θ) as an exponent-carrying number.
pub fn integrand_scaled(theta: Complex64, b: f64, w: f64, g: f64) -> Result<ExpComplex> {
    let e = -exponent(theta, b, w) / (g * g);
    let pre = prefactor(theta, b)?;
    Ok(ExpComplex::new(pre * Complex64::new(0.0, e.im).exp(), e.re))
}

/// I(θ) in plain f64; overflows to ±inf when g is small.
pub fn integrand_i(theta: Complex64, point: &DimensionlessPoint) -> Result<Complex64> {
    Ok(integrand_scaled(theta, point.b, point.w, point.g)?.to_complex())
}

/// Residue of I at θ₀ = i·arccos b: e^{(t₀−w)²/g²} / (4π b sin t₀).
pub fn pole_residue(b: f64, w: f64, g: f64) -> ExpComplex {
    let t0 = b.acos();
    ExpComplex::new(
        Complex64::new(1.0 / (4.0 * PI * b * t0.sin()), 0.0),
        (t0 - w).powi(2) / (g * g),
    )
}

/// Critical point θ* of E = F/g² by damped Newton from the best of a
/// 64-point grid along `segment`. Convergence is declared when
/// |F′| = g²|E′| < 1e−10, since E′ itself cannot reach that at small g in f64.
pub fn find_saddle(
    point: &DimensionlessPoint,
    segment: (Complex64, Complex64),
) -> Result<Complex64> {
    let (b, w) = (point.b, point.w);
    let de = |t: Complex64| d_exponent(t, b, w);
    let mut theta = (0..64)
        .map(|k| segment.0 + (segment.1 - segment.0) * (k as f64 / 63.0))
        .filter(|t| de(*t).is_finite())
        .min_by(|p, q| de(*p).norm().total_cmp(&de(*q).norm()))
        .ok_or(HarvestError::SaddleNotFound {
            iterations: 0,
            residual: f64::NAN,
        })?;
    let h = 1e-6;
    let mut r = de(theta).norm();
    for it in 0..100 {
        if r < 1e-10 {
            return Ok(theta);
        }
        let d2 = (de(theta + h) - de(theta - h)) / (2.0 * h);
        if !(d2.norm() > 0.0) {
            return Err(HarvestError::SaddleNotFound {
                iterations: it,
                residual: r,
            });
        }
        let step = de(theta) / d2;
        let mut lambda = 1.0;
        loop {
            let trial = theta - step * lambda;
            let rt = de(trial).norm();
            if rt.is_finite() && rt < r {
                theta = trial;
                r = rt;
                break;
            }
            lambda *= 0.5;
            if lambda < 1e-6 {
                return Err(HarvestError::SaddleNotFound {
                    iterations: it,
                    residual: r,
                });
            }
        }
    }
    if r < 1e-10 {
        Ok(theta)
    } else {
        Err(HarvestError::SaddleNotFound {
            iterations: 100,
            residual: r,
        })
    }
}

/// b < 0 or b > 0; the two contour shapes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ResidueCase {
    BNegative,
    BPositive,
}

/// Which evaluation produced the residue value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ContourValidity {
    SteepestDescentOK,
    NumericFallback,
}

/// The undeformed contour as straight segments in θ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidueContour {
    pub case: ResidueCase,
    pub segments: Vec<(Complex64, Complex64)>,
    pub validity: ContourValidity,
}

impl ResidueContour {
    pub fn new(point: &DimensionlessPoint) -> Self {
        let (b, w, g) = (point.b, point.w, point.g);
        let tmin = w.min(FRAC_PI_2);
        if b < 0.0 {
            let segments = if w > FRAC_PI_2 {
                vec![(Complex64::new(0.0, tmin), Complex64::new(0.0, w))]
            } else {
                Vec::new()
            };
            ResidueContour {
                case: ResidueCase::BNegative,
                segments,
                validity: ContourValidity::NumericFallback,
            }
        } else {
            let reach = 12.0 * g + b.ln().abs();
            ResidueContour {
                case: ResidueCase::BPositive,
                segments: vec![
                    (Complex64::new(0.0, tmin), Complex64::new(0.0, 0.0)),
                    (Complex64::new(0.0, 0.0), Complex64::new(-reach, 0.0)),
                ],
                validity: ContourValidity::SteepestDescentOK,
            }
        }
    }
}

/// Residue term with the diagnostics of how it was obtained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidueEvaluation {
    pub amplitude: ScaledAmplitude,
    pub contour: ResidueContour,
    /// Vertices of the deformed path actually integrated (empty for b < 0).
    pub path: Vec<Complex64>,
    /// Saddle anchoring the deformed path, if one was used.
    pub saddle: Option<Complex64>,
    /// One-term Laplace estimate of the descent piece at that saddle.
    pub laplace: Option<ExpComplex>,
    /// ∫|I| / |∫I| for the quadrature that produced the value.
    pub conditioning: f64,
}

fn tol(settings: &QuadratureSettings) -> Tolerance {
    Tolerance::new(settings.abs_tol, settings.rel_tol, settings.max_subdivisions)
}

/// Axis height profile h(t) = −Re F(it) = (t − w)² − log²(cos t / b).
fn axis_h(t: f64, b: f64, w: f64) -> f64 {
    let l = (t.cos() / b).ln();
    (t - w).powi(2) - l * l
}

fn axis_dh(t: f64, b: f64, w: f64) -> f64 {
    2.0 * (t - w) + 2.0 * (t.cos() / b).ln() * t.tan()
}

/// Roots of h′ on (lo, hi) by scanning and bisection. The scan is refined
/// geometrically toward the pole and toward π/2, where h′ varies fastest.
fn axis_critical_points(lo: f64, hi: f64, b: f64, w: f64) -> Vec<f64> {
    let n = 4000;
    let mut xs: Vec<f64> = (0..=n).map(|k| lo + (hi - lo) * k as f64 / n as f64).collect();
    let t0 = if b.abs() < 1.0 { b.acos() } else { f64::NAN };
    for c in [t0, FRAC_PI_2] {
        for k in 1..=60 {
            let d = 0.5f64.powi(k);
            xs.extend([c - d, c + d]);
        }
    }
    xs.retain(|x| *x >= lo && *x <= hi);
    xs.sort_by(|p, q| p.total_cmp(q));
    xs.dedup();
    let mut out = Vec::new();
    for pair in xs.windows(2) {
        let (mut p, mut q) = (pair[0], pair[1]);
        let (mut fp, fq) = (axis_dh(p, b, w), axis_dh(q, b, w));
        if !(fp.is_finite() && fq.is_finite()) || fp * fq > 0.0 {
            continue;
        }
        for _ in 0..100 {
            let m = 0.5 * (p + q);
            let fm = axis_dh(m, b, w);
            if fm * fp <= 0.0 {
                q = m;
            } else {
                p = m;
                fp = fm;
            }
        }
        out.push(0.5 * (p + q));
    }
    out.dedup_by(|p, q| (*p - *q).abs() < 1e-12);
    out
}

/// Gaussian width of e^{h/g²} around a critical point c.
fn axis_width(c: f64, b: f64, w: f64, g: f64) -> f64 {
    let e = 1e-6 * (1.0 + c.abs());
    let h2 = (axis_dh(c + e, b, w) - axis_dh(c - e, b, w)) / (2.0 * e);
    g / h2.abs().max(1e-6).sqrt()
}

/// Result of one log-scaled line integral: value and ∫|f|.
#[derive(Debug, Clone, Copy)]
struct Piece {
    value: ExpComplex,
    mass: ExpComplex,
    converged: bool,
}

impl Piece {
    fn zero() -> Self {
        Piece {
            value: ExpComplex::ZERO,
            mass: ExpComplex::ZERO,
            converged: true,
        }
    }

    fn plus(self, other: Piece) -> Piece {
        Piece {
            value: self.value + other.value,
            mass: self.mass + other.mass,
            converged: self.converged && other.converged,
        }
    }
}

/// ∫ I dθ along the imaginary axis from i·t_from to i·t_to, as a principal
/// value when the pole t₀ = arccos b lies strictly inside.
///
/// Direct PV quadrature loses accuracy when t₀ sits close to an end, so the
/// PV is taken as the integral around a half-disk detour on the Re θ < 0
/// side minus iπ·Res, which holds exactly for any detour radius.
fn axis_piece(t_from: f64, t_to: f64, b: f64, w: f64, g: f64, settings: &QuadratureSettings) -> Result<Piece> {
    let (lo, hi) = (t_from.min(t_to), t_from.max(t_to));
    let t0 = if b.abs() < 1.0 { b.acos() } else { f64::NAN };
    if !(t0 > lo && t0 < hi) {
        return Ok(axis_plain(t_from, t_to, b, w, g, settings));
    }
    // Stay clear of the branch point at iπ/2 and the mirror poles, and keep
    // |I| on the arc within a factor e of its size at the pole: off the axis
    // Re F moves at rate |h′(t₀)| = 2|t₀ − w|.
    let slope = 2.0 * (t0 - w).abs();
    let r = (g * g / slope.max(g)).min(0.5 * t0).min(0.5 * (FRAC_PI_2 - t0).abs()).min(0.5);
    if !(r > 0.0) {
        return Ok(axis_plain(t_from, t_to, b, w, g, settings));
    }
    let n = 24;
    let arc: Vec<Complex64> = (0..=n)
        .map(|k| {
            let phi = FRAC_PI_2 + PI * k as f64 / n as f64;
            Complex64::new(0.0, t0) + Complex64::from_polar(r, phi)
        })
        .collect();
    let res = pole_residue(b, w, g);
    let half = ExpComplex::new(res.mant * Complex64::new(0.0, PI), res.ln_scale);
    // downward: hi → t₀ + r, around the left of the pole, t₀ − r → lo
    let down = axis_plain(hi, t0 + r, b, w, g, settings)
        .plus(path_piece(&arc, b, w, g, settings)?)
        .plus(axis_plain(t0 - r, lo, b, w, g, settings));
    let value = down.value - half;
    let mass = down.mass + ExpComplex::new(Complex64::new(PI * res.mant.norm(), 0.0), res.ln_scale);
    Ok(Piece {
        value: if t_to < t_from { value } else { -value },
        mass,
        converged: down.converged,
    })
}

/// [`axis_piece`] by direct quadrature, with symmetric pairing at an interior pole.
fn axis_plain(t_from: f64, t_to: f64, b: f64, w: f64, g: f64, settings: &QuadratureSettings) -> Piece {
    if (t_to - t_from).abs() < 1e-300 {
        return Piece::zero();
    }
    let (lo, hi) = (t_from.min(t_to), t_from.max(t_to));
    let dir = if t_to >= t_from { 1.0 } else { -1.0 };
    let t0 = if b.abs() < 1.0 { b.acos() } else { f64::NAN };

    // Breakpoints: ends, pole, critical points of h and a few widths around them.
    let mut pts = vec![lo, hi];
    let crit = axis_critical_points(lo, hi, b, w);
    let mut marks: Vec<(f64, f64)> = crit.iter().map(|&c| (c, axis_width(c, b, w, g))).collect();
    marks.push((t0, g));
    marks.push((w, g));
    for &(c, width) in &marks {
        for k in [0.0, -1.0, 1.0, -4.0, 4.0, -16.0, 16.0] {
            let p = c + k * width;
            if p > lo && p < hi {
                pts.push(p);
            }
        }
    }
    pts.sort_by(|p, q| p.total_cmp(q));
    pts.dedup_by(|p, q| (*p - *q).abs() < 1e-12);

    let mut hmax = f64::NEG_INFINITY;
    for k in 0..=2000 {
        let t = lo + (hi - lo) * k as f64 / 2000.0;
        hmax = hmax.max(axis_h(t, b, w));
    }
    for &p in &pts {
        hmax = hmax.max(axis_h(p, b, w));
    }
    if !hmax.is_finite() {
        return Piece::zero();
    }
    // I(it)·i dt = −(1/2π) e^{h/g²} / (cos²t − b²) dt
    let f = |t: f64| -> f64 {
        let c = t.cos();
        let den = c * c - b * b;
        let e = ((axis_h(t, b, w) - hmax) / (g * g)).exp();
        if e == 0.0 {
            0.0
        } else {
            -e / (2.0 * PI * den)
        }
    };
    let tl = tol(settings);
    let re = |x: f64| Complex64::new(x, 0.0);
    let mut total = Complex64::new(0.0, 0.0);
    let mut mass = 0.0;
    let mut ok = true;
    let run = |pts: &[f64], total: &mut Complex64, mass: &mut f64, ok: &mut bool| {
        if pts.len() < 2 {
            return;
        }
        let e = integrate(|t| re(f(t)), pts, &tl);
        let m = integrate(|t| re(f(t).abs()), pts, &tl);
        *total += e.value;
        *mass += m.value.re;
        *ok &= e.converged;
    };
    if t0 > lo && t0 < hi {
        let delta = 0.5 * (t0 - lo).min(hi - t0);
        let left: Vec<f64> = pts.iter().copied().filter(|&p| p < t0 - delta).chain([t0 - delta]).collect();
        let right: Vec<f64> = [t0 + delta].into_iter().chain(pts.iter().copied().filter(|&p| p > t0 + delta)).collect();
        run(&left, &mut total, &mut mass, &mut ok);
        run(&right, &mut total, &mut mass, &mut ok);
        // symmetric pairing cancels the 1/(t − t₀) singularity
        let mut sym_pts = vec![0.0, delta];
        for &p in &pts {
            let s = (p - t0).abs();
            if s > 0.0 && s < delta {
                sym_pts.push(s);
            }
        }
        sym_pts.sort_by(|p, q| p.total_cmp(q));
        sym_pts.dedup();
        let e = integrate(|s| re(f(t0 + s) + f(t0 - s)), &sym_pts, &tl);
        let mut mass_pts = sym_pts.clone();
        mass_pts[0] = delta * 1e-8;
        mass_pts.retain(|&s| s >= delta * 1e-8);
        let m = integrate(|s| re(f(t0 + s).abs() + f(t0 - s).abs()), &mass_pts, &tl);
        total += e.value;
        mass += m.value.re;
        ok &= e.converged;
    } else {
        run(&pts, &mut total, &mut mass, &mut ok);
    }
    Piece {
        value: ExpComplex::new(total * dir, hmax / (g * g)),
        mass: ExpComplex::new(re(mass), hmax / (g * g)),
        converged: ok,
    }
}

/// ∫ I dθ along a polyline off the axis, log-scaled by the largest |I| on it.
fn path_piece(vertices: &[Complex64], b: f64, w: f64, g: f64, settings: &QuadratureSettings) -> Result<Piece> {
    if vertices.len() < 2 {
        return Ok(Piece::zero());
    }
    let mut smax = f64::NEG_INFINITY;
    for v in vertices {
        let s = -exponent(*v, b, w).re / (g * g);
        if s.is_finite() {
            smax = smax.max(s);
        }
    }
    if !smax.is_finite() {
        return Ok(Piece::zero());
    }
    let bad = std::cell::RefCell::new(None);
    let f = |t: Complex64| -> Complex64 {
        let e = -exponent(t, b, w) / (g * g) - smax;
        if e.re < -745.0 || !e.re.is_finite() {
            return Complex64::new(0.0, 0.0);
        }
        match prefactor(t, b) {
            Ok(p) => p * e.exp(),
            Err(err) => {
                bad.borrow_mut().get_or_insert(err);
                Complex64::new(0.0, 0.0)
            }
        }
    };
    let tl = tol(settings);
    let e = integrate_path(&f, vertices, &tl);
    // ∫|f||dθ| chord by chord
    let mut mass = 0.0;
    for pair in vertices.windows(2) {
        let h = pair[1] - pair[0];
        let seg = integrate_path(|t| Complex64::new(f(t).norm(), 0.0), pair, &tl);
        mass += (seg.value * h.norm() / h).norm();
    }
    if let Some(err) = bad.borrow_mut().take() {
        return Err(err);
    }
    Ok(Piece {
        value: ExpComplex::new(e.value, smax),
        mass: ExpComplex::new(Complex64::new(mass, 0.0), smax),
        converged: e.converged,
    })
}

/// How a traced descent path ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum PathEnd {
    /// Reached the branch point i·π/2, where I vanishes.
    BranchPoint,
    /// Ran off to Re θ → −∞ inside the strip.
    Left,
    Invalid,
}

/// Follow dθ/ds = conj F′ / |F′| (steepest ascent of Re F, descent of |I|)
/// from `start`, leaving along `dir`.
fn trace_descent(start: Complex64, dir: Complex64, b: f64, w: f64, g: f64) -> (Vec<Complex64>, PathEnd) {
    let far = 4.0 + b.abs().ln().abs();
    let ds_min = (g / 8.0).min(2e-3);
    let ds_max = 0.02;
    let branch_pt = Complex64::new(0.0, FRAC_PI_2);
    let mut th = start + dir * ds_min;
    let mut pts = vec![start, th];
    let field = |t: Complex64| {
        let d = d_exponent(t, b, w).conj();
        d / d.norm()
    };
    for _ in 0..200_000 {
        let dist = (th - start).norm();
        let ds = (0.1 * dist).clamp(ds_min, ds_max);
        if (th - branch_pt).norm() < (2.0 * ds).max(1e-3) {
            pts.push(branch_pt);
            return (pts, PathEnd::BranchPoint);
        }
        let k1 = field(th);
        let k2 = field(th + k1 * (0.5 * ds));
        if !(k1.is_finite() && k2.is_finite()) {
            return (pts, PathEnd::Invalid);
        }
        th += k2 * ds;
        pts.push(th);
        if th.re < -far {
            return (pts, PathEnd::Left);
        }
        if th.re > 1e-9 || th.im <= 0.0 || th.im >= PI {
            return (pts, PathEnd::Invalid);
        }
    }
    (pts, PathEnd::Invalid)
}

/// Drop the far tail of a descent path once |I| has fallen by e^{−80}
/// relative to its start.
fn truncate(path: &mut Vec<Complex64>, b: f64, w: f64, g: f64) {
    let f0 = exponent(path[0], b, w).re;
    if let Some(k) = path
        .iter()
        .position(|t| (exponent(*t, b, w).re - f0) / (g * g) > 80.0)
    {
        path.truncate(k + 1);
    }
}

/// A deformed contour: the axis from i·tmin to i·t_c followed by the descent
/// polyline from i·t_c.
struct Deformation {
    t_c: f64,
    path: Vec<Complex64>,
    saddle: Complex64,
}

fn complex_saddles(b: f64, w: f64) -> Vec<Complex64> {
    let mut found: Vec<Complex64> = Vec::new();
    for i in 0..12 {
        for j in 0..12 {
            let mut th = Complex64::new(-2.0 + 1.98 * i as f64 / 11.0, 0.05 + 1.5 * j as f64 / 11.0);
            for _ in 0..60 {
                let step = d_exponent(th, b, w) / d2_exponent(th, b);
                if !step.is_finite() {
                    break;
                }
                th -= step;
            }
            if d_exponent(th, b, w).norm() < 1e-11
                && th.re < -1e-6
                && th.im > 0.0
                && th.im < PI
                && !found.iter().any(|s| (s - th).norm() < 1e-7)
            {
                found.push(th);
            }
        }
    }
    found.sort_by(|p, q| p.re.total_cmp(&q.re).reverse().then(p.im.total_cmp(&q.im)));
    found
}

fn deform(b: f64, w: f64, g: f64) -> Option<Deformation> {
    // Two real axis critical points: leave horizontally from the one where h
    // has a local minimum (a saddle of Re F whose descent runs sideways).
    let eps = 1e-9;
    for t in axis_critical_points(eps, FRAC_PI_2 - eps, b, w) {
        let curv = d2_exponent(Complex64::new(0.0, t), b).re;
        if curv > 0.0 {
            let s = Complex64::new(0.0, t);
            let (mut path, end) = trace_descent(s, Complex64::new(-1.0, 0.0), b, w, g);
            if end == PathEnd::Left {
                truncate(&mut path, b, w, g);
                return Some(Deformation { t_c: t, path, saddle: s });
            }
        }
    }
    // Otherwise run from the branch point through an off-axis saddle.
    for s in complex_saddles(b, w) {
        let dir = (d2_exponent(s, b).inv()).sqrt();
        let dir = dir / dir.norm();
        let (p1, e1) = trace_descent(s, dir, b, w, g);
        let (p2, e2) = trace_descent(s, -dir, b, w, g);
        let (up, mut down) = match (e1, e2) {
            (PathEnd::BranchPoint, PathEnd::Left) => (p1, p2),
            (PathEnd::Left, PathEnd::BranchPoint) => (p2, p1),
            _ => continue,
        };
        truncate(&mut down, b, w, g);
        let mut path: Vec<Complex64> = up.into_iter().rev().collect();
        path.pop();
        path.extend(down);
        return Some(Deformation {
            t_c: FRAC_PI_2,
            path,
            saddle: s,
        });
    }
    None
}

/// ∫ I dθ along i·tmin → 0 → −∞ evaluated directly (principal value at the
/// pole). Accurate only when g is not small; see the conditioning number.
pub fn residue_brute(point: &DimensionlessPoint, settings: &QuadratureSettings) -> Result<(ExpComplex, f64)> {
    let (b, w, g) = (point.b, point.w, point.g);
    let contour = ResidueContour::new(point);
    let mut acc = Piece::zero();
    for (p, q) in &contour.segments {
        let piece = if p.re == 0.0 && q.re == 0.0 {
            axis_piece(p.im, q.im, b, w, g, settings)?
        } else {
            // straight horizontal piece, bisected near the origin
            let n = 64;
            let reach = q.re.min(-(12.0 * g.max(0.05) + b.ln().abs() + 3.0));
            let verts: Vec<Complex64> = (0..=n)
                .map(|k| Complex64::new(reach * (k as f64 / n as f64).powi(2), 0.0))
                .collect();
            path_piece(&verts, b, w, g, settings)?
        };
        acc = acc.plus(piece);
    }
    let cond = (acc.mass.ln_abs() - acc.value.ln_abs()).exp();
    Ok((-acc.value, cond))
}

fn contour_pieces(point: &DimensionlessPoint, settings: &QuadratureSettings) -> Result<ResidueEvaluation> {
    let (b, w, g) = (point.b, point.w, point.g);
    let mut contour = ResidueContour::new(point);
    if b < 0.0 {
        if w <= FRAC_PI_2 {
            return Ok(ResidueEvaluation {
                amplitude: ScaledAmplitude::with_parts(
                    Complex64::new(0.0, 0.0),
                    ExpComplex::ZERO,
                    0.0,
                    Method::Quadrature,
                ),
                contour,
                path: Vec::new(),
                saddle: None,
                laplace: None,
                conditioning: 1.0,
            });
        }
        let piece = axis_piece(FRAC_PI_2, w, b, w, g, settings)?;
        let value = -piece.value;
        let cond = (piece.mass.ln_abs() - piece.value.ln_abs()).exp();
        let err = (value.ln_abs() + settings.rel_tol.ln()).exp();
        return Ok(ResidueEvaluation {
            amplitude: ScaledAmplitude::with_parts(Complex64::new(0.0, 0.0), value, err, Method::Quadrature),
            contour,
            path: Vec::new(),
            saddle: None,
            laplace: None,
            conditioning: cond,
        });
    }

    let tmin = w.min(FRAC_PI_2);
    let t0 = b.acos();
    if let Some(def) = deform(b, w, g) {
        let axis = axis_piece(tmin, def.t_c, b, w, g, settings)?;
        let sd = path_piece(&def.path, b, w, g, settings)?;
        let mut total = axis.plus(sd);
        // half-residue bookkeeping, with the pole kept outside the swept region
        let res = pole_residue(b, w, g) * Complex64::new(0.0, PI);
        let lo = tmin.min(def.t_c);
        let hi = tmin.max(def.t_c);
        let res_mass = ExpComplex::new(Complex64::new(1.0, 0.0), res.ln_abs());
        if t0 > lo && t0 < hi {
            let s = if def.t_c < tmin { 1.0 } else { -1.0 };
            total.value = total.value + res.scale(s);
            total.mass = total.mass + res_mass;
        }
        if t0 > 0.0 && t0 < tmin {
            total.value = total.value - res;
            total.mass = total.mass + res_mass;
        }
        let value = -total.value;
        let cond = (total.mass.ln_abs() - total.value.ln_abs()).exp();
        let laplace = {
            let f2 = d2_exponent(def.saddle, b);
            let width = (Complex64::new(2.0 * PI * g * g, 0.0) / f2).sqrt();
            let along = def.path.get(1).map(|p| p - def.saddle).unwrap_or(Complex64::new(-1.0, 0.0));
            let width = if (width / along).re < 0.0 { -width } else { width };
            let half = if def.t_c == FRAC_PI_2 { 1.0 } else { 0.5 };
            integrand_scaled(def.saddle, b, w, g).ok().map(|i| -(i * (width * half)))
        };
        if total.converged && value.is_finite() {
            let err = (value.ln_abs() + (settings.rel_tol * cond.max(1.0)).ln()).exp();
            return Ok(ResidueEvaluation {
                amplitude: ScaledAmplitude::with_parts(Complex64::new(0.0, 0.0), value, err, Method::Saddle),
                contour,
                path: def.path,
                saddle: Some(def.saddle),
                laplace,
                conditioning: cond,
            });
        }
    }
    contour.validity = ContourValidity::NumericFallback;
    let (value, cond) = residue_brute(point, settings)?;
    let err = (value.ln_abs() + (settings.rel_tol * cond.max(1.0)).ln()).exp();
    Ok(ResidueEvaluation {
        amplitude: ScaledAmplitude::with_parts(Complex64::new(0.0, 0.0), value, err, Method::Quadrature),
        contour,
        path: Vec::new(),
        saddle: None,
        laplace: None,
        conditioning: cond,
    })
}

/// Residue part of X̃ with full diagnostics.
pub fn residue_evaluation(cfg: &DetectorConfig, settings: &QuadratureSettings) -> Result<ResidueEvaluation> {
    if cfg.scenario != Scenario::AntiParallelAccel {
        return Err(HarvestError::Precondition(format!(
            "residue terms exist only for anti-parallel detectors (got {})",
            cfg.scenario.name()
        )));
    }
    cfg.validate_for_amplitudes()?;
    settings.validate()?;
    let point = DimensionlessPoint::new(cfg.separation * cfg.kappa, cfg.w(), cfg.kappa * cfg.sigma);
    if point.b == 0.0 {
        return Err(HarvestError::OutOfValidity(
            "b = 0 separates the two residue cases".into(),
        ));
    }
    contour_pieces(&point, settings)
}

/// Residue part of X̃ (kind X_scaled, parts.residue_free = 0).
pub fn residue_contribution(cfg: &DetectorConfig, settings: &QuadratureSettings) -> Result<ScaledAmplitude> {
    Ok(residue_evaluation(cfg, settings)?.amplitude)
}
