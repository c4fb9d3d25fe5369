//! Parameter sweeps over the reduced plane (a, w) = (Lκ, κσ²Ω), resonance
//! tracing, corridor sweeps and the three rangefinding protocols.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::detector::{DetectorConfig, Scenario};
use crate::entanglement::{assemble, sample_measurements, AssemblyMethod, Basis, StateScale, TwoDetectorState};
use crate::error::{HarvestError, Result};
use crate::expnum::ExpComplex;
use crate::quadrature::{x_shifted_residue_free, QuadratureSettings};
use crate::residues::{residue_evaluation, ContourValidity};
use crate::saddle::{critical_distance, criterion_point};

/// Default g = κσ for grids.
pub const DEFAULT_G: f64 = 0.001;
/// Default cells per axis.
pub const DEFAULT_CELLS: usize = 200;
/// Bisection width for boundary roots.
pub const BOUNDARY_TOL: f64 = 1e-10;
/// Coupling used where a configuration is built internally; amplitudes are
/// scaled, so it only matters for raw conversion.
pub const CORRIDOR_ETA0: f64 = 0.01;
/// Below this |d ln N / d ln L| a gradient rangefinder is flagged.
pub const GRADIENT_FLOOR: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanMethod {
    SaddleOnly,
    QuadratureWithResidues,
}

impl ScanMethod {
    fn assembly(self) -> AssemblyMethod {
        match self {
            ScanMethod::SaddleOnly => AssemblyMethod::Saddle,
            ScanMethod::QuadratureWithResidues => AssemblyMethod::Quadrature,
        }
    }
}

/// Uniform axis on (lo, hi], excluding the open left end.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisSpec {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl AxisSpec {
    pub fn new(lo: f64, hi: f64, n: usize) -> Self {
        AxisSpec { lo, hi, n }
    }

    pub fn values(&self) -> Vec<f64> {
        let step = self.step();
        (1..=self.n).map(|i| self.lo + step * i as f64).collect()
    }

    pub fn step(&self) -> f64 {
        (self.hi - self.lo) / self.n as f64
    }

    pub fn validate(&self, name: &str) -> Result<()> {
        if self.n == 0 || !(self.hi > self.lo) || !self.lo.is_finite() || !self.hi.is_finite() {
            return Err(HarvestError::InvalidParameter(format!(
                "{name} axis needs lo < hi and at least one cell"
            )));
        }
        Ok(())
    }
}

/// Settings snapshot that reproduces a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanSpec {
    pub scenario: Scenario,
    pub a: AxisSpec,
    pub w: AxisSpec,
    pub g: f64,
    pub sigma: f64,
    pub method: ScanMethod,
    pub settings: QuadratureSettings,
}

impl ScanSpec {
    /// 200×200 over a ∈ (0, 4.5], w ∈ (0, π − 0.01] at g = 0.001, σ = 1.
    pub fn default_for(scenario: Scenario, method: ScanMethod) -> Self {
        ScanSpec {
            scenario,
            a: AxisSpec::new(0.0, 4.5, DEFAULT_CELLS),
            w: AxisSpec::new(0.0, PI - 0.01, DEFAULT_CELLS),
            g: DEFAULT_G,
            sigma: 1.0,
            method,
            settings: QuadratureSettings::default(),
        }
    }

    /// Anti-parallel cells closer than one a-step to the resonance curve.
    pub fn resonance_tolerance(&self) -> f64 {
        self.a.step()
    }

    pub fn validate(&self) -> Result<()> {
        self.a.validate("a")?;
        self.w.validate("w")?;
        if self.a.lo < 0.0 {
            return Err(HarvestError::InvalidParameter("a must be ≥ 0".into()));
        }
        if self.w.lo < 0.0 || self.w.hi >= PI {
            return Err(HarvestError::InvalidParameter(format!(
                "κσ²Ω must be < π (w range ({}, {}])",
                self.w.lo, self.w.hi
            )));
        }
        if !(self.g > 0.0) || !(self.sigma > 0.0) {
            return Err(HarvestError::InvalidParameter("g and σ must be > 0".into()));
        }
        self.settings.validate()
    }
}

/// Detector configuration for a reduced-plane point. Inertial detectors
/// borrow κ = g/σ as the length unit only.
pub fn cell_config(scenario: Scenario, a: f64, w: f64, g: f64, sigma: f64) -> DetectorConfig {
    let mut cfg = DetectorConfig::from_dimensionless(scenario, a, w, g, sigma);
    if scenario == Scenario::Inertial {
        cfg.kappa = 0.0;
    }
    cfg
}

/// Which path produced a cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellMethod {
    Saddle,
    Quadrature,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellFlags {
    /// Anti-parallel cell within the resonance tolerance.
    pub near_resonance: bool,
    /// Residue evaluated by plain contour quadrature, not a descent path.
    pub residue_fallback: bool,
    /// σ < L/10.
    pub spacelike_ok: bool,
    pub failed: bool,
}

impl CellFlags {
    /// `|`-joined names, or `-`.
    pub fn label(&self) -> String {
        let mut v = Vec::new();
        if self.near_resonance {
            v.push("near_resonance");
        }
        if self.residue_fallback {
            v.push("residue_fallback");
        }
        if self.spacelike_ok {
            v.push("spacelike_ok");
        }
        if self.failed {
            v.push("failed");
        }
        if v.is_empty() {
            "-".into()
        } else {
            v.join("|")
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanCell {
    pub a: f64,
    pub w: f64,
    /// Scaled negativity; +∞ when it leaves f64, NaN on failure.
    pub n_scaled: f64,
    /// ln Ñ; −∞ when not entangled.
    pub ln_n: f64,
    pub entangled: bool,
    pub method: CellMethod,
    pub flags: CellFlags,
    pub error: Option<String>,
}

/// Negativity on an (a, w) grid; `cells[j * a_axis.len() + i]` holds (a_i, w_j).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanGrid {
    pub a_axis: Vec<f64>,
    pub w_axis: Vec<f64>,
    pub g: f64,
    pub method: ScanMethod,
    pub cells: Vec<ScanCell>,
    pub manifest: ScanSpec,
}

impl ScanGrid {
    pub fn cell(&self, i_a: usize, j_w: usize) -> &ScanCell {
        &self.cells[j_w * self.a_axis.len() + i_a]
    }

    pub fn failures(&self) -> usize {
        self.cells.iter().filter(|c| c.flags.failed).count()
    }
}

/// a_crit(w) = 2(1 − cos w), written as 4 sin²(w/2).
pub fn resonance_a(w: f64) -> f64 {
    4.0 * (0.5 * w).sin().powi(2)
}

fn evaluate_cell(spec: &ScanSpec, a: f64, w: f64) -> ScanCell {
    let cfg = cell_config(spec.scenario, a, w, spec.g, spec.sigma);
    let mut flags = CellFlags {
        spacelike_ok: cfg.spacelike_ok(),
        ..Default::default()
    };
    let mut method = spec.method.assembly();
    if spec.scenario == Scenario::AntiParallelAccel && (a - resonance_a(w)).abs() < spec.resonance_tolerance() {
        flags.near_resonance = true;
        method = AssemblyMethod::Quadrature;
    }
    let cell_method = match method {
        AssemblyMethod::Saddle => CellMethod::Saddle,
        AssemblyMethod::Quadrature => CellMethod::Quadrature,
    };
    match assemble(&cfg, method, &spec.settings) {
        Ok(asm) => {
            if let Some(r) = &asm.residue {
                flags.residue_fallback = r.contour.validity == ContourValidity::NumericFallback && !r.amplitude.value.is_zero();
            }
            let ln_n = asm.ln_negativity();
            ScanCell {
                a,
                w,
                n_scaled: ln_n.exp(),
                ln_n,
                entangled: asm.entangled(),
                method: cell_method,
                flags,
                error: None,
            }
        }
        Err(e) => {
            flags.failed = true;
            ScanCell {
                a,
                w,
                n_scaled: f64::NAN,
                ln_n: f64::NAN,
                entangled: false,
                method: cell_method,
                flags,
                error: Some(e.to_string()),
            }
        }
    }
}

/// Negativity over the grid, cells evaluated in parallel. Failed cells carry
/// their error instead of aborting the scan.
pub fn grid_scan(spec: &ScanSpec) -> Result<ScanGrid> {
    spec.validate()?;
    let a_axis = spec.a.values();
    let w_axis = spec.w.values();
    let na = a_axis.len();
    let cells = (0..na * w_axis.len())
        .into_par_iter()
        .map(|k| evaluate_cell(spec, a_axis[k % na], w_axis[k / na]))
        .collect();
    Ok(ScanGrid {
        a_axis,
        w_axis,
        g: spec.g,
        method: spec.method,
        cells,
        manifest: spec.clone(),
    })
}

fn reduced_margin(scenario: Scenario, a: f64, w: f64) -> Result<f64> {
    match scenario {
        // L/2 < σ²Ω in units of κ = g/σ
        Scenario::Inertial => Ok(w - 0.5 * a),
        s => Ok(criterion_point(s, a, w)?.margin),
    }
}

/// Root in a of the closed-form criterion margin at fixed w, by bisection.
pub fn boundary_trace(scenario: Scenario, w: f64) -> Result<f64> {
    if !(w > 0.0 && w < PI) {
        return Err(HarvestError::InvalidParameter(format!("κσ²Ω must be in (0, π) (got {w})")));
    }
    let mut lo = 0.0;
    let mut hi = 8.0;
    let m_lo = reduced_margin(scenario, lo, w)?;
    let m_hi = reduced_margin(scenario, hi, w)?;
    if !(m_lo > 0.0 && m_hi < 0.0) {
        return Err(HarvestError::OutOfValidity(format!(
            "criterion margin does not change sign on [0, 8] at w = {w}"
        )));
    }
    while hi - lo > BOUNDARY_TOL * 1e-2 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if reduced_margin(scenario, mid, w)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResonancePoint {
    pub w: f64,
    pub a_crit: f64,
    /// L_crit = a_crit/κ.
    pub l_crit: f64,
    /// Ω = w/(κσ²).
    pub omega: f64,
}

/// The critical-distance curve a_crit(w) = 2(1 − cos w).
pub fn resonance_locus(w_axis: &[f64], kappa: f64, sigma: f64) -> Result<Vec<ResonancePoint>> {
    w_axis
        .iter()
        .map(|&w| {
            let omega = w / (kappa * sigma * sigma);
            let l_crit = critical_distance(kappa, sigma, omega)?;
            Ok(ResonancePoint {
                w,
                a_crit: resonance_a(w),
                l_crit,
                omega,
            })
        })
        .collect()
}

/// Re X̃ against δL = L − L_crit at fixed gap.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorridorSweep {
    pub kappa: f64,
    pub sigma: f64,
    pub omega: f64,
    pub l_crit: f64,
    pub delta_l_axis: Vec<f64>,
    /// Scaled Re X̃ of the residue-free part; NaN where the point failed.
    pub re_x: Vec<f64>,
    /// Scaled Re X̃ including the residue term (may be ±∞ in f64). Unlike
    /// `re_x` it stays finite and smooth through δL = 0.
    pub re_x_total: Vec<f64>,
    /// Neighbouring negative points around the positive run nearest δL = 0.
    pub sign_change_interval: Option<(f64, f64)>,
    pub failures: Vec<(f64, String)>,
}

impl CorridorSweep {
    pub fn far_field_magnitude(&self) -> f64 {
        let (i, _) = self
            .delta_l_axis
            .iter()
            .enumerate()
            .filter(|(k, _)| self.re_x[*k].is_finite())
            .max_by(|p, q| p.1.abs().total_cmp(&q.1.abs()))
            .unwrap_or((0, &0.0));
        self.re_x.get(i).map(|v| v.abs()).unwrap_or(f64::NAN)
    }
}

/// `n` evenly spaced points on [lo, hi].
pub fn linear_axis(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![0.5 * (lo + hi)];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// ±geometric points between `min_abs` and `max_abs`, `n_per_side` each side,
/// ascending. Resolves a narrow corridor and the far field in one sweep.
pub fn symmetric_log_axis(min_abs: f64, max_abs: f64, n_per_side: usize) -> Vec<f64> {
    let pos: Vec<f64> = if n_per_side == 1 {
        vec![min_abs]
    } else {
        let r = (max_abs / min_abs).ln();
        (0..n_per_side)
            .map(|i| min_abs * (r * i as f64 / (n_per_side - 1) as f64).exp())
            .collect()
    };
    let mut v: Vec<f64> = pos.iter().rev().map(|x| -x).collect();
    v.extend(pos);
    v
}

fn corridor_precondition(kappa: f64, sigma: f64, omega: f64) -> Result<f64> {
    let w = kappa * sigma * sigma * omega;
    let l_crit = critical_distance(kappa, sigma, omega)?;
    let a = kappa * l_crit;
    if !(w > 1.2 && w < 0.5 * PI) || !(a > 1.1 && a < 2.0) {
        return Err(HarvestError::Precondition(format!(
            "corridor regime needs 1.2 < κσ²Ω < π/2 and 1.1 < κL_crit < 2 (got w = {w}, a = {a})"
        )));
    }
    Ok(l_crit)
}

fn sign_change_interval(axis: &[f64], re_x: &[f64]) -> Option<(f64, f64)> {
    let pos: Vec<usize> = (0..axis.len()).filter(|&k| re_x[k] > 0.0).collect();
    let seed = *pos.iter().min_by(|p, q| axis[**p].abs().total_cmp(&axis[**q].abs()))?;
    let mut lo = seed;
    while lo > 0 && !(re_x[lo - 1] < 0.0) {
        lo -= 1;
    }
    let mut hi = seed;
    while hi + 1 < axis.len() && !(re_x[hi + 1] < 0.0) {
        hi += 1;
    }
    if lo == 0 || hi + 1 == axis.len() {
        return None;
    }
    Some((axis[lo - 1], axis[hi + 1]))
}

/// Re X̃ by quadrature at L = L_crit + δL for every δL in `axis`.
pub fn corridor_sweep_on(
    kappa: f64,
    sigma: f64,
    omega: f64,
    axis: &[f64],
    settings: &QuadratureSettings,
) -> Result<CorridorSweep> {
    let l_crit = corridor_precondition(kappa, sigma, omega)?;
    settings.validate()?;
    let vals: Vec<std::result::Result<(f64, f64), String>> = axis
        .par_iter()
        .map(|&dl| {
            let cfg = DetectorConfig::new(Scenario::AntiParallelAccel, kappa, sigma, omega, l_crit + dl, CORRIDOR_ETA0);
            let rf = x_shifted_residue_free(&cfg, settings).map_err(|e| e.to_string())?;
            let res = residue_evaluation(&cfg, settings).map_err(|e| e.to_string())?;
            let total = ExpComplex::from(rf.complex()) + res.amplitude.value;
            Ok((rf.complex().re, total.re().to_complex().re))
        })
        .collect();
    let mut re_x = Vec::with_capacity(axis.len());
    let mut re_x_total = Vec::with_capacity(axis.len());
    let mut failures = Vec::new();
    for (dl, v) in axis.iter().zip(vals) {
        match v {
            Ok((r, t)) => {
                re_x.push(r);
                re_x_total.push(t);
            }
            Err(e) => {
                re_x.push(f64::NAN);
                re_x_total.push(f64::NAN);
                failures.push((*dl, e));
            }
        }
    }
    Ok(CorridorSweep {
        kappa,
        sigma,
        omega,
        l_crit,
        sign_change_interval: sign_change_interval(axis, &re_x),
        delta_l_axis: axis.to_vec(),
        re_x,
        re_x_total,
        failures,
    })
}

/// [`corridor_sweep_on`] over `n_points` evenly spaced δL in `range`.
pub fn corridor_sweep(
    kappa: f64,
    sigma: f64,
    omega: f64,
    range: (f64, f64),
    n_points: usize,
    settings: &QuadratureSettings,
) -> Result<CorridorSweep> {
    if n_points == 0 || !(range.1 > range.0) {
        return Err(HarvestError::InvalidParameter("δL range needs lo < hi and n ≥ 1".into()));
    }
    corridor_sweep_on(kappa, sigma, omega, &linear_axis(range.0, range.1, n_points), settings)
}

/// How the scaled state is turned into a samplable one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingScale {
    /// Physical η₀² e^{−(σΩ)²} factor; fails when it underflows.
    Physical,
    /// Positive rescaling so that max(Ã, |X̃|) equals the target. The sign
    /// of Re X, and so the verdict, is unchanged.
    Amplified { target: f64 },
}

impl Default for SamplingScale {
    fn default() -> Self {
        SamplingScale::Amplified { target: 0.1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorridorVerdict {
    pub separation: f64,
    /// Scaled Re X̃ from the pipeline.
    pub re_x_scaled: f64,
    /// ⟨σyσy⟩ − ⟨σxσx⟩ from the samples, in the sampled state's scale.
    pub estimate_4re_x: f64,
    pub standard_error: f64,
    /// ln of the factor mapping scaled values to the sampled state.
    pub ln_scale: f64,
    /// True when the estimate says Re X > 0, i.e. L within O(δL) of L_crit.
    pub at_critical: bool,
}

fn samplable(state: &TwoDetectorState, cfg: &DetectorConfig, scale: SamplingScale) -> Result<(TwoDetectorState, f64)> {
    match scale {
        SamplingScale::Physical => {
            let raw = state.to_raw(cfg.eta0, cfg.sigma_omega(), false)?;
            Ok((raw, 2.0 * cfg.eta0.ln() - cfg.sigma_omega().powi(2)))
        }
        SamplingScale::Amplified { target } => {
            if !(target > 0.0 && target <= 0.25) {
                return Err(HarvestError::InvalidParameter("amplified target must be in (0, 0.25]".into()));
            }
            let ln_max = state.a.ln().max(state.x.ln_abs());
            let ln_f = target.ln() - ln_max;
            let f = ln_f.exp();
            let mut s = *state;
            s.a *= f;
            s.b *= f;
            s.c *= f;
            s.x = ExpComplex::new(s.x.mant, s.x.ln_scale + ln_f);
            s.scale = StateScale::Raw;
            Ok((s, ln_f))
        }
    }
}

/// Seed for ensemble member `index`: seed ⊕ index.
pub fn derived_seed(seed: u64, index: usize) -> u64 {
    seed ^ index as u64
}

/// Sampled corridor rangefinder: for each configuration, estimate 4 Re X
/// from XX and YY shots and report whether Re X > 0.
pub fn rangefind_corridor(
    ensemble: &[DetectorConfig],
    n_shots: usize,
    seed: u64,
    scale: SamplingScale,
    settings: &QuadratureSettings,
) -> Result<Vec<CorridorVerdict>> {
    if n_shots < 2 {
        return Err(HarvestError::InvalidParameter("need at least 2 shots".into()));
    }
    ensemble
        .iter()
        .enumerate()
        .map(|(i, cfg)| {
            if cfg.scenario != Scenario::AntiParallelAccel {
                return Err(HarvestError::Precondition("corridor rangefinding needs anti-parallel detectors".into()));
            }
            corridor_precondition(cfg.kappa, cfg.sigma, cfg.omega)?;
            let asm = assemble(cfg, AssemblyMethod::Quadrature, settings)?;
            let (state, ln_scale) = samplable(&asm.state, cfg, scale)?;
            // one ChaCha seed per member, a different draw per basis
            let mut rng = ChaCha8Rng::seed_from_u64(derived_seed(seed, i));
            let s_xx = rand::Rng::gen::<u64>(&mut rng);
            let s_yy = rand::Rng::gen::<u64>(&mut rng);
            let xx = sample_measurements(&state, Basis::XX, n_shots, s_xx)?;
            let yy = sample_measurements(&state, Basis::YY, n_shots, s_yy)?;
            let est = yy.correlator() - xx.correlator();
            Ok(CorridorVerdict {
                separation: cfg.separation,
                re_x_scaled: asm.x.complex().re,
                estimate_4re_x: est,
                standard_error: (xx.standard_error().powi(2) + yy.standard_error().powi(2)).sqrt(),
                ln_scale,
                at_critical: est > 0.0,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuddenDeath {
    pub above: bool,
    pub below: bool,
    pub ln_n_above: f64,
    pub ln_n_below: f64,
    /// Fires iff entangled at L = 2/κ + δ and not at 2/κ − δ.
    pub triggered: bool,
}

/// Minimum κσ²Ω for the sudden-death protocol.
pub const NECKTIE_MIN_W: f64 = 2.4;

/// Anti-parallel negativity at L = 2/κ ± δ.
pub fn rangefind_sudden_death(
    kappa: f64,
    sigma: f64,
    omega: f64,
    delta: f64,
    method: AssemblyMethod,
    settings: &QuadratureSettings,
) -> Result<SuddenDeath> {
    let w = kappa * sigma * sigma * omega;
    if !(w >= NECKTIE_MIN_W) {
        return Err(HarvestError::Precondition(format!(
            "sudden death needs κσ²Ω ≳ {NECKTIE_MIN_W} (got {w})"
        )));
    }
    if !(delta > 0.0 && delta < 2.0 / kappa) {
        return Err(HarvestError::InvalidParameter("need 0 < δ < 2/κ".into()));
    }
    let at = |l: f64| {
        let cfg = DetectorConfig::new(Scenario::AntiParallelAccel, kappa, sigma, omega, l, CORRIDOR_ETA0);
        assemble(&cfg, method, settings)
    };
    let up = at(2.0 / kappa + delta)?;
    let down = at(2.0 / kappa - delta)?;
    let (above, below) = (up.entangled(), down.entangled());
    Ok(SuddenDeath {
        above,
        below,
        ln_n_above: up.ln_negativity(),
        ln_n_below: down.ln_negativity(),
        triggered: above && !below,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradientEstimate {
    pub delta_l: f64,
    pub ln_n_ref: f64,
    /// d ln Ñ / dL at the reference.
    pub dln_n_dl: f64,
    /// |d ln Ñ / d ln L|.
    pub conditioning: f64,
    pub ill_conditioned: bool,
}

/// ln Ñ for a configuration.
pub fn ln_negativity_at(cfg: &DetectorConfig, method: AssemblyMethod, settings: &QuadratureSettings) -> Result<f64> {
    Ok(assemble(cfg, method, settings)?.ln_negativity())
}

/// δL from a measured negativity by local inversion about the reference.
/// Negativities are passed as ln Ñ: near the necktie Ñ itself overflows f64,
/// and the log-linear inversion agrees with the linear one to first order.
pub fn rangefind_gradient(
    reference: &DetectorConfig,
    ln_measured_n: f64,
    method: AssemblyMethod,
    settings: &QuadratureSettings,
) -> Result<GradientEstimate> {
    let l = reference.separation;
    let h = 1e-3 * l;
    let at = |dl: f64| {
        let mut cfg = *reference;
        cfg.separation = l + dl;
        ln_negativity_at(&cfg, method, settings)
    };
    let ln_ref = at(0.0)?;
    let (up, down) = (at(h)?, at(-h)?);
    let slope = (up - down) / (2.0 * h);
    let conditioning = (slope * l).abs();
    let ill_conditioned = !ln_ref.is_finite() || !slope.is_finite() || conditioning < GRADIENT_FLOOR;
    let delta_l = if ln_measured_n == ln_ref { 0.0 } else { (ln_measured_n - ln_ref) / slope };
    Ok(GradientEstimate {
        delta_l,
        ln_n_ref: ln_ref,
        dln_n_dl: slope,
        conditioning,
        ill_conditioned,
    })
}
