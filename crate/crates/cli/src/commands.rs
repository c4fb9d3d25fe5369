use std::f64::consts::PI;

use harvest_core::detector::reduce;
use harvest_core::entanglement::{assemble, AssemblyMethod};
use harvest_core::quadrature::{
    a_direct_oracle, a_shifted, x_direct_oracle, x_shifted_residue_free, QuadratureSettings,
};
use harvest_core::residues::residue_contribution;
use harvest_core::saddle::{a_saddle, critical_distance, criterion, x_saddle};
use harvest_core::scan::{
    cell_config, corridor_sweep_on, grid_scan, linear_axis, rangefind_corridor, rangefind_gradient,
    rangefind_sudden_death, resonance_locus, symmetric_log_axis, AxisSpec, SamplingScale, ScanMethod, ScanSpec,
    CORRIDOR_ETA0,
};
use harvest_core::{DetectorConfig, ExpComplex, Scenario};
use num_complex::Complex64;
use serde_json::{json, Value};

use crate::config::Params;
use crate::output::{num, Manifest, Table};
use crate::{CliError, Method};

/// Corridor defaults: κ = 1/1000, σ = 1, Ω = 1250.
const CORRIDOR_DEFAULT: (f64, f64, f64) = (0.001, 1.0, 1250.0);

/// What a subcommand hands back for emission.
pub struct Report {
    pub table: Option<Table>,
    pub json: Value,
    /// Number of failed gates (oracle suites only).
    pub failed_gates: usize,
}

fn assembly_method(m: Method) -> AssemblyMethod {
    match m {
        Method::Saddle => AssemblyMethod::Saddle,
        Method::Quadrature => AssemblyMethod::Quadrature,
    }
}

fn to_json<T: serde::Serialize>(v: &T) -> Result<Value, CliError> {
    serde_json::to_value(v).map_err(|e| CliError::Runtime(e.to_string()))
}

fn method_name(m: Method) -> &'static str {
    match m {
        Method::Saddle => "saddle",
        Method::Quadrature => "quadrature",
    }
}

fn exp_json(v: &ExpComplex) -> Value {
    json!({ "ln_abs": v.ln_abs(), "arg": v.arg(), "mant": [v.mant.re, v.mant.im], "ln_scale": v.ln_scale })
}

/// A single configuration from either physical or dimensionless keys.
fn point_config(p: &mut Params) -> Result<DetectorConfig, CliError> {
    let scenario = p.scenario(None)?;
    let dimensionless = ["a", "w", "g"].iter().any(|k| p.has(k));
    let physical = ["kappa", "omega", "L"].iter().any(|k| p.has(k));
    let mut cfg = match (dimensionless, physical) {
        (true, true) => {
            return Err(CliError::Validation(
                "give either a, w, g or kappa, sigma, omega, L, not both".into(),
            ))
        }
        (true, false) => {
            let (a, w, g) = (p.f64_req("a")?, p.f64_req("w")?, p.f64_req("g")?);
            let sigma = p.f64_or("sigma", 1.0)?;
            cell_config(scenario, a, w, g, sigma)
        }
        (false, _) => {
            let kappa = if scenario == Scenario::Inertial {
                p.f64_or("kappa", 0.0)?
            } else {
                p.f64_req("kappa")?
            };
            DetectorConfig::new(scenario, kappa, p.f64_req("sigma")?, p.f64_req("omega")?, p.f64_req("L")?, 0.01)
        }
    };
    cfg.eta0 = p.f64_or("eta0", cfg.eta0)?;
    cfg.validate_for_amplitudes()?;
    Ok(cfg)
}

pub fn compute(p: &mut Params, m: &mut Manifest, method: Method) -> Result<Report, CliError> {
    let cfg = point_config(p)?;
    let settings = p.settings()?;
    m.quadrature = Some(settings.clone());
    m.method("amplitudes", method_name(method));
    let asm = assemble(&cfg, assembly_method(method), &settings)?;
    if cfg.scenario == Scenario::AntiParallelAccel {
        m.method("residue", "quadrature");
    }
    let crit = criterion(&cfg).ok();
    let point = reduce(&cfg).ok();
    let rf = asm.x.residue_free();
    let res = asm.x.residue();
    let diagnostics = asm.residue.as_ref().map(|r| {
        json!({
            "case": r.contour.case,
            "validity": r.contour.validity,
            "segments": r.contour.segments.iter().map(|(s, e)| [[s.re, s.im], [e.re, e.im]]).collect::<Vec<_>>(),
            "saddle": r.saddle.map(|s| [s.re, s.im]),
            "laplace": r.laplace.as_ref().map(exp_json),
            "conditioning": r.conditioning,
            "path_vertices": r.path.len(),
            "error": r.amplitude.error,
        })
    });
    let json = json!({
        "config": cfg,
        "point": point,
        "A": { "value": asm.a.complex().re, "error": asm.a.error, "method": asm.a.method },
        "X": {
            "total": exp_json(&asm.x.value),
            "parts": { "residue_free": [rf.re, rf.im], "residue": exp_json(&res) },
            "error": asm.x.error,
            "method": asm.x.method,
        },
        "N": { "value": asm.negativity(), "ln": asm.ln_negativity() },
        "entangled": asm.entangled(),
        "criterion": crit,
        "residue_diagnostics": diagnostics,
        "spacelike_ok": cfg.spacelike_ok(),
    });
    let mut table = Table::new(vec![
        "scenario",
        "kappa",
        "sigma",
        "omega",
        "L",
        "A",
        "X_residue_free_re",
        "X_residue_free_im",
        "X_residue_ln_abs",
        "X_residue_arg",
        "X_ln_abs",
        "X_arg",
        "ln_N",
        "entangled",
    ]);
    table.push(vec![
        cfg.scenario.name().to_string(),
        num(cfg.kappa),
        num(cfg.sigma),
        num(cfg.omega),
        num(cfg.separation),
        num(asm.a.complex().re),
        num(rf.re),
        num(rf.im),
        num(res.ln_abs()),
        num(res.arg()),
        num(asm.x.value.ln_abs()),
        num(asm.x.value.arg()),
        num(asm.ln_negativity()),
        asm.entangled().to_string(),
    ]);
    Ok(Report {
        table: Some(table),
        json,
        failed_gates: 0,
    })
}

pub fn scan(p: &mut Params, m: &mut Manifest, method: Method) -> Result<Report, CliError> {
    let scenario = p.scenario(None)?;
    let scan_method = match method {
        Method::Saddle => ScanMethod::SaddleOnly,
        Method::Quadrature => ScanMethod::QuadratureWithResidues,
    };
    let d = ScanSpec::default_for(scenario, scan_method);
    let spec = ScanSpec {
        scenario,
        a: AxisSpec::new(p.f64_or("a_lo", d.a.lo)?, p.f64_or("a_hi", d.a.hi)?, p.usize_or("a_n", d.a.n)?),
        w: AxisSpec::new(p.f64_or("w_lo", d.w.lo)?, p.f64_or("w_hi", d.w.hi)?, p.usize_or("w_n", d.w.n)?),
        g: p.f64_or("g", d.g)?,
        sigma: p.f64_or("sigma", d.sigma)?,
        method: scan_method,
        settings: p.settings()?,
    };
    spec.validate()?;
    m.quadrature = Some(spec.settings.clone());
    m.method("grid", method_name(method));
    let grid = grid_scan(&spec)?;
    let mut table = Table::new(vec!["a", "w", "N_scaled", "entangled", "method", "flags"]);
    for c in &grid.cells {
        let method = serde_json::to_value(c.method)
            .ok()
            .and_then(|v| v.as_str().map(str::to_string))
            .unwrap_or_default();
        table.push(vec![
            num(c.a),
            num(c.w),
            num(c.n_scaled),
            c.entangled.to_string(),
            method,
            c.flags.label(),
        ]);
    }
    let json = to_json(&grid)?;
    Ok(Report {
        table: Some(table),
        json,
        failed_gates: 0,
    })
}

pub fn resonance(p: &mut Params, _m: &mut Manifest) -> Result<Report, CliError> {
    let kappa = p.f64_or("kappa", CORRIDOR_DEFAULT.0)?;
    let sigma = p.f64_or("sigma", CORRIDOR_DEFAULT.1)?;
    let axis = AxisSpec::new(p.f64_or("w_lo", 0.0)?, p.f64_or("w_hi", PI - 0.01)?, p.usize_or("w_n", 200)?);
    axis.validate("w")?;
    let locus = resonance_locus(&axis.values(), kappa, sigma)?;
    let mut table = Table::new(vec!["w", "a_crit", "L_crit", "omega"]);
    for r in &locus {
        table.push(vec![num(r.w), num(r.a_crit), num(r.l_crit), num(r.omega)]);
    }
    Ok(Report {
        table: Some(table),
        json: to_json(&locus)?,
        failed_gates: 0,
    })
}

fn corridor_point(p: &mut Params) -> Result<(f64, f64, f64), CliError> {
    Ok((
        p.f64_or("kappa", CORRIDOR_DEFAULT.0)?,
        p.f64_or("sigma", CORRIDOR_DEFAULT.1)?,
        p.f64_or("omega", CORRIDOR_DEFAULT.2)?,
    ))
}

pub fn corridor(p: &mut Params, m: &mut Manifest) -> Result<Report, CliError> {
    let (kappa, sigma, omega) = corridor_point(p)?;
    let axis = match p.str_or("axis", "linear").as_str() {
        "linear" => {
            let (lo, hi, n) = (p.f64_or("delta_lo", -3.0)?, p.f64_or("delta_hi", 3.0)?, p.usize_or("n", 120)?);
            if !(lo < hi) || n < 2 {
                return Err(CliError::Validation("corridor axis needs delta_lo < delta_hi and n ≥ 2".into()));
            }
            linear_axis(lo, hi, n)
        }
        "log" => {
            let (lo, hi, n) = (p.f64_or("delta_min", 0.01)?, p.f64_or("delta_max", 100.0)?, p.usize_or("n", 8)?);
            if !(lo > 0.0 && lo < hi) || n == 0 {
                return Err(CliError::Validation("log corridor axis needs 0 < delta_min < delta_max and n ≥ 1".into()));
            }
            symmetric_log_axis(lo, hi, n)
        }
        other => return Err(CliError::Validation(format!("unknown corridor axis '{other}'"))),
    };
    let settings = p.settings()?;
    m.quadrature = Some(settings.clone());
    m.method("residue_free", "quadrature");
    m.method("residue", "quadrature");
    let sweep = corridor_sweep_on(kappa, sigma, omega, &axis, &settings)?;
    let mut table = Table::new(vec!["deltaL", "reX", "reX_total"]);
    for ((dl, r), t) in sweep.delta_l_axis.iter().zip(&sweep.re_x).zip(&sweep.re_x_total) {
        table.push(vec![num(*dl), num(*r), num(*t)]);
    }
    Ok(Report {
        table: Some(table),
        json: to_json(&sweep)?,
        failed_gates: 0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Protocol {
    Corridor,
    SuddenDeath,
    Gradient,
}

pub fn rangefind(
    p: &mut Params,
    m: &mut Manifest,
    method: Method,
    protocol: Protocol,
    seed: u64,
) -> Result<Report, CliError> {
    match protocol {
        Protocol::Corridor => {
            let (kappa, sigma, omega) = corridor_point(p)?;
            let deltas = p.list_req("deltas")?;
            let shots = p.usize_or("shots", 10_000)?;
            let scale = match p.str_or("scale", "amplified").as_str() {
                "amplified" => SamplingScale::Amplified {
                    target: p.f64_or("target", 0.1)?,
                },
                "physical" => SamplingScale::Physical,
                other => return Err(CliError::Validation(format!("unknown sampling scale '{other}'"))),
            };
            let eta0 = p.f64_or("eta0", CORRIDOR_ETA0)?;
            let settings = p.settings()?;
            m.quadrature = Some(settings.clone());
            m.method("amplitudes", "quadrature");
            m.method("sampling", "chacha8");
            let l_crit = critical_distance(kappa, sigma, omega)?;
            let ensemble: Vec<DetectorConfig> = deltas
                .iter()
                .map(|dl| DetectorConfig::new(Scenario::AntiParallelAccel, kappa, sigma, omega, l_crit + dl, eta0))
                .collect();
            for cfg in &ensemble {
                cfg.validate_for_amplitudes()?;
            }
            let verdicts = rangefind_corridor(&ensemble, shots, seed, scale, &settings)?;
            let mut table = Table::new(vec![
                "deltaL",
                "L",
                "reX_scaled",
                "estimate_4reX",
                "standard_error",
                "ln_scale",
                "at_critical",
            ]);
            for (dl, v) in deltas.iter().zip(&verdicts) {
                table.push(vec![
                    num(*dl),
                    num(v.separation),
                    num(v.re_x_scaled),
                    num(v.estimate_4re_x),
                    num(v.standard_error),
                    num(v.ln_scale),
                    v.at_critical.to_string(),
                ]);
            }
            Ok(Report {
                table: Some(table),
                json: json!({ "l_crit": l_crit, "deltas": deltas, "verdicts": to_json(&verdicts)? }),
                failed_gates: 0,
            })
        }
        Protocol::SuddenDeath => {
            let kappa = p.f64_or("kappa", 0.001)?;
            let sigma = p.f64_or("sigma", 1.0)?;
            let omega = p.f64_or("omega", 2600.0)?;
            let delta = p.f64_or("delta", 50.0)?;
            let settings = p.settings()?;
            m.quadrature = Some(settings.clone());
            m.method("amplitudes", method_name(method));
            let sd = rangefind_sudden_death(kappa, sigma, omega, delta, assembly_method(method), &settings)?;
            let mut table = Table::new(vec!["above", "below", "ln_N_above", "ln_N_below", "triggered"]);
            table.push(vec![
                sd.above.to_string(),
                sd.below.to_string(),
                num(sd.ln_n_above),
                num(sd.ln_n_below),
                sd.triggered.to_string(),
            ]);
            Ok(Report {
                table: Some(table),
                json: to_json(&sd)?,
                failed_gates: 0,
            })
        }
        Protocol::Gradient => {
            if !p.has("scenario") {
                p.set("scenario", "antiparallel".into());
            }
            let reference = point_config(p)?;
            let ln_measured = p.f64_req("ln_measured")?;
            let settings = p.settings()?;
            m.quadrature = Some(settings.clone());
            m.method("amplitudes", method_name(method));
            let est = rangefind_gradient(&reference, ln_measured, assembly_method(method), &settings)?;
            let mut table = Table::new(vec!["delta_l", "ln_N_ref", "dlnN_dL", "conditioning", "ill_conditioned"]);
            table.push(vec![
                num(est.delta_l),
                num(est.ln_n_ref),
                num(est.dln_n_dl),
                num(est.conditioning),
                est.ill_conditioned.to_string(),
            ]);
            Ok(Report {
                table: Some(table),
                json: to_json(&est)?,
                failed_gates: 0,
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    Assembly,
    Saddle,
    Parallel,
    Response,
    All,
}

/// One tolerance gate.
struct Gate {
    suite: &'static str,
    case: String,
    value: f64,
    reference: f64,
    rel_err: f64,
    tol: f64,
}

impl Gate {
    fn pass(&self) -> bool {
        self.rel_err < self.tol
    }
}

/// Anti-parallel points on both sides of a = 2 where the direct oracle is in range.
pub const ASSEMBLY_POINTS: [(f64, f64, f64); 10] = [
    (1.95, 2.6, 1.3),
    (2.05, 2.6, 1.3),
    (1.6, 2.6, 1.3),
    (1.0, 2.0, 1.0),
    (3.0, 2.6, 1.3),
    (1.99, 2.6, 1.3),
    (0.5, 1.0, 0.5),
    (1.2, 1.25, 0.7),
    (2.5, 2.2, 1.1),
    (3.5, 2.8, 1.4),
];

fn c(z: ExpComplex) -> Complex64 {
    z.to_complex()
}

fn gate(suite: &'static str, case: String, value: Complex64, reference: Complex64, tol: f64) -> Gate {
    Gate {
        suite,
        case,
        value: value.norm(),
        reference: reference.norm(),
        rel_err: (value - reference).norm() / reference.norm(),
        tol,
    }
}

fn assembly_gates(s: &QuadratureSettings) -> Result<Vec<Gate>, CliError> {
    let mut out = Vec::new();
    for &(a, w, g) in &ASSEMBLY_POINTS {
        let cfg = cell_config(Scenario::AntiParallelAccel, a, w, g, 1.0);
        let rf = x_shifted_residue_free(&cfg, s)?;
        let res = residue_contribution(&cfg, s)?;
        let total = res.value + ExpComplex::from(rf.complex());
        let (oracle, _) = x_direct_oracle(&cfg, s)?;
        out.push(gate("assembly", format!("a={a} w={w} g={g}"), c(total), oracle.complex(), 0.05));
    }
    Ok(out)
}

fn saddle_gates(s: &QuadratureSettings) -> Result<Vec<Gate>, CliError> {
    let mut out = Vec::new();
    for scenario in [Scenario::ParallelAccel, Scenario::DeSitterComoving, Scenario::ThermalInertial] {
        for &(a, w, g) in &[(1.0, 1.0, 0.01), (1.0, 1.25, 0.001)] {
            let cfg = cell_config(scenario, a, w, g, 1.0);
            let case = format!("{} a={a} w={w} g={g}", scenario.name());
            let (sa, qa) = (a_saddle(&cfg)?, a_shifted(&cfg, s)?);
            out.push(gate("saddle", format!("{case} A"), sa.complex(), qa.complex(), 0.05));
            let (sx, qx) = (x_saddle(&cfg)?, x_shifted_residue_free(&cfg, s)?);
            out.push(gate("saddle", format!("{case} X"), sx.complex(), qx.complex(), 0.05));
        }
    }
    Ok(out)
}

fn parallel_gates(s: &QuadratureSettings) -> Result<Vec<Gate>, CliError> {
    let cfg = DetectorConfig::new(Scenario::ParallelAccel, 0.1, 0.5, 1.0, 2.0, 0.01);
    let shifted = x_shifted_residue_free(&cfg, s)?;
    let (oracle, _) = x_direct_oracle(&cfg, s)?;
    Ok(vec![gate(
        "parallel",
        "kappa=0.1 sigma=0.5 omega=1 L=2".into(),
        shifted.complex(),
        oracle.complex(),
        0.02,
    )])
}

fn response_gates(s: &QuadratureSettings) -> Result<Vec<Gate>, CliError> {
    let cfg = DetectorConfig::new(Scenario::ParallelAccel, 0.1, 1.0, 0.5, 2.0, 0.01);
    let shifted = a_shifted(&cfg, s)?;
    let (oracle, _) = a_direct_oracle(&cfg, s)?;
    Ok(vec![gate(
        "response",
        "kappa=0.1 sigma=1 omega=0.5".into(),
        shifted.complex(),
        oracle.complex(),
        0.01,
    )])
}

pub fn oracle(p: &mut Params, m: &mut Manifest, suite: Suite) -> Result<Report, CliError> {
    let settings = p.settings()?;
    m.quadrature = Some(settings.clone());
    m.method("reference", "direct_oracle|quadrature");
    let mut gates = Vec::new();
    if matches!(suite, Suite::Assembly | Suite::All) {
        gates.extend(assembly_gates(&settings)?);
    }
    if matches!(suite, Suite::Saddle | Suite::All) {
        gates.extend(saddle_gates(&settings)?);
    }
    if matches!(suite, Suite::Parallel | Suite::All) {
        gates.extend(parallel_gates(&settings)?);
    }
    if matches!(suite, Suite::Response | Suite::All) {
        gates.extend(response_gates(&settings)?);
    }
    let mut table = Table::new(vec!["suite", "case", "value", "reference", "rel_err", "tol", "pass"]);
    let mut rows = Vec::new();
    for g in &gates {
        table.push(vec![
            g.suite.to_string(),
            g.case.clone(),
            num(g.value),
            num(g.reference),
            num(g.rel_err),
            num(g.tol),
            g.pass().to_string(),
        ]);
        rows.push(json!({
            "suite": g.suite, "case": g.case, "value": g.value, "reference": g.reference,
            "rel_err": g.rel_err, "tol": g.tol, "pass": g.pass(),
        }));
    }
    let failed = gates.iter().filter(|g| !g.pass()).count();
    Ok(Report {
        table: Some(table),
        json: json!({ "gates": rows, "failed": failed }),
        failed_gates: failed,
    })
}
