//! The second-order two-detector state, its negativity and the Pauli
//! correlator measurements used for rangefinding.
//!
//! In the product basis {|ee⟩, |eg⟩, |ge⟩, |gg⟩} the state is
//!
//! ```text
//!     ⎛ C   0   0   −X* ⎞
//! ρ = ⎜ 0   A   B*   0  ⎟
//!     ⎜ 0   B   A    0  ⎟
//!     ⎝ −X  0   0  1−2A−C⎠
//! ```

use nalgebra::{Matrix2, Matrix4, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::detector::{DetectorConfig, Scenario};
use crate::error::{HarvestError, Result};
use crate::expnum::ExpComplex;
use crate::quadrature::{a_shifted, x_shifted_residue_free, Method, QuadratureSettings, ScaledAmplitude};
use crate::residues::{residue_evaluation, ResidueEvaluation};
use crate::saddle::{a_saddle, x_saddle};

/// Largest σΩ for which scaled → raw conversion is attempted without `force`;
/// beyond it e^{−(σΩ)²} underflows.
pub const MAX_RAW_SIGMA_OMEGA: f64 = 30.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StateScale {
    Raw,
    Scaled,
}

/// Second-order detector state. X is exponent-carrying because the scaled
/// anti-parallel coherence can leave the f64 range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoDetectorState {
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "B")]
    pub b: Complex64,
    #[serde(rename = "C")]
    pub c: f64,
    #[serde(rename = "X")]
    pub x: ExpComplex,
    pub scale: StateScale,
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

impl TwoDetectorState {
    pub fn new(a: f64, b: Complex64, c: f64, x: Complex64, scale: StateScale) -> Self {
        TwoDetectorState {
            a,
            b,
            c,
            x: ExpComplex::from_complex(x),
            scale,
        }
    }

    /// B = C = 0, which is all the second-order state needs.
    pub fn from_amplitudes(a: f64, x: ExpComplex, scale: StateScale) -> Self {
        TwoDetectorState {
            a,
            b: c(0.0, 0.0),
            c: 0.0,
            x,
            scale,
        }
    }

    /// C(1 − 2A − C) ≥ |B|².
    pub fn corner_psd(&self) -> bool {
        self.c * (1.0 - 2.0 * self.a - self.c) >= self.b.norm_sqr()
    }

    /// Probability invariants of a raw state.
    pub fn validate(&self) -> Result<()> {
        if !(self.a >= 0.0) || !(self.c >= 0.0) || !self.b.is_finite() || !self.x.is_finite() {
            return Err(HarvestError::InvalidState(format!(
                "A and C must be ≥ 0 and all entries finite (A={}, C={})",
                self.a, self.c
            )));
        }
        if self.scale == StateScale::Raw {
            let g = 1.0 - 2.0 * self.a - self.c;
            if !(0.0..=1.0).contains(&g) {
                return Err(HarvestError::InvalidState(format!(
                    "1 − 2A − C = {g} lies outside [0, 1]"
                )));
            }
        }
        Ok(())
    }

    /// The explicit 4×4 density matrix.
    pub fn matrix(&self) -> Result<Matrix4<Complex64>> {
        let x = self.x.to_complex();
        if !x.is_finite() {
            return Err(HarvestError::InvalidState(
                "X exceeds the f64 range; the matrix exists only symbolically".into(),
            ));
        }
        let z = c(0.0, 0.0);
        let a = c(self.a, 0.0);
        Ok(Matrix4::new(
            c(self.c, 0.0), z, z, -x.conj(),
            z, a, self.b.conj(), z,
            z, self.b, a, z,
            -x, z, z, c(1.0 - 2.0 * self.a - self.c, 0.0),
        ))
    }

    /// Scaled → raw: multiply every entry by η₀² e^{−(σΩ)²}.
    pub fn to_raw(&self, eta0: f64, sigma_omega: f64, force: bool) -> Result<Self> {
        match self.scale {
            StateScale::Raw => Ok(*self),
            StateScale::Scaled => {
                if sigma_omega > MAX_RAW_SIGMA_OMEGA && !force {
                    return Err(HarvestError::Underflow(format!(
                        "σΩ = {sigma_omega} > {MAX_RAW_SIGMA_OMEGA}: raw amplitudes underflow"
                    )));
                }
                let ln_f = 2.0 * eta0.ln() - sigma_omega * sigma_omega;
                let f = ln_f.exp();
                Ok(TwoDetectorState {
                    a: self.a * f,
                    b: self.b * f,
                    c: self.c * f,
                    x: ExpComplex::new(self.x.mant, self.x.ln_scale + ln_f),
                    scale: StateScale::Raw,
                })
            }
        }
    }

    /// Raw → scaled: divide every entry by η₀² e^{−(σΩ)²}.
    pub fn to_scaled(&self, eta0: f64, sigma_omega: f64) -> Self {
        match self.scale {
            StateScale::Scaled => *self,
            StateScale::Raw => {
                let ln_f = sigma_omega * sigma_omega - 2.0 * eta0.ln();
                let f = ln_f.exp();
                TwoDetectorState {
                    a: self.a * f,
                    b: self.b * f,
                    c: self.c * f,
                    x: ExpComplex::new(self.x.mant, self.x.ln_scale + ln_f),
                    scale: StateScale::Scaled,
                }
            }
        }
    }
}

/// |X| > A, decided in log space.
pub fn is_entangled(state: &TwoDetectorState) -> bool {
    state.x.ln_abs() > state.a.ln()
}

/// ln max{|X| − A, 0}; −∞ when not entangled.
pub fn ln_negativity(state: &TwoDetectorState) -> f64 {
    let lx = state.x.ln_abs();
    let la = state.a.ln();
    if !(lx > la) {
        return f64::NEG_INFINITY;
    }
    lx + (-(la - lx).exp()).ln_1p()
}

/// max{|X| − A, 0} in the state's scale; +∞ when it exceeds f64.
pub fn negativity(state: &TwoDetectorState) -> f64 {
    ln_negativity(state).exp()
}

/// Eigenvalues of the partial transpose over the second detector, ascending.
pub fn pt_eigenvalues(state: &TwoDetectorState) -> Result<[f64; 4]> {
    let m = state.matrix()?;
    // (ρ^{T_B})_{(ij),(kl)} = ρ_{(il),(kj)}
    let pt = Matrix4::from_fn(|r, s| {
        let (i, j) = (r / 2, r % 2);
        let (k, l) = (s / 2, s % 2);
        m[(2 * i + l, 2 * k + j)]
    });
    let eig = SymmetricEigen::new(pt);
    let mut ev = [0.0; 4];
    for (slot, v) in ev.iter_mut().zip(eig.eigenvalues.iter()) {
        *slot = *v;
    }
    ev.sort_by(|p, q| p.total_cmp(q));
    Ok(ev)
}

/// Sum of |negative eigenvalues| of ρ^{T_B}, from a direct 4×4 solve.
pub fn pt_oracle(state: &TwoDetectorState) -> Result<f64> {
    state.validate()?;
    Ok(pt_eigenvalues(state)?.iter().filter(|v| **v < 0.0).map(|v| -v).sum())
}

/// (⟨σx⊗σx⟩, ⟨σy⊗σy⟩) = (−2Re X + 2Re B, 2Re X + 2Re B).
pub fn correlators(state: &TwoDetectorState) -> (f64, f64) {
    let rx = state.x.re().to_complex().re;
    let rb = state.b.re;
    (-2.0 * rx + 2.0 * rb, 2.0 * rx + 2.0 * rb)
}

fn pauli(basis: Basis) -> Matrix2<Complex64> {
    match basis {
        Basis::XX => Matrix2::new(c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)),
        Basis::YY => Matrix2::new(c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)),
    }
}

/// Tr(ρ·O) for an operator on the two-detector space.
pub fn expectation(state: &TwoDetectorState, op: &Matrix4<Complex64>) -> Result<Complex64> {
    Ok((state.matrix()? * op).trace())
}

/// Correlators by explicit trace against σ⊗σ.
pub fn correlators_by_trace(state: &TwoDetectorState) -> Result<(f64, f64)> {
    let xx = pauli(Basis::XX).kronecker(&pauli(Basis::XX));
    let yy = pauli(Basis::YY).kronecker(&pauli(Basis::YY));
    let xx = Matrix4::from_fn(|r, s| xx[(r, s)]);
    let yy = Matrix4::from_fn(|r, s| yy[(r, s)]);
    Ok((expectation(state, &xx)?.re, expectation(state, &yy)?.re))
}

/// Local measurement setting shared by both detectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Basis {
    XX,
    YY,
}

/// Shot-level outcomes of a joint measurement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementRecord {
    pub basis: Basis,
    pub outcomes: Vec<(i8, i8)>,
    pub seed: u64,
}

impl MeasurementRecord {
    /// Empirical ⟨σ⊗σ⟩.
    pub fn correlator(&self) -> f64 {
        if self.outcomes.is_empty() {
            return 0.0;
        }
        let s: i64 = self.outcomes.iter().map(|(p, q)| (*p as i64) * (*q as i64)).sum();
        s as f64 / self.outcomes.len() as f64
    }

    /// Standard error of [`Self::correlator`].
    pub fn standard_error(&self) -> f64 {
        let n = self.outcomes.len() as f64;
        if n < 2.0 {
            return f64::INFINITY;
        }
        let m = self.correlator();
        ((1.0 - m * m).max(0.0) / (n - 1.0)).sqrt()
    }
}

/// Born probabilities of the four outcome pairs (+,+), (+,−), (−,+), (−,−).
pub fn outcome_probabilities(state: &TwoDetectorState, basis: Basis) -> Result<[f64; 4]> {
    if state.scale != StateScale::Raw {
        return Err(HarvestError::Precondition(
            "sampling needs a raw-scale state; convert with to_raw first".into(),
        ));
    }
    state.validate()?;
    let p = pauli(basis);
    let id = Matrix2::<Complex64>::identity();
    let proj = |s: f64| (id + p * c(s, 0.0)) * c(0.5, 0.0);
    let mut out = [0.0; 4];
    for (k, (s1, s2)) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)].iter().enumerate() {
        let op = proj(*s1).kronecker(&proj(*s2));
        let op = Matrix4::from_fn(|r, s| op[(r, s)]);
        out[k] = expectation(state, &op)?.re;
    }
    if out.iter().any(|p| *p < -1e-12) || out.iter().all(|p| *p <= 0.0) {
        return Err(HarvestError::InvalidState(format!(
            "degenerate outcome probabilities {out:?}"
        )));
    }
    for p in out.iter_mut() {
        *p = p.max(0.0);
    }
    Ok(out)
}

/// Draw `n_shots` i.i.d. outcome pairs with a seeded ChaCha stream.
pub fn sample_measurements(
    state: &TwoDetectorState,
    basis: Basis,
    n_shots: usize,
    seed: u64,
) -> Result<MeasurementRecord> {
    let probs = outcome_probabilities(state, basis)?;
    let total: f64 = probs.iter().sum();
    let mut cdf = [0.0; 4];
    let mut acc = 0.0;
    for (k, p) in probs.iter().enumerate() {
        acc += p / total;
        cdf[k] = acc;
    }
    let pairs = [(1i8, 1i8), (1, -1), (-1, 1), (-1, -1)];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let outcomes = (0..n_shots)
        .map(|_| {
            let u: f64 = rng.gen();
            let k = cdf.iter().position(|c| u < *c).unwrap_or(3);
            pairs[k]
        })
        .collect();
    Ok(MeasurementRecord {
        basis,
        outcomes,
        seed,
    })
}

/// Saddle closed forms or contour quadrature for the residue-free parts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AssemblyMethod {
    Saddle,
    Quadrature,
}

/// Assembled state plus the amplitudes it came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assembly {
    pub state: TwoDetectorState,
    pub a: ScaledAmplitude,
    /// Total X̃ with the residue-free and residue parts.
    pub x: ScaledAmplitude,
    pub residue: Option<ResidueEvaluation>,
    pub method: AssemblyMethod,
}

impl Assembly {
    pub fn negativity(&self) -> f64 {
        negativity(&self.state)
    }

    pub fn ln_negativity(&self) -> f64 {
        ln_negativity(&self.state)
    }

    pub fn entangled(&self) -> bool {
        is_entangled(&self.state)
    }
}

/// Scaled two-detector state for a configuration. Anti-parallel residues are
/// always included, whichever method computes the residue-free parts.
pub fn assemble(cfg: &DetectorConfig, method: AssemblyMethod, settings: &QuadratureSettings) -> Result<Assembly> {
    cfg.validate_for_amplitudes()?;
    let (a, rf) = match method {
        AssemblyMethod::Saddle => (a_saddle(cfg)?, x_saddle(cfg)?),
        AssemblyMethod::Quadrature => (a_shifted(cfg, settings)?, x_shifted_residue_free(cfg, settings)?),
    };
    let residue = if cfg.scenario == Scenario::AntiParallelAccel {
        Some(residue_evaluation(cfg, settings)?)
    } else {
        None
    };
    let res_value = residue
        .as_ref()
        .map(|r| r.amplitude.residue())
        .unwrap_or(ExpComplex::ZERO);
    let res_err = residue.as_ref().map(|r| r.amplitude.error).unwrap_or(0.0);
    let x_method = match method {
        AssemblyMethod::Saddle => Method::Saddle,
        AssemblyMethod::Quadrature => Method::Quadrature,
    };
    let x = ScaledAmplitude::with_parts(rf.complex(), res_value, rf.error + res_err, x_method);
    let state = TwoDetectorState::from_amplitudes(a.complex().re, x.value, StateScale::Scaled);
    Ok(Assembly {
        state,
        a,
        x,
        residue,
        method,
    })
}
