use thiserror::Error;

/// Failures raised by the physics and numerics layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum HarvestError {
    /// A documented precondition on the inputs does not hold.
    #[error("invalid parameters: {0}")]
    InvalidParameter(String),

    /// κ = 0 reached an operation that needs the accelerated closed forms.
    #[error("acceleration is zero: {0}; use the inertial closed forms")]
    ZeroAcceleration(&'static str),

    /// A kernel was evaluated on (or numerically at) one of its poles.
    #[error("singular evaluation of {kernel}: |denominator| = {magnitude:e}")]
    SingularEvaluation { kernel: &'static str, magnitude: f64 },

    /// Adaptive quadrature ran out of subdivisions before reaching tolerance.
    #[error("quadrature did not converge: estimate {estimate:e} with error {error:e} after {subdivisions} subdivisions")]
    NonConvergence {
        estimate: f64,
        error: f64,
        subdivisions: usize,
    },

    /// The ε-ladder extrapolation of a direct oracle is not trustworthy.
    #[error("oracle unreliable: {0}")]
    OracleUnreliable(String),

    /// The anti-parallel saddle form diverges at the critical distance.
    #[error("resonance divergence: |Lκ + 2(cos w - 1)| = {0:e}")]
    ResonanceDivergence(f64),

    /// A closed form is outside the window where it is defined.
    #[error("outside validity: {0}")]
    OutOfValidity(String),

    /// The scenario has no closed-form result for the requested quantity.
    #[error("no closed form for {0}")]
    UnsupportedClosedForm(&'static str),

    /// Residue pole bookkeeping hit a double point.
    #[error("degenerate pole: cosh θ+ = cosh θ- ({0:e})")]
    DegeneratePole(f64),

    /// Newton iteration for the residue saddle failed.
    #[error("saddle search did not converge after {iterations} iterations (|E'| = {residual:e})")]
    SaddleNotFound { iterations: usize, residual: f64 },

    /// A two-detector state violates its invariants.
    #[error("invalid state: {0}")]
    InvalidState(String),

    /// Scaled amplitudes cannot be converted to raw probabilities safely.
    #[error("raw conversion refused: {0}")]
    Underflow(String),

    /// A rangefinding protocol was asked to run outside its regime.
    #[error("precondition failed: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, HarvestError>;
