use thiserror::Error;

/// Which sub-condition of the divisor characterization failed.
#[derive(Debug, Clone, PartialEq)]
pub enum DivisorDefect {
    /// `coeff(n)` (or its adjoint) is not a partial isometry.
    NotPartialIsometry { n: usize, adjoint: bool },
    /// The subspaces `ran coeff(n)*` do not decompose E orthogonally.
    SubspaceDecomposition,
    /// The subspaces `ran coeff(n)` do not decompose E orthogonally.
    RangeDecomposition,
    /// The assembled block-diagonal constant is not unitary.
    ConstantNotUnitary,
    /// The reconstructed product disagrees with the input on the grid.
    GridMismatch { residual: f64 },
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("non-finite entry in matrix input")]
    NonFiniteEntry,

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("evaluation point lies outside the closed unit disk (|z| = {modulus})")]
    OutsideDisk { modulus: f64 },

    #[error("coefficient certification failed: residual {residual} exceeds tolerance {tol}")]
    CertificationFailure { residual: f64, tol: f64 },

    #[error("function is not analytic: max negative-frequency bin norm {residual}")]
    NotAnalytic { residual: f64 },

    #[error("not a divisor: {0:?}")]
    NotADivisor(DivisorDefect),

    #[error("polynomial division residual {residual} exceeds tolerance {tol}")]
    DivisionResidual { residual: f64, tol: f64 },

    #[error("function failed the two-sided inner certification: residual {residual}")]
    NotInner { residual: f64 },

    #[error("no finite Blaschke product within the multiplicity budget certifies the function as rational")]
    NotRational,

    #[error("subspace is not shift-invariant within the truncation: residual {residual}")]
    NotShiftInvariant { residual: f64 },

    #[error("truncation too small: dimension changed from {dim_k} to {dim_k2} under K -> K+2")]
    TruncationTooSmall { dim_k: usize, dim_k2: usize },

    #[error("left g.c.d. is a constant unitary; inputs are coprime")]
    TrivialGcd,

    #[error("coprime check failed at alpha = {alpha_re}+{alpha_im}i with common defect dimension {defect}")]
    CoprimeCheckFailed {
        alpha_re: f64,
        alpha_im: f64,
        defect: usize,
    },

    #[error("factorization residual {residual} exceeds tolerance {tol} at step {step}")]
    ResidualFailure {
        step: usize,
        residual: f64,
        tol: f64,
    },

    #[error("symbolic verdict depends on an index that escaped the window: {index}")]
    EscapedWitness { index: i64 },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
