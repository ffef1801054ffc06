use thiserror::Error;

/// Errors shared by all modules of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("dimension {0} exceeds the cap of {1}")]
    DimensionCap(usize, usize),

    #[error("matrix is not Hermitian: asymmetry {residual:.3e} exceeds tolerance {tol:.1e}")]
    NotHermitian { residual: f64, tol: f64 },

    #[error("matrix is not positive semidefinite: min eigenvalue {min_eig:.3e}")]
    NotPsd { min_eig: f64 },

    #[error("trace is {trace:.12} instead of 1 (tolerance {tol:.1e})")]
    BadTrace { trace: f64, tol: f64 },

    #[error("vector norm is {norm:.12} instead of 1 (tolerance {tol:.1e})")]
    BadNorm { norm: f64, tol: f64 },

    #[error("declared factor dimensions {factors:?} do not multiply to {dim}")]
    BadFactors { factors: Vec<usize>, dim: usize },

    #[error("factor index {index} out of range for {count} declared factors")]
    FactorIndexOutOfRange { index: usize, count: usize },

    #[error("a bipartite A|B factor split is required but {0} factors are declared")]
    BipartitionMissing(usize),

    #[error("a quadripartite factor split is required but {0} factors are declared")]
    QuadripartitionMissing(usize),

    #[error("parameter {name} = {value} outside valid range {range}")]
    BadParameter {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("unknown channel kind: {0}")]
    UnknownChannelKind(String),

    #[error("channel is not a valid CPT map: {0}")]
    InvalidChannel(String),

    #[error("channel output is singular (min eigenvalue {min_eig:.3e}); regularize by mixing with the maximally mixed state")]
    SingularOutput { min_eig: f64 },

    #[error(
        "rank cutoff ambiguous: eigenvalue {eig:.3e} within a factor 10 of cutoff {cutoff:.3e}"
    )]
    RankAmbiguous { eig: f64, cutoff: f64 },

    #[error("linear program unbounded: constraint states do not span the input space")]
    LpUnbounded,

    #[error("linear system is rank deficient: sample states do not span")]
    RankDeficient,

    #[error("ensemble member {index} is not a product state across the declared split (residual {residual:.3e})")]
    NonProductMember { index: usize, residual: f64 },

    #[error(
        "ensemble average does not match the constraint after projection (residual {residual:.3e})"
    )]
    InfeasibleConstraint { residual: f64 },

    #[error("operation requires a qubit input space, got dimension {0}")]
    NonQubitInput(usize),

    #[error("probabilities must be nonnegative and sum to 1 (sum = {0})")]
    BadProbabilities(f64),

    #[error("ensemble is empty or member dimensions disagree")]
    BadEnsemble,

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
