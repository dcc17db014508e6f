//! Error type shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Machine document does not conform to the schema (carries position info).
    #[error("schema error: {0}")]
    Schema(#[from] serde_json::Error),

    #[error("alphabet must contain at least one symbol")]
    EmptyAlphabet,

    #[error("duplicate symbol label {0:?}")]
    DuplicateSymbol(String),

    #[error("machine must contain at least one state")]
    EmptyStates,

    #[error("duplicate state label {0:?}")]
    DuplicateState(String),

    #[error("unknown state {0:?}")]
    UnknownState(String),

    #[error("unknown symbol {0:?}")]
    UnknownSymbol(String),

    #[error("transition probability {prob} for ({from:?}, {symbol:?}) outside (0, 1]")]
    ProbabilityRange {
        from: String,
        symbol: String,
        prob: f64,
    },

    /// Two transitions share the same (state, symbol) pair.
    #[error("unifilarity violation: duplicate transition from {state:?} on {symbol:?}")]
    UnifilarityViolation { state: String, symbol: String },

    #[error("stochasticity violation: outgoing probabilities of {state:?} sum to {sum}")]
    Stochasticity { state: String, sum: f64 },

    #[error("machine is reducible: state digraph is not strongly connected")]
    Reducible,

    #[error("stationary distribution failed to converge (residual {residual:e})")]
    StationaryNonConvergence { residual: f64 },

    #[error("{what} cap exceeded: requested {requested}, limit {limit}")]
    CapExceeded {
        what: &'static str,
        requested: usize,
        limit: usize,
    },

    #[error("word cannot end in state {state:?}")]
    InconsistentEvidence { state: String },

    #[error("pair system is singular (spectral radius {spectral_radius}); machine has identical states")]
    SingularPairSystem { spectral_radius: f64 },

    #[error("invalid state pair ({0}, {1})")]
    InvalidPair(usize, usize),

    #[error("undefined overlap ratio at entry ({row}, {col}): nonzero/zero")]
    UndefinedRatio { row: usize, col: usize },

    #[error("gram matrices have different dimensions ({0} vs {1})")]
    DimensionMismatch(usize, usize),

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("matrix trace {0} is not 1 within tolerance")]
    TraceNotOne(f64),

    #[error("matrix has negative eigenvalue {0:e}")]
    NegativeEigenvalue(f64),

    #[error("parameter {param} out of range: {value} (expected {expected})")]
    OutOfRange {
        param: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("random machine generation gave up after {attempts} attempts")]
    RandomMachineExhausted { attempts: usize },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code associated with this error kind.
    ///
    /// 2 = validation failure, 3 = invariant failure, 4 = resource cap,
    /// 1 = everything else.
    pub fn exit_code(&self) -> i32 {
        use Error::*;
        match self {
            Schema(_) | EmptyAlphabet | DuplicateSymbol(_) | EmptyStates | DuplicateState(_)
            | UnknownState(_) | UnknownSymbol(_) | ProbabilityRange { .. }
            | UnifilarityViolation { .. } | Stochasticity { .. } | Reducible
            | OutOfRange { .. } | InvalidPair(..) | DimensionMismatch(..)
            | InconsistentEvidence { .. } | SingularPairSystem { .. } => 2,
            StationaryNonConvergence { .. }
            | NotSymmetric(_)
            | TraceNotOne(_)
            | NegativeEigenvalue(_)
            | UndefinedRatio { .. }
            | RandomMachineExhausted { .. } => 3,
            CapExceeded { .. } => 4,
            Io(_) => 1,
        }
    }
}
