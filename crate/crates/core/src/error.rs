use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty sequence")]
    EmptySequence,

    #[error("symbol index {symbol} outside alphabet of size {size}")]
    SymbolOutOfAlphabet { symbol: usize, size: usize },

    #[error("symbol '{0}' is not in the alphabet")]
    UnknownSymbol(char),

    #[error("sequence lengths differ: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("probabilities sum to {0}, not 1")]
    NotNormalized(f64),

    #[error("invalid probability entry {0}")]
    InvalidMass(f64),

    #[error("eps out of range: {0}")]
    EpsOutOfRange(f64),

    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("rate threshold is not positive for eps = {eps} (requires eps < {critical})")]
    ThresholdNotPositive { eps: f64, critical: f64 },

    #[error("empty range [{0}, {1}]")]
    EmptyRange(f64, f64),

    #[error("codewords have different types")]
    TypeMismatch,

    #[error("codewords are bitwise complements; no single-symbol modification exists (needs M >= 3 to find a non-complement partner)")]
    ComplementPair,

    #[error("codewords are identical")]
    IdenticalCodewords,

    #[error("no modified sequence present in this pair")]
    MissingYTilde,

    #[error("exhaustive enumeration needs {outputs} outputs but the budget is {budget}; use Monte Carlo")]
    BudgetExceeded { outputs: u128, budget: u64 },

    #[error("metric vanishes on every codeword for a reachable output; stochastic decoder undefined")]
    MetricVanishes,

    #[error("non-finite intermediate value in {0}")]
    NonFinite(&'static str),

    #[error("codebook is empty")]
    EmptyCodebook,

    #[error("no feasible grid point")]
    Infeasible,

    #[error("joint distribution does not have uniform product pair marginal")]
    MarginalConstraint,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
