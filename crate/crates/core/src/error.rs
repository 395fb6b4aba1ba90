use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("cannot parse polynomial `{text}`: {reason}")]
    Parse { text: String, reason: String },

    #[error("the zero polynomial is not admissible")]
    ZeroPolynomial,

    #[error("polynomial must have degree at least 1")]
    ConstantPolynomial,

    #[error("constant coefficient a0 is zero; divide out the factor X first")]
    ZeroConstantTerm,

    #[error("{what} = {value} exceeds the configured limit {limit}")]
    ResourceLimit {
        what: &'static str,
        value: u64,
        limit: u64,
    },

    #[error("polynomial has a repeated root (gcd(P, P') is non-trivial)")]
    NotSquarefree,

    #[error("root iteration did not converge; max residual radius {max_radius}")]
    NonConvergence { max_radius: String },

    #[error("root {index} lies within its certified error of the unit circle; raise the precision")]
    AmbiguousUnitRoot { index: usize },

    #[error("unsupported input: {0}")]
    Unsupported(String),

    #[error("residue routes disagree at n = {n} (difference {difference})")]
    InconsistentOverlap { n: i64, difference: String },

    #[error("jet division by a near-zero leading term at root {index}; raise the precision")]
    DegenerateJet { index: usize },

    #[error("insufficient window: {0}")]
    InsufficientWindow(String),

    #[error("x_{n} cannot be separated from a half-integer at the maximal precision")]
    HalfIntegerAmbiguity { n: i64 },

    #[error("operation requires a monic polynomial")]
    NotMonic,

    #[error("operation requires an expansive polynomial (all roots outside the unit circle)")]
    NotExpansive,

    #[error("invalid element of Xi_k: {0}")]
    InvalidXi(String),

    #[error("invalid symbol sequence: {0}")]
    InvalidSequence(String),

    #[error("hypothesis not satisfied: {0}")]
    Hypothesis(String),

    #[error("undecided at current precision: {0}")]
    Undecided(String),

    #[error("tail data insufficient: {0}")]
    InsufficientTail(String),

    #[error("precision escalation exhausted: {0}")]
    PrecisionExhausted(String),
}
