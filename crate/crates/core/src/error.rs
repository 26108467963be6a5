use thiserror::Error;

pub type Result<T> = std::result::Result<T, LatticeError>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum LatticeError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("invalid state space: {0}")]
    StateSpace(String),

    #[error("limited liability violated: entry {index} is negative")]
    LimitedLiability { index: usize },

    #[error("not a weak unit: entry {index} is not strictly positive")]
    NotWeakUnit { index: usize },

    /// The claim is not measurable with respect to the algebra generated by the
    /// underlying. Carries the best approximation by measurable claims.
    #[error("claim is not spanned by options: residual {residual:.3e}, states {block:?} are not separated by the underlying")]
    SpanningFailure {
        residual: f64,
        block: Vec<usize>,
        best_approximation: Vec<f64>,
    },

    #[error("not measurable: {0}")]
    NotMeasurable(String),

    #[error("not a sublattice: {0}")]
    NotASublattice(String),

    #[error("not an ideal: {0}")]
    NotAnIdeal(String),

    #[error("no approximation: {0}")]
    NoApproximation(String),

    #[error("did not stabilize within {cap} iterations")]
    NonConvergence { cap: usize },

    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("contract violated: {0}")]
    Contract(String),

    #[error("negative input; split into positive and negative parts first")]
    DecomposeFirst,

    #[error("sequence is not order bounded: {0}")]
    Unbounded(String),
}
