use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("node index {index} out of range for {n} nodes")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("self-pair ({0}, {0}) is not an edge")]
    SelfPair(usize),
    #[error("duplicate pair ({0}, {1})")]
    DuplicatePair(usize, usize),
    #[error("missing edge features for pair ({0}, {1})")]
    MissingPair(usize, usize),
    #[error("ground-truth labels are required")]
    MissingLabels,
    #[error("degenerate labeling: {0}")]
    DegenerateLabels(&'static str),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("bandwidth is undefined for a single training point; supply bandwidths explicitly")]
    SingleTrainingPoint,
    #[error("n = {n} exceeds the exhaustive-search limit of {limit}")]
    TooLarge { n: usize, limit: usize },
    #[error("LP solver did not converge within {0} iterations")]
    NotConverged(usize),
    #[error("LP solver failed: {0}")]
    Solver(&'static str),
}
