use thiserror::Error;

/// Errors produced by space construction, symbol manipulation and the state
/// factories.
#[derive(Debug, Error)]
pub enum FockError {
    #[error("eps must be strictly positive, got {0}")]
    NonPositiveEps(f64),
    #[error("one-particle dimension must be >= 1, got {0}")]
    BadDimension(usize),
    #[error("basis size {required} exceeds the cap {cap} (about {bytes_mb:.0} MB of dense operator storage would be required)")]
    CapacityExceeded {
        required: usize,
        cap: usize,
        bytes_mb: f64,
    },
    #[error("mode index {index} out of range for d = {d}")]
    BadModeIndex { index: usize, d: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("symbol degree ({p}, {q}) exceeds the truncation level n_max = {n_max}")]
    DegreeExceedsTruncation { p: usize, q: usize, n_max: usize },
    #[error("contraction order k = {k} exceeds min(p1, q2) = {max}")]
    ContractionOrder { k: usize, max: usize },
    #[error("kernel is not Hermitian (deviation {0:.3e})")]
    NonHermitianKernel(f64),
    #[error("truncation tail weight {deficit:.3e} exceeds the budget {budget:.3e}; n_max >= {required} is needed")]
    TailBudget {
        deficit: f64,
        budget: f64,
        required: usize,
    },
    #[error("state normalization vanished: {0}")]
    ZeroNormalization(&'static str),
    #[error("eps mismatch: space has eps = {space_eps}, state family requires eps = {required}")]
    EpsMismatch { space_eps: f64, required: f64 },
    #[error("{0}")]
    Invalid(String),
    #[error("unsupported measure operation: {0}")]
    UnsupportedMeasure(String),
}

pub type Result<T> = std::result::Result<T, FockError>;
