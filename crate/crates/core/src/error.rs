use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("grid mismatch: fields live on different grids")]
    GridMismatch,
    #[error("domain mismatch: source radius {source_radius} vs target radius {target_radius}")]
    DomainMismatch { source_radius: f64, target_radius: f64 },
    #[error("unsupported Lebesgue exponent s = {0} (expected 1 <= s <= 6)")]
    UnsupportedExponent(f64),
    #[error("invalid dilation scale {0} (must be > 0)")]
    InvalidScale(f64),
    #[error("non-finite value at node {0}")]
    NonFinite(usize),
    #[error("brute-force oracle limited to N <= {limit}, got {intervals}")]
    OracleSize { intervals: usize, limit: usize },
    #[error("problem specification: {0}")]
    Spec(String),
    #[error("unsupported combination: {0}")]
    UnsupportedCombination(String),
    #[error("fiber projection of the zero field")]
    ZeroField,
    #[error("Nehari fiber is not unique for exponent {0} <= 3; use the dilation fiber")]
    NonUniqueFiber(f64),
    #[error("root bracketing failed: {0}")]
    Bracket(String),
    #[error("cutoff radius {r_cut} needs 2*r_cut <= grid radius {radius}")]
    CutoffTooLarge { r_cut: f64, radius: f64 },
    #[error("insufficient range: {0}")]
    InsufficientRange(String),
    #[error("solver stagnated after {iterations} iterations (energy {energy}, gradient {gradient})")]
    Stagnation {
        iterations: usize,
        energy: f64,
        gradient: f64,
    },
    #[error("critical-pure mode requires explicit opt-in")]
    CriticalPureNotEnabled,
    #[error("configuration error: {0}")]
    Config(String),
    #[error("malformed JSON at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Validation(Vec<String>),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}
