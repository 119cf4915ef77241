use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("model document could not be parsed: {0}")]
    Parse(String),

    #[error("{which} is not Hermitian: max |A - A^dagger| = {residual:e} exceeds {tolerance:e}")]
    NotHermitian {
        which: &'static str,
        residual: f64,
        tolerance: f64,
    },

    #[error("dimension mismatch in {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("matrix {what} must be square and non-empty, got {rows}x{cols}")]
    NotSquare {
        what: &'static str,
        rows: usize,
        cols: usize,
    },

    #[error("temperature must be positive and finite, got {0}")]
    NonPositiveTemperature(f64),

    #[error("coupling strength must be non-negative and finite, got {0}")]
    InvalidCouplingStrength(f64),

    #[error("malformed spectral function: {0}")]
    MalformedSpectrum(String),

    #[error("spectral table queried at |omega| = {omega} outside sampled range [{min}, {max}]")]
    OutOfTableRange { omega: f64, min: f64, max: f64 },

    #[error(
        "degenerate spectrum: levels {lower} and {upper} (1-based, sorted) are separated by {gap:e}, \
         not more than the degeneracy tolerance {tolerance:e}"
    )]
    DegenerateSpectrum {
        lower: usize,
        upper: usize,
        gap: f64,
        tolerance: f64,
    },

    #[error("eigenvector matrix deviates from unitarity by {residual:e} (tolerance {tolerance:e})")]
    NotUnitary { residual: f64, tolerance: f64 },

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("brute-force enumeration limited to N <= {max}, got N = {n}")]
    EnumerationTooLarge { n: usize, max: usize },

    #[error("invalid probability distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),

    #[error("invalid rate matrix: {0}")]
    InvalidRates(String),

    #[error("invalid time grid: {0}")]
    InvalidTimeGrid(String),

    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepSizeUnderflow { t: f64, h: f64 },

    #[error("integrator exceeded {0} steps")]
    TooManySteps(usize),

    #[error("block {block} has a stationary kernel of dimension {dimension}, expected 1")]
    KernelDimension { block: usize, dimension: usize },

    #[error("{name} is not a constant of motion for this model (residual {residual:e})")]
    NotAConstantOfMotion { name: String, residual: f64 },

    #[error("mixing angle undefined: Rabi constant and detuning are both zero (degenerate pair)")]
    UndefinedMixingAngle,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
