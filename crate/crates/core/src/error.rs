use thiserror::Error;

pub type Result<T> = std::result::Result<T, DbarError>;

#[derive(Debug, Error)]
pub enum DbarError {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("resolution error: {0}")]
    Resolution(String),

    #[error("unsupported exponent p = {0}")]
    UnsupportedExponent(f64),

    #[error("point outside grid extent: {0}")]
    OutOfDomain(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("Beltrami coefficient bound c0 = {c0} is not contractive (limit {limit})")]
    NonContractive { c0: f64, limit: f64 },

    #[error("iteration did not converge in {iterations} steps (last residual {last})")]
    Divergence {
        iterations: usize,
        last: f64,
        history: Vec<f64>,
    },

    #[error(
        "contraction not admissible: c*M*phi = {product:.4} >= 1/2; try delta <= {suggested_delta}"
    )]
    ContractionViolation { product: f64, suggested_delta: f64 },

    #[error("contour passes through a zero (min |f| = {min_modulus:e}, max |f| = {max_modulus:e})")]
    ContourThroughZero { min_modulus: f64, max_modulus: f64 },

    #[error("winding number {value} is not resolvable to an integer")]
    AmbiguousWinding { value: f64 },

    #[error("slice {index} failed: {source}")]
    Slice {
        index: usize,
        #[source]
        source: Box<DbarError>,
    },

    #[error("slice {index} has total multiplicity {found}, expected {expected}")]
    InconsistentSliceCount {
        index: usize,
        expected: usize,
        found: usize,
    },

    #[error("vanishing order along axis {axis} is indeterminate (slope {slope})")]
    IndeterminateOrder { axis: usize, slope: f64 },

    #[error("degenerate chart: discriminant vanishes identically")]
    DegenerateChart,

    #[error("unsupported chart: {0}")]
    UnsupportedChart(String),

    #[error("function is unbounded near the exceptional set ({0})")]
    BoundednessViolation(String),

    #[error("function is not subharmonic: Laplacian {value:e} at cell {cell}")]
    NotSubharmonic { cell: usize, value: f64 },

    #[error("function is not harmonic off the exceptional set (residual {0:e})")]
    NotHarmonic(f64),

    #[error("almost complex structure out of range: |Q| = {0} >= 1")]
    StructureOutOfRange(f64),

    #[error("format error: {0}")]
    Format(String),

    #[error("unsupported format version {0}")]
    UnsupportedVersion(u32),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
