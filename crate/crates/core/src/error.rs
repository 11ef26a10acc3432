use thiserror::Error;

pub type Result<T, E = LakeError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum LakeError {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("resolution {got} along {axis} is below the minimum of {min}")]
    Resolution { axis: &'static str, got: usize, min: usize },

    #[error("point ({x}, {y}) lies outside the domain")]
    OutsideDomain { x: f64, y: f64 },

    #[error("bathymetry is not positive: depth {depth} at ({x}, {y})")]
    NonPositiveDepth { depth: f64, x: f64, y: f64 },

    #[error("linear solver failed to converge after {iterations} iterations (relative residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("direct factorization failed: {0}")]
    Factorization(String),

    #[error("island matrix is singular or indefinite")]
    SingularIslandMatrix,

    #[error("source point ({x}, {y}) is within {cells} cells of the boundary")]
    SourceNearBoundary { x: f64, y: f64, cells: f64 },

    #[error("kernel singularity: the two points coincide")]
    Singular,

    #[error("{0} has length {1}, expected {2}")]
    LengthMismatch(&'static str, usize, usize),

    #[error("island index {index} out of range (domain has {count} islands)")]
    IslandIndex { index: usize, count: usize },

    #[error("time step {dt:.3e} violates the CFL limit; use dt <= {required:.3e}")]
    Cfl { dt: f64, required: f64 },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("{quantity} must be nonzero/positive: got {value}")]
    Degenerate { quantity: &'static str, value: f64 },

    #[error("blob is under-resolved: {cells:.1} cells across its support (minimum {min})")]
    UnderResolved { cells: f64, min: f64 },

    #[error("trajectory left the domain at s = {s}")]
    TrajectoryExit { s: f64 },

    #[error("records cover s in [{rec_lo}, {rec_hi}] but the limit covers [{lim_lo}, {lim_hi}]")]
    SpanMismatch { rec_lo: f64, rec_hi: f64, lim_lo: f64, lim_hi: f64 },

    #[error("invalid scenario field `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("could not parse scenario: {0}")]
    Parse(String),

    #[error("refusing to overwrite {0} (pass --force)")]
    Exists(std::path::PathBuf),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: std::path::PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed records file: {0}")]
    Records(String),

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<LakeError>,
    },
}

impl LakeError {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        LakeError::Config { field: field.into(), message: message.into() }
    }

    pub fn context(self, context: impl Into<String>) -> Self {
        LakeError::Context { context: context.into(), source: Box::new(self) }
    }
}
