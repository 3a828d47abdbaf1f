use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: need at least 3 nodes, got {0}")]
    InvalidGrid(usize),

    #[error("field length {found} does not match grid with {expected} nodes")]
    ShapeMismatch { expected: usize, found: usize },

    #[error("field contains a non-finite value at node {0}")]
    NonFinite(usize),

    #[error("invalid norm order {0}: must be >= 1")]
    InvalidOrder(f64),

    #[error("singular tridiagonal system: zero pivot at row {0}")]
    SingularSystem(usize),

    #[error("invalid De Giorgi hypothesis: {0}")]
    InvalidHypothesis(String),

    #[error("invalid interval [{a}, {b}]: need b > a")]
    InvalidInterval { a: f64, b: f64 },

    #[error("point {c} lies outside [{a}, {b}]")]
    InvalidPoint { c: f64, a: f64, b: f64 },

    #[error("field does not vanish at the boundary (u(0) = {left:e}, u(1) = {right:e})")]
    BoundaryNotZero { left: f64, right: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid levels: {0}")]
    InvalidLevels(String),

    #[error("compatibility conditions violated: {}", .0.join(", "))]
    Incompatible(Vec<String>),

    #[error("time step {dt:e} exceeds the convective limit {limit:e} at t = {time}")]
    StepTooLarge { time: f64, dt: f64, limit: f64 },

    #[error("solution diverged at t = {time}")]
    Divergence { time: f64 },

    #[error("kernel iteration did not converge after {iterations} iterations (last update {update:e})")]
    KernelDivergence { iterations: usize, update: f64 },

    #[error("config error{}, key `{key}`: {message}", line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    Config {
        line: Option<usize>,
        key: String,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn config(line: Option<usize>, key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            line,
            key: key.into(),
            message: message.into(),
        }
    }
}
