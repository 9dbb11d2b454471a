use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("shape mismatch: expected {expected} nodes, got {actual}")]
    ShapeMismatch { expected: usize, actual: usize },

    #[error("non-finite value {value} at node {index}")]
    NonFinite { index: usize, value: f64 },

    #[error("boundary node {index} carries {value}, expected 0")]
    BoundaryNotZero { index: usize, value: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{what} did not converge after {iterations} iterations")]
    NotConverged { what: &'static str, iterations: usize },

    #[error("quadrature failed: {0}")]
    Quadrature(String),

    #[error("improper integral diverges (integrand does not decay beyond s = {at})")]
    Divergent { at: f64 },

    #[error("missing structural parameter `{0}` for the selected regime")]
    MissingParameter(&'static str),

    #[error("assumption (z1) violated: Theta is unbounded below, m = -inf")]
    UnboundedTheta,

    #[error("precondition unmet: {0}")]
    Precondition(String),

    #[error("time step collapsed below {dt_min:e} at t = {t}")]
    DtCollapse { t: f64, dt_min: f64 },

    #[error("non-monotone ladder crossing times")]
    NonMonotoneCrossings,

    #[error("scenario error: {0}")]
    Scenario(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl Error {
    /// Stable snake_case name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidGrid(_) => "invalid_grid",
            Error::ShapeMismatch { .. } => "shape_mismatch",
            Error::NonFinite { .. } => "non_finite",
            Error::BoundaryNotZero { .. } => "boundary_not_zero",
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::NotConverged { .. } => "not_converged",
            Error::Quadrature(_) => "quadrature",
            Error::Divergent { .. } => "divergent",
            Error::MissingParameter(_) => "missing_parameter",
            Error::UnboundedTheta => "unbounded_theta",
            Error::Precondition(_) => "precondition",
            Error::DtCollapse { .. } => "dt_collapse",
            Error::NonMonotoneCrossings => "non_monotone_crossings",
            Error::Scenario(_) => "scenario",
            Error::Io(_) => "io",
        }
    }
}
