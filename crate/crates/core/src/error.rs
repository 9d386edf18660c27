use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("instance too large for {what}: n = {n}, limit = {limit}")]
    TooLarge {
        what: &'static str,
        n: usize,
        limit: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("linear program is infeasible")]
    Infeasible,

    #[error("simplex did not converge within {0} pivots")]
    IterationLimit(usize),

    #[error("degenerate layout: atoms {0} and {1} coincide")]
    DegenerateLayout(usize, usize),

    #[error("device constraints cannot be met: {0}")]
    DeviceConstraint(String),

    #[error("register has {atoms} atoms but {needed} are required")]
    NotEnoughAtoms { atoms: usize, needed: usize },

    #[error("integration failure at t = {time:.6} us: norm drift {drift:.3e}")]
    IntegrationFailure { time: f64, drift: f64 },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable snake_case name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidGraph(_) => "invalid_graph",
            Error::TooLarge { .. } => "too_large",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::Infeasible => "infeasible",
            Error::IterationLimit(_) => "iteration_limit",
            Error::DegenerateLayout(..) => "degenerate_layout",
            Error::DeviceConstraint(_) => "device_constraint",
            Error::NotEnoughAtoms { .. } => "not_enough_atoms",
            Error::IntegrationFailure { .. } => "integration_failure",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }
}
