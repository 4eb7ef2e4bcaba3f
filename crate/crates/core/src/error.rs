use thiserror::Error;

/// Errors raised across the library. Variants are grouped by the stage that
/// produces them so callers can report which part of the pipeline failed.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("schema error: {0}")]
    Schema(String),

    #[error("line {line}: {message}")]
    Row { line: u64, message: String },

    #[error("alignment error: {0}")]
    Alignment(String),

    #[error("empty series")]
    EmptySeries,

    #[error("invalid time-of-day window: {0}")]
    Window(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("ill-conditioned system: {0}")]
    Conditioning(String),

    #[error("singular design: column `{column}` is collinear with [{}]", .depends_on.join(", "))]
    SingularDesign {
        column: String,
        depends_on: Vec<String>,
    },

    #[error("log transform requires positive prices, found {0} at index {1}")]
    TransformDomain(f64, usize),

    #[error("no market equilibrium: {0}")]
    NoEquilibrium(String),

    #[error("infeasible dispatch: {0}")]
    InfeasibleDispatch(String),

    #[error("scarcity: supply capacity {capacity} cannot serve fixed demand {demand}")]
    Scarcity { capacity: f64, demand: f64 },

    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
