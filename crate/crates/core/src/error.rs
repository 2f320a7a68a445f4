use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("not unitary: defect {defect:.3e} exceeds tolerance {tol:.3e}")]
    NotUnitary { defect: f64, tol: f64 },

    #[error("no construction available: {0}")]
    Existence(String),

    #[error("unknown gate `{0}`")]
    UnknownGate(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// A proven invariant failed numerically; indicates a bug, not bad input.
    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("resource guard: {0}")]
    ResourceGuard(String),

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// Stable snake_case name of the variant, for machine-readable output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Dimension(_) => "dimension",
            Error::Degenerate(_) => "degenerate",
            Error::Precondition(_) => "precondition",
            Error::Parameter(_) => "parameter",
            Error::NotUnitary { .. } => "not_unitary",
            Error::Existence(_) => "existence",
            Error::UnknownGate(_) => "unknown_gate",
            Error::InsufficientData(_) => "insufficient_data",
            Error::Invariant(_) => "invariant",
            Error::ResourceGuard(_) => "resource_guard",
            Error::Parse(_) => "parse",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }
}
