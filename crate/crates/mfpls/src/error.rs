//! Error taxonomy shared across the crate.
//!
//! Every variant carries a stable code string (used in the CLI's
//! machine-readable error output) via [`Error::code`].

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// The basis Gram matrix has a significantly negative eigenvalue,
    /// i.e. the basis functions are not linearly independent.
    #[error("gram matrix is not positive definite: {0}")]
    NonSpdGram(String),

    /// Smoothing design matrix is numerically rank deficient.
    #[error("design matrix is rank deficient: {0}")]
    RankDeficient(String),

    /// Two function objects / samples do not share the same bases.
    #[error("basis mismatch: {0}")]
    BasisMismatch(String),

    /// Shapes of inputs are inconsistent.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// Predictor carries no covariance with the response.
    #[error("zero covariance between predictors and response: {0}")]
    ZeroCovariance(String),

    /// A PLS component collapsed to (numerically) zero norm.
    #[error("degenerate PLS component: {0}")]
    DegenerateComponent(String),

    /// Triangular system for the v-weights could not be solved.
    #[error("singular system: {0}")]
    SingularSystem(String),

    /// Not enough observations for the requested operation.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// A binary operation received labels from a single class only.
    #[error("single class: {0}")]
    SingleClass(String),

    /// Impurity of an empty node is undefined.
    #[error("empty node")]
    EmptyNode,

    /// Covariance matrix of the random field is not positive definite.
    #[error("singular covariance: {0}")]
    SingularCovariance(String),

    /// Invalid user-supplied configuration or data file contents.
    #[error("validation error: {0}")]
    Validation(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable machine-readable code for this error.
    pub fn code(&self) -> &'static str {
        match self {
            Error::NonSpdGram(_) => "NonSpdGram",
            Error::RankDeficient(_) => "RankDeficient",
            Error::BasisMismatch(_) => "BasisMismatch",
            Error::DimensionMismatch(_) => "DimensionMismatch",
            Error::ZeroCovariance(_) => "ZeroCovariance",
            Error::DegenerateComponent(_) => "DegenerateComponent",
            Error::SingularSystem(_) => "SingularSystem",
            Error::InsufficientData(_) => "InsufficientData",
            Error::SingleClass(_) => "SingleClass",
            Error::EmptyNode => "EmptyNode",
            Error::SingularCovariance(_) => "SingularCovariance",
            Error::Validation(_) => "Validation",
            Error::Io(_) => "Io",
            Error::Csv(_) => "Csv",
            Error::Json(_) => "Json",
        }
    }

    /// Whether the error reflects invalid user input rather than an
    /// internal failure (drives the CLI exit code).
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Io(_) | Error::Json(_) | Error::Csv(_))
    }
}
