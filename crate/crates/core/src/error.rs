use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("missing parameter `{0}`")]
    MissingParameter(String),

    #[error("unknown parameter `{0}`")]
    UnknownParameter(String),

    #[error("non-finite value for `{0}`")]
    NonFinite(String),

    #[error("undefined input: {0}")]
    UndefinedInput(String),

    #[error("solver failure: {0}")]
    SolverFailure(String),

    /// The smallest singular value of a fixed-rank iterate fell below the floor.
    #[error("rank collapse: sigma_min = {sigma_min:e}, sigma_max = {sigma_max:e}")]
    RankCollapse { sigma_min: f64, sigma_max: f64 },

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: msg.into(),
        }
    }
}

pub(crate) fn check_dim(context: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            context,
            expected,
            found,
        })
    }
}
