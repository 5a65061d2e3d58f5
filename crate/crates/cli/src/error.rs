use moebius_energy::{CurveError, Error as CoreError, QuadError};

/// Exit code for numerical or verification failures.
pub const EXIT_NUMERICAL: i32 = 2;
/// Exit code for bad input or a violated contract.
pub const EXIT_INPUT: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Verification(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) => match e {
                CoreError::Curve(
                    CurveError::LengthNotConverged { .. } | CurveError::ReparamNotConverged { .. },
                ) => EXIT_NUMERICAL,
                CoreError::Curve(_) | CoreError::Moebius(_) => EXIT_INPUT,
                CoreError::Quad(QuadError::NonFinite { .. }) | CoreError::Density(_) => {
                    EXIT_NUMERICAL
                }
                CoreError::Quad(_) => EXIT_INPUT,
            },
            CliError::Verification(_) => EXIT_NUMERICAL,
            CliError::Input(_) | CliError::Io(_) | CliError::Json(_) | CliError::Csv(_) => {
                EXIT_INPUT
            }
        }
    }
}

impl From<CurveError> for CliError {
    fn from(e: CurveError) -> Self {
        CliError::Core(e.into())
    }
}

impl From<moebius_energy::MoebiusError> for CliError {
    fn from(e: moebius_energy::MoebiusError) -> Self {
        CliError::Core(e.into())
    }
}

impl From<QuadError> for CliError {
    fn from(e: QuadError) -> Self {
        CliError::Core(e.into())
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
