use qthermo::Error as CoreError;
use thiserror::Error;

use crate::config::ConfigError;

pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_CONVERGENCE: i32 = 3;
pub const EXIT_RESUME: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    #[error("convergence failure: {0}")]
    Convergence(String),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("output error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Convergence(_) => EXIT_CONVERGENCE,
            CliError::Io(_) => EXIT_FAILURE,
            CliError::Core(e) => match e {
                CoreError::InvalidParameter(_)
                | CoreError::InvalidState(_)
                | CoreError::Dimension(_)
                | CoreError::NotHermitian(_)
                | CoreError::DegeneratePole { .. }
                | CoreError::HierarchyTooLarge { .. }
                | CoreError::OutsideWindow { .. } => EXIT_CONFIG,
                CoreError::SteadyStateNotConverged { .. } | CoreError::StepUnderflow { .. } => EXIT_CONVERGENCE,
                CoreError::ResumeMismatch | CoreError::Checkpoint(_) => EXIT_RESUME,
                _ => EXIT_FAILURE,
            },
        }
    }
}
