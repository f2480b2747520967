//! Command-line front end for `planar-switching`.
//!
//! Reads a JSON matrix set, runs one analysis and writes a schema-versioned
//! JSON report. Trajectory and rate tables go out as CSV.

pub mod commands;
pub mod input;
pub mod report;

use planar_switching::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("input error: {0}")]
    Input(String),
    #[error(transparent)]
    Analysis(#[from] CoreError),
    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
}

pub mod exit {
    pub const STABLE: i32 = 0;
    pub const INPUT_ERROR: i32 = 1;
    pub const UNSTABLE: i32 = 2;
    pub const INCONCLUSIVE: i32 = 3;
    pub const NOT_MARGINALLY_UNSTABLE: i32 = 4;
    pub const WORK_BUDGET: i32 = 5;
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) | CliError::Io(_) => exit::INPUT_ERROR,
            CliError::Analysis(e) => match e {
                CoreError::WorkBudgetExceeded { .. } => exit::WORK_BUDGET,
                CoreError::NotMarginallyUnstable(_) => exit::NOT_MARGINALLY_UNSTABLE,
                CoreError::EmptySet
                | CoreError::NonFinite { .. }
                | CoreError::IndexOutOfRange { .. }
                | CoreError::InvalidArgument(_) => exit::INPUT_ERROR,
                _ => exit::INCONCLUSIVE,
            },
        }
    }
}
