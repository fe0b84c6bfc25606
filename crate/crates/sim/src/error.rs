use std::path::PathBuf;

use pinch_core::scenario::{describe, Violation};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("{0}")]
    Usage(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("cannot read {path}: {message}")]
    Read { path: PathBuf, message: String },
    #[error("scenario is invalid:\n{}", describe(.0))]
    Invalid(Vec<Violation>),
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv output failed: {0}")]
    Csv(#[from] csv::Error),
    #[error("checkpoint encoding failed: {0}")]
    Encode(#[from] serde_json::Error),
    #[error(transparent)]
    Core(#[from] pinch_core::Error),
}

pub type SimResult<T> = Result<T, SimError>;

impl SimError {
    /// 1 for anything the caller can fix in its inputs, 2 for failures during
    /// a run.
    pub fn exit_code(&self) -> u8 {
        use pinch_core::Error as E;
        match self {
            SimError::Usage(_) | SimError::Config(_) | SimError::Read { .. } | SimError::Invalid(_) => 1,
            SimError::Core(
                E::InvalidConfig(_)
                | E::UnknownScenario(_)
                | E::CoordinateOutOfRange { .. }
                | E::InfeasibleSpacing { .. }
                | E::BudgetExceeded { .. },
            ) => 1,
            _ => 2,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(SimError::Usage("x".into()).exit_code(), 1);
        assert_eq!(SimError::Core(pinch_core::Error::UnknownScenario("z".into())).exit_code(), 1);
        assert_eq!(SimError::Core(pinch_core::Error::Divergence { epoch: 3 }).exit_code(), 2);
        assert_eq!(SimError::Core(pinch_core::Error::NoDeviceMeetsDeadline { round: 0 }).exit_code(), 2);
    }
}
