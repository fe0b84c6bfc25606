use alloc::string::String;

use thiserror::Error;

/// Failures raised by the simulator core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("coordinate {s} is outside [0, {length}] on waveguide {waveguide}")]
    CoordinateOutOfRange { waveguide: usize, s: f64, length: f64 },
    #[error("radiating point coincides with the user position")]
    ZeroDistance,
    #[error("waveguide {0} has no active pinching antenna")]
    NoActivePa(usize),
    #[error("user {0} is not assigned to a valid waveguide")]
    Unassigned(usize),
    #[error("exhaustive search needs {evaluations} evaluations, above the budget of {cap}")]
    BudgetExceeded { evaluations: u128, cap: u128 },
    #[error("cannot place {pas} antennas {min_spacing} m apart on waveguide {waveguide}")]
    InfeasibleSpacing { waveguide: usize, pas: usize, min_spacing: f64 },
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("loss became non-finite at epoch {epoch}")]
    Divergence { epoch: usize },
    #[error("loss is not finite")]
    NonFiniteLoss,
    #[error("batch is empty")]
    EmptyBatch,
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),
    #[error("rng stream label `{0}` was already issued in this run")]
    DuplicateStreamLabel(String),
    #[error("AirComp receive scale must be non-zero")]
    ZeroReceiveScale,
    #[error("no device met the round deadline in round {round}")]
    NoDeviceMeetsDeadline { round: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = core::result::Result<T, Error>;
