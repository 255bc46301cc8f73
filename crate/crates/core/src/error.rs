use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("unknown subsystem label `{0}`")]
    UnknownLabel(String),

    #[error("empty subsystem selection")]
    EmptySelection,

    #[error("subsystem groups {0}")]
    BadGrouping(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("dimension {dim} exceeds the configured limit of {limit}")]
    DimensionLimit { dim: usize, limit: usize },

    #[error("state vector is not normalized (norm {0})")]
    NotNormalized(f64),

    #[error("operator is not Hermitian (residual {0:.3e})")]
    NotHermitian(f64),

    #[error("operator is not positive semi-definite (minimum eigenvalue {0:.3e})")]
    NotPositive(f64),

    #[error("trace {trace} outside the admissible range (expected {expected})")]
    BadTrace { trace: f64, expected: f64 },

    #[error("rank {rank} out of range for dimension {dim}")]
    RankOutOfRange { rank: usize, dim: usize },

    #[error("Kraus operators are not trace preserving (residual {0:.3e})")]
    NotTracePreserving(f64),

    #[error("Kraus operators increase the trace (largest eigenvalue of sum E^dag E is {0})")]
    TraceIncreasing(f64),

    #[error("Choi matrix is not positive semi-definite (minimum eigenvalue {0:.3e}); the map is not completely positive")]
    NotCompletelyPositive(f64),

    #[error("projector set is invalid: {0}")]
    InvalidProjectors(String),

    #[error("invalid generator: {0}")]
    InvalidGenerator(String),

    #[error("integration lost positivity at t = {time} (minimum eigenvalue {min_eigenvalue:.3e}); reduce the step")]
    StepTooLarge { time: f64, min_eigenvalue: f64 },

    #[error("invalid time arguments: {0}")]
    InvalidTime(String),

    #[error("operator leaves the support of the reduced density matrix (residual {0:.3e})")]
    OutsideSupport(f64),

    #[error("epistemic states are inconsistent with the channel (residual {0:.3e})")]
    EpistemicInconsistency(f64),

    #[error("negative conditional probability {0:.3e}")]
    NegativeProbability(f64),

    #[error("malformed stochastic matrix: {0}")]
    NotStochastic(String),

    #[error("invalid model parameters: {0}")]
    InvalidModel(String),

    #[error("operation is not local to the selected subsystem: {0}")]
    NonLocalOperation(String),

    #[error("zero vector supplied where a direction is required")]
    ZeroVector,

    #[error("vector is not a unit vector (norm {0})")]
    NotUnitVector(f64),

    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),

    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
