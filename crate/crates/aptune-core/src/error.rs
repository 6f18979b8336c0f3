use thiserror::Error;

/// Errors produced by configuration validation, solvers, and file handling.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid network config: {0}")]
    InvalidConfig(String),

    #[error("APs {0} and {1} share the same position")]
    CoincidentPositions(usize, usize),

    #[error("attempt rate {0} outside (0; 1)")]
    InvalidAttemptRate(f64),

    #[error("power {value} for AP {ap} outside [{min}; {max}]")]
    PowerOutOfRange {
        ap: usize,
        value: f64,
        min: f64,
        max: f64,
    },

    #[error("operation requires exactly two APs; config has {0}")]
    TwoApsRequired(usize),

    #[error("objective {0} has no finite optimal support; search over the threshold lattice needs a bound objective")]
    UnsupportedObjective(&'static str),

    #[error("search space of {size:e} profiles exceeds the {limit:e} enumeration cap")]
    SearchSpaceTooLarge { size: f64, limit: f64 },

    #[error("no profile in the threshold lattice meets the SNR floor; worst residual {worst_violation:.6}")]
    RpmacInfeasible {
        /// Least-violating profile found, as a certificate.
        best_profile: Vec<f64>,
        /// Per-AP slack of that profile (negative where the floor is missed).
        slack: Vec<f64>,
        worst_violation: f64,
    },

    #[error("correlation {0} outside [0; 1)")]
    CorrelationOutOfRange(f64),

    #[error("invalid mechanism parameters: {0}")]
    InvalidMechanism(String),

    #[error("expected {expected} entries; got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid experiment plan: {0}")]
    InvalidPlan(&'static str),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
