use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    /// Some UE has no LED inside its field of view.
    #[error("UE {ue} has an empty reachable LED set")]
    EmptyReachableSet { ue: usize },

    /// No one-to-one LED assignment exists (or a greedy rule ran out of LEDs).
    #[error("infeasible instance: {0}")]
    InfeasibleInstance(String),

    #[error("infeasible assignment: {0}")]
    InfeasibleAssignment(String),

    #[error("exhaustive search would visit up to {size:.3e} assignments, over the budget of {budget}")]
    EnumerationTooLarge { size: f64, budget: u64 },

    #[error("invalid experiment: {0}")]
    InvalidExperiment(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("failed to parse TOML: {0}")]
    TomlDe(#[from] toml::de::Error),

    #[error("failed to write TOML: {0}")]
    TomlSer(#[from] toml::ser::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for the errors that mean "this random instance cannot be served",
    /// which the experiment runner answers by resampling.
    pub fn is_infeasibility(&self) -> bool {
        matches!(self, Error::EmptyReachableSet { .. } | Error::InfeasibleInstance(_))
    }
}
