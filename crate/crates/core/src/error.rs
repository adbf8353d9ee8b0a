use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("schema violation: {0}")]
    Schema(String),

    #[error("entitlements sum to {sum}, expected 1")]
    EntitlementSum { sum: String },

    #[error("entitlement of agent {agent} is {value}, must be positive")]
    NonPositiveEntitlement { agent: usize, value: String },

    #[error("cost of chore {chore} for agent {agent} is negative ({value})")]
    NegativeCost {
        agent: usize,
        chore: usize,
        value: String,
    },

    #[error("cannot parse rational {0:?}")]
    ParseRational(String),

    #[error("{what} exceeds the size guard ({actual} > {limit}); raise the limit explicitly to proceed")]
    SizeGuard {
        what: &'static str,
        actual: usize,
        limit: usize,
    },

    #[error("picker {picker} is out of range for {agents} agents")]
    PickerOutOfRange { picker: usize, agents: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unknown fixed order {0:?}")]
    UnknownOrder(String),

    #[error("no agent may pick at round {round}: covering constraint violated")]
    StuckRound { round: u64 },

    #[error("ridge prefix violates the thresholds of agent {agent}")]
    RidgeViolation { agent: usize },

    #[error("threshold domination property fails for output agents {pairs:?}")]
    Domination { pairs: Vec<usize> },

    #[error("arithmetic overflow: {0}")]
    Overflow(&'static str),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
