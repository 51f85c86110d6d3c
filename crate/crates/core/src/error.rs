use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("graph not connected")]
    GraphNotConnected,

    #[error("invalid perfect elimination ordering: {0}")]
    InvalidPeo(String),

    #[error("cliques do not form a connected clique graph")]
    DisconnectedCliques,

    #[error("invalid clique tree: {0}")]
    InvalidTree(String),

    #[error("could not generate connected scenario after {0} retries")]
    ScenarioGeneration(usize),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("scenario schema violation at `{path}`: {message}")]
    Schema { path: String, message: String },

    #[error("measurement graph not connected; components: {0}")]
    DisconnectedMeasurements(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not symmetric (asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("{0} is not positive definite")]
    NotPositiveDefinite(&'static str),

    #[error("matrix is singular")]
    Singular,

    #[error("assignment error: {0}")]
    Assignment(String),

    #[error("negative regularization weight {0}")]
    NegativeWeight(f64),

    #[error("index inconsistency: {0}")]
    IndexInconsistency(String),

    #[error("KKT singular: {0}")]
    KktSingular(String),

    #[error("agent {} KKT singular ({detail}); check for duplicate measurements", .agent + 1)]
    AgentKktSingular { agent: usize, detail: String },

    #[error("invalid solver options: {0}")]
    InvalidOptions(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
