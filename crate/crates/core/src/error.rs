use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("unknown node id {0}")]
    UnknownNode(u32),
    #[error("unknown node `{0}`")]
    UnknownNodeName(String),
    #[error("unknown group id {0}")]
    UnknownGroup(u32),
    #[error("duplicate node `{0}`")]
    DuplicateNode(String),
    #[error("self-loop on node `{0}`")]
    SelfLoop(String),
    #[error("centrality undefined for `{node}`: group has {size} node(s), need at least 2")]
    DegenerateGroup { node: String, size: usize },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FlowError {
    #[error("invalid flow parameters: {0}")]
    InvalidParams(String),
    #[error("unknown flow {0}")]
    UnknownFlow(u32),
    #[error("no packets queued, share undefined")]
    EmptyQueue,
    #[error("no active flows, active service undefined")]
    NoActiveFlows,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SchedulerError {
    #[error("no queued flows")]
    NoQueuedFlows,
    #[error("unknown flow {0}")]
    UnknownFlow(u32),
    #[error("flow {0} registered twice")]
    DuplicateFlow(u32),
    #[error("invalid scheduler config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Flow(#[from] FlowError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("parameter out of domain: {0}")]
    Domain(String),
    #[error("singular: {0}")]
    Singular(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Scheduler(#[from] SchedulerError),
    #[error("sweep point {value} failed: {source}")]
    SweepPoint {
        value: f64,
        #[source]
        source: Box<SimError>,
    },
}
