use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("node id {0} is out of range")]
    UnknownNodeId(usize),
    #[error("edge id {0} is out of range")]
    UnknownEdgeId(usize),
    #[error("no edge between `{0}` and `{1}`")]
    UnknownEdge(String, String),
    #[error("self-loop on `{0}`")]
    SelfLoop(String),
    #[error("duplicate edge `{0}`-`{1}`")]
    DuplicateEdge(String, String),
    #[error("duplicate device location `{0}`")]
    DuplicateDevice(String),
    #[error("the target set is empty")]
    EmptyTargets,
    #[error("the device set is empty")]
    EmptyDevices,
    #[error("isolation needs at least two targets, got {0}")]
    TooFewTargets(usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("battery constraint violated (more than {sigma} slots) by: {}", devices.join(", "))]
    BatteryViolation { sigma: usize, devices: Vec<String> },
    #[error("malformed labeling: {0}")]
    MalformedLabeling(String),
    #[error("operation only defined for the {0} objective")]
    ObjectiveMismatch(&'static str),
    #[error("search space of {size} exceeds the limit of {limit}")]
    SearchSpaceTooLarge { size: u128, limit: u128 },
}

impl Error {
    /// Errors that reflect a refused computation rather than bad input.
    pub fn is_refusal(&self) -> bool {
        matches!(self, Error::SearchSpaceTooLarge { .. })
    }
}
