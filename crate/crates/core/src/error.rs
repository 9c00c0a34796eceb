use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("enumeration limit exceeded: {what} (limit {limit})")]
    EnumerationLimit { what: String, limit: usize },
    #[error("group is not transitive: no element maps the basepoint to {point}")]
    MissingCoset { point: u32 },
    #[error("invalid permutation: {0}")]
    InvalidPerm(String),
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("invalid generator: {0}")]
    InvalidGenerator(String),
    #[error("invalid path: {0}")]
    InvalidPath(String),
    #[error("side mismatch: {0}")]
    SideMismatch(String),
    #[error("element outside the required subgroup: {0}")]
    Domain(String),
    #[error("Britton pinch: {0}")]
    BrittonPinch(String),
    #[error("oracle contract violated: {0}")]
    OracleContract(String),
    #[error("cap exceeded: {what} = {value} > {cap}")]
    CapExceeded {
        what: String,
        value: usize,
        cap: usize,
    },
    #[error("classification error: {0}")]
    Classification(String),
    #[error("inconclusive fledge report, diameters {diameters:?}")]
    Inconclusive { diameters: Vec<usize> },
    #[error("configuration error: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn parse(pos: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            pos,
            msg: msg.into(),
        }
    }
}
