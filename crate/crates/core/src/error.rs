use thiserror::Error;

use crate::hypergraph::EventId;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid interval [{start}, {end}]: start is after end")]
    InvalidInterval { start: i64, end: i64 },
    #[error("event has an empty {0} set")]
    EmptyEntitySet(&'static str),
    #[error("duplicate {side} entity `{name}`")]
    DuplicateEntity { side: &'static str, name: String },
    #[error("reserved character in name `{0}`")]
    ReservedName(String),
    #[error("unknown entity `{0}`")]
    UnknownEntity(String),
    #[error("unknown entity id {0}")]
    UnknownEntityId(usize),
    #[error("unknown event id {0}")]
    UnknownEvent(EventId),
    #[error("predicate `{name}` arity mismatch: {detail}")]
    ArityMismatch { name: String, detail: String },
    #[error("graph is not a B-graph: event {0} has more than one tail")]
    NotBGraph(EventId),
    #[error("walk needs at least one start entity")]
    EmptyStartSet,
    #[error("event {0} is not enabled in the current walk state")]
    DisabledEdge(EventId),
    #[error("network key mismatch: {0}")]
    KeyMismatch(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("training diverged at epoch {epoch}: loss is {loss}")]
    NonFiniteLoss { epoch: usize, loss: f64 },
    #[error("degenerate label distribution: {0}")]
    DegenerateLabels(String),
    #[error("empty rank list")]
    EmptyRanks,
    #[error("unsatisfiable temporal constraints")]
    Unsatisfiable,
    #[error("rule error: {0}")]
    Rule(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("snapshots are not strictly increasing in time at index {0}")]
    UnorderedSnapshots(usize),
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
