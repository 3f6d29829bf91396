use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("length violation: {0}")]
    Length(String),

    #[error("partition mismatch: {0}")]
    Mismatch(String),

    #[error("part index {part} out of range for {parts} parts")]
    PartOutOfRange { part: usize, parts: usize },

    #[error("unknown functional index {0}")]
    UnknownFunctional(usize),

    #[error("stage {stage} exceeds the stage budget {s_max}")]
    StageBudget { stage: usize, s_max: usize },

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid registry: {0}")]
    InvalidRegistry(String),

    #[error("no qualifying extension of part {part}: {why}")]
    NoExtension { part: usize, why: String },

    #[error("case misclassified: {0}")]
    CaseMismatch(String),

    #[error("size budget exceeded: {0}")]
    Budget(String),

    #[error("inconsistent tree: {0}")]
    Inconsistent(String),

    #[error("verification failed at stage {stage}: {what}")]
    Verification { stage: usize, what: String },

    #[error("stage {stage}: set too thin to continue ({available} < {needed})")]
    ThresholdUnreachable {
        stage: usize,
        available: usize,
        needed: usize,
    },

    #[error("no acceptable chain through the trace")]
    NoAcceptableChain,

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}
