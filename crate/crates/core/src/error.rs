use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("empty mention after normalization: {raw:?}")]
pub struct EmptyMention {
    pub raw: String,
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid situation label {0:?}: expected non-empty snake_case")]
    InvalidSituation(String),
    #[error(transparent)]
    EmptyMention(#[from] EmptyMention),
}

/// Failures talking to a generation or reconciliation backend.
#[derive(Debug, Error)]
pub enum OracleError {
    /// Timeouts, connection failures and 5xx responses, after retries ran out.
    #[error("transport failure after {attempts} attempt(s): {message}")]
    Transport { attempts: u32, message: String },
    /// 4xx responses. Retrying will not help.
    #[error("backend rejected request with HTTP {status}: {body}")]
    Rejected { status: u16, body: String },
    #[error("invalid backend configuration: {0}")]
    Config(String),
    #[error("malformed backend response: {0}")]
    Decode(String),
}

impl OracleError {
    pub fn is_retriable(&self) -> bool {
        matches!(self, OracleError::Transport { .. })
    }
}

#[derive(Debug, Error)]
pub enum MergeError {
    #[error("decision/pair mismatch: {0}")]
    DecisionMismatch(String),
    #[error("decision references unknown element {0}")]
    UnknownElement(String),
    #[error("label {label} out of range for task {task}")]
    LabelOutOfRange { task: String, label: u8 },
    #[error("cannot merge a {new} instance into a {memory} memory")]
    SituationMismatch { memory: String, new: String },
}

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("no labeled pairs to score")]
    Empty,
    #[error("mixed tasks in one scoring batch: {0} and {1}")]
    MixedTasks(String, String),
    #[error("label {label} out of range for task {task}")]
    LabelOutOfRange { task: String, label: u8 },
    #[error("unknown NLI label {0:?}")]
    UnknownNliLabel(String),
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("window must be in 1..=10, got {0}")]
    Window(usize),
    #[error("overlap must be below window ({window}), got {overlap}")]
    Overlap { window: usize, overlap: usize },
    #[error(transparent)]
    Situation(#[from] ModelError),
    #[error(transparent)]
    Backend(#[from] OracleError),
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("document {doc_id} aborted at segment {segment}: {source}")]
    Merge {
        doc_id: String,
        segment: u32,
        #[source]
        source: MergeError,
    },
}

#[derive(Debug, Error)]
pub enum ReplayError {
    #[error("replay diverged at segment {segment}: {detail}")]
    Divergence { segment: u32, detail: String },
    #[error("replay failed at segment {segment}: {source}")]
    Merge {
        segment: u32,
        #[source]
        source: MergeError,
    },
}

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    File {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },
}
