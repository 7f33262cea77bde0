use std::fmt;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::error::MergeError;
use crate::model::{EdgeKey, NodeId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    RecNode,
    RecEdge,
    Qr,
}

impl Task {
    pub fn as_str(self) -> &'static str {
        match self {
            Task::RecNode => "rec_node",
            Task::RecEdge => "rec_edge",
            Task::Qr => "qr",
        }
    }

    pub fn max_label(self) -> u8 {
        match self {
            Task::RecNode | Task::RecEdge => 2,
            Task::Qr => 1,
        }
    }

    pub fn is_rec(self) -> bool {
        self != Task::Qr
    }

    pub fn check_label(self, label: u8) -> Result<u8, MergeError> {
        if label <= self.max_label() {
            Ok(label)
        } else {
            Err(MergeError::LabelOutOfRange { task: self.as_str().to_string(), label })
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Reconciliation classes for node and edge pairs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u8)]
pub enum RecLabel {
    /// The existing element is sufficient; drop the new one.
    KeepOld = 0,
    /// The new element overwrites the existing one.
    Replace = 1,
    /// Both matter and are unrelated; keep both.
    KeepBoth = 2,
}

/// Question-resolution classes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u8)]
pub enum QrLabel {
    Unresolved = 0,
    /// Answered, or no longer relevant.
    Resolved = 1,
}

impl RecLabel {
    pub fn from_u8(v: u8) -> Option<Self> {
        match v {
            0 => Some(RecLabel::KeepOld),
            1 => Some(RecLabel::Replace),
            2 => Some(RecLabel::KeepBoth),
            _ => None,
        }
    }
}

/// Reference to a graph element of either instance.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ElementKey {
    Node(NodeId),
    Edge(EdgeKey),
    Question(String),
}

impl fmt::Display for ElementKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ElementKey::Node(id) => write!(f, "node {id}"),
            ElementKey::Edge(key) => write!(f, "edge {key}"),
            ElementKey::Question(q) => write!(f, "question {q:?}"),
        }
    }
}

/// One pairwise verdict. For `qr`, `old_ref` is the open question and
/// `new_ref` the new node or edge offered as evidence.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ReconcileDecision {
    pub task: Task,
    pub old_ref: ElementKey,
    pub new_ref: ElementKey,
    pub label: u8,
}

/// Decision log line (JSONL).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecisionLogLine {
    pub doc_id: String,
    pub segment: u32,
    pub timestamp_ms: u64,
    #[serde(flatten)]
    pub decision: ReconcileDecision,
}

impl DecisionLogLine {
    pub fn now(doc_id: &str, segment: u32, decision: ReconcileDecision) -> Self {
        let timestamp_ms = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_millis() as u64)
            .unwrap_or(0);
        DecisionLogLine { doc_id: doc_id.to_string(), segment, timestamp_ms, decision }
    }
}
