//! Pairwise classifiers: the deterministic mock rules, a remote model, and
//! NLI/QA baselines repurposed through the label mapping.

use std::collections::BTreeSet;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::decision::{ElementKey, ReconcileDecision, Task};
use super::pairs::CandidatePairSet;
use crate::error::{MergeError, OracleError};
use crate::eval::{map_nli, map_qa};
use crate::model::{SemanticNode, WorkspaceInstance};
use crate::oracle::config::{BackendConfig, BackendKind};
use crate::oracle::remote::HttpTransport;
use crate::text;

/// Fraction of a question's content tokens that must appear in new
/// evidence for the mock rules to call it resolved.
pub const QR_THRESHOLD: f64 = 0.4;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeView {
    pub actor: String,
    pub role: String,
    pub state: String,
}

impl NodeView {
    fn of(n: &SemanticNode) -> Self {
        NodeView { actor: n.actor.mention().to_string(), role: n.role.clone(), state: n.state.clone() }
    }

    pub fn text(&self) -> String {
        format!("{} {} {}", self.actor, self.role, self.state)
    }
}

/// What a classifier sees of one element. Serialized untagged, which is
/// also the `old`/`new` payload of the remote wire format.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ElementView {
    Node(NodeView),
    Edge {
        label: String,
        source: NodeView,
        target: NodeView,
        attributes: Option<String>,
    },
    Question {
        question: String,
    },
}

impl ElementView {
    pub fn resolve(w: &WorkspaceInstance, key: &ElementKey) -> Option<Self> {
        match key {
            ElementKey::Node(id) => w.node(id).map(|n| ElementView::Node(NodeView::of(n))),
            ElementKey::Edge(k) => {
                let e = w.edge(k)?;
                Some(ElementView::Edge {
                    label: e.label.clone(),
                    source: NodeView::of(w.node(&e.source)?),
                    target: NodeView::of(w.node(&e.target)?),
                    attributes: e.attributes.clone(),
                })
            }
            ElementKey::Question(q) => w.question(q).map(|q| ElementView::Question { question: q.text.clone() }),
        }
    }

    /// Serialized text used for token overlap and as baseline model input.
    pub fn text(&self) -> String {
        match self {
            ElementView::Node(n) => n.text(),
            ElementView::Edge { label, source, target, attributes } => {
                let mut s = format!("{} {} {}", source.text(), label, target.text());
                if let Some(a) = attributes {
                    s.push(' ');
                    s.push_str(a);
                }
                s
            }
            ElementView::Question { question } => question.clone(),
        }
    }
}

pub trait Reconciler: Send + Sync {
    fn label(&self, task: Task, old: &ElementView, new: &ElementView, context: &str) -> Result<u8, OracleError>;
}

/// Rule-based classifier:
/// - nodes: same (role, state) -> 0, same role -> 1, otherwise 2;
/// - edges: the same on (label, attributes);
/// - questions: 1 iff at least [`QR_THRESHOLD`] of the question's content
///   tokens occur in the evidence text.
#[derive(Clone, Copy, Debug, Default)]
pub struct MockReconciler;

impl MockReconciler {
    pub fn rec<A: PartialEq, B: PartialEq>(old: (A, B), new: (A, B)) -> u8 {
        if old.0 != new.0 {
            2
        } else if old.1 != new.1 {
            1
        } else {
            0
        }
    }

    pub fn qr(question: &str, evidence: &str) -> u8 {
        let wanted = text::content_tokens(question);
        if wanted.is_empty() {
            return 0;
        }
        let have: BTreeSet<String> = text::tokens(evidence).into_iter().collect();
        let hit = wanted.iter().filter(|t| have.contains(*t)).count();
        u8::from(hit as f64 / wanted.len() as f64 >= QR_THRESHOLD)
    }
}

impl Reconciler for MockReconciler {
    fn label(&self, task: Task, old: &ElementView, new: &ElementView, _context: &str) -> Result<u8, OracleError> {
        match (task, old, new) {
            (Task::RecNode, ElementView::Node(o), ElementView::Node(n)) => {
                Ok(Self::rec((&o.role, &o.state), (&n.role, &n.state)))
            }
            (
                Task::RecEdge,
                ElementView::Edge { label: ol, attributes: oa, .. },
                ElementView::Edge { label: nl, attributes: na, .. },
            ) => Ok(Self::rec((ol, oa), (nl, na))),
            (Task::Qr, ElementView::Question { question }, evidence) => Ok(Self::qr(question, &evidence.text())),
            _ => Err(OracleError::Config(format!("element kinds do not match task {task}"))),
        }
    }
}

pub fn reconcile_request_body(task: Task, old: &ElementView, new: &ElementView, context: &str) -> Value {
    json!({ "task": task.as_str(), "old": old, "new": new, "context": context })
}

#[derive(Clone, Debug)]
pub struct RemoteReconciler {
    transport: HttpTransport,
}

impl RemoteReconciler {
    pub fn new(config: BackendConfig) -> Result<Self, OracleError> {
        Ok(RemoteReconciler { transport: HttpTransport::new(config)? })
    }
}

impl Reconciler for RemoteReconciler {
    fn label(&self, task: Task, old: &ElementView, new: &ElementView, context: &str) -> Result<u8, OracleError> {
        let reply = self
            .transport
            .post_json("reconcile", &reconcile_request_body(task, old, new, context))?;
        reply
            .get("label")
            .and_then(Value::as_u64)
            .and_then(|l| u8::try_from(l).ok())
            .ok_or_else(|| OracleError::Decode(format!("expected {{\"label\": int}}, got {reply}")))
    }
}

/// Premise/hypothesis classifier returning an NLI label string.
pub trait NliModel: Send + Sync {
    fn predict(&self, premise: &str, hypothesis: &str) -> Result<String, OracleError>;
}

/// Extractive QA model returning the answer span, if any.
pub trait QaModel: Send + Sync {
    fn answer(&self, question: &str, context: &str) -> Result<Option<String>, OracleError>;
}

/// Reconciler built from off-the-shelf NLI and QA models.
pub struct BaselineReconciler<N, Q> {
    pub nli: N,
    pub qa: Q,
}

impl<N: NliModel, Q: QaModel> Reconciler for BaselineReconciler<N, Q> {
    fn label(&self, task: Task, old: &ElementView, new: &ElementView, _context: &str) -> Result<u8, OracleError> {
        if task.is_rec() {
            let raw = self.nli.predict(&old.text(), &new.text())?;
            map_nli(&raw).map_err(|e| OracleError::Decode(e.to_string()))
        } else {
            let span = self.qa.answer(&old.text(), &new.text())?;
            Ok(map_qa(span.as_deref()))
        }
    }
}

pub fn reconciler_from_config(cfg: &BackendConfig) -> Result<Arc<dyn Reconciler>, OracleError> {
    cfg.validate()?;
    Ok(match cfg.kind {
        BackendKind::Mock => Arc::new(MockReconciler),
        BackendKind::Remote => Arc::new(RemoteReconciler::new(cfg.clone())?),
    })
}

/// Label to fall back on when the classifier fails: keep information.
pub fn conservative_default(task: Task) -> u8 {
    if task.is_rec() {
        2
    } else {
        0
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Classified {
    pub label: u8,
    /// Set when the classifier failed and the conservative default was used.
    pub fallback: Option<String>,
}

pub fn classify_pair(r: &dyn Reconciler, task: Task, old: &ElementView, new: &ElementView, context: &str) -> Classified {
    match r.label(task, old, new, context) {
        Ok(label) if label <= task.max_label() => Classified { label, fallback: None },
        Ok(label) => Classified {
            label: conservative_default(task),
            fallback: Some(format!("{task}: label {label} out of range")),
        },
        Err(e) => Classified { label: conservative_default(task), fallback: Some(format!("{task}: {e}")) },
    }
}

#[derive(Clone, Debug, Default)]
pub struct Classification {
    pub decisions: Vec<ReconcileDecision>,
    pub warnings: Vec<String>,
}

/// Classifies every pair (in parallel); decisions come back in pair order.
pub fn classify_all(
    r: &dyn Reconciler,
    consensus: &WorkspaceInstance,
    w: &WorkspaceInstance,
    pairs: &CandidatePairSet,
    context: &str,
) -> Result<Classification, MergeError> {
    let mut jobs = Vec::with_capacity(pairs.len());
    for (task, old_ref, new_ref) in pairs.triples() {
        let old = ElementView::resolve(consensus, &old_ref)
            .ok_or_else(|| MergeError::UnknownElement(old_ref.to_string()))?;
        let new = ElementView::resolve(w, &new_ref).ok_or_else(|| MergeError::UnknownElement(new_ref.to_string()))?;
        jobs.push((task, old_ref, new_ref, old, new));
    }
    let results: Vec<(ReconcileDecision, Option<String>)> = jobs
        .into_par_iter()
        .map(|(task, old_ref, new_ref, old, new)| {
            let c = classify_pair(r, task, &old, &new, context);
            let warning = c.fallback.map(|m| format!("{old_ref} vs {new_ref}: {m}; used label {}", c.label));
            (ReconcileDecision { task, old_ref, new_ref, label: c.label }, warning)
        })
        .collect();
    let mut out = Classification::default();
    for (d, w) in results {
        out.decisions.push(d);
        out.warnings.extend(w);
    }
    Ok(out)
}
