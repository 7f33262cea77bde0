//! Candidate pair proposal. Pairs are actor-keyed: a node is only compared
//! with nodes of the same canonical actor, an edge only with edges between
//! the same two actors.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::decision::{ElementKey, ReconcileDecision, Task};
use crate::memory::WorkingMemory;
use crate::model::{subgraph_by_actors, ActorId, EdgeKey, NodeId, QuestionStatus, WorkspaceInstance};

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidatePairSet {
    /// (old, new)
    pub node_pairs: Vec<(NodeId, NodeId)>,
    pub edge_pairs: Vec<(EdgeKey, EdgeKey)>,
    /// (open question, new node or edge)
    pub question_checks: Vec<(String, ElementKey)>,
    /// New nodes and edges with no candidate partner.
    pub unmatched_new: Vec<ElementKey>,
}

impl CandidatePairSet {
    pub fn len(&self) -> usize {
        self.node_pairs.len() + self.edge_pairs.len() + self.question_checks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Every pair as (task, old, new), in classification order.
    pub fn triples(&self) -> Vec<(Task, ElementKey, ElementKey)> {
        let nodes = self
            .node_pairs
            .iter()
            .map(|(o, n)| (Task::RecNode, ElementKey::Node(o.clone()), ElementKey::Node(n.clone())));
        let edges = self
            .edge_pairs
            .iter()
            .map(|(o, n)| (Task::RecEdge, ElementKey::Edge(o.clone()), ElementKey::Edge(n.clone())));
        let questions = self
            .question_checks
            .iter()
            .map(|(q, n)| (Task::Qr, ElementKey::Question(q.clone()), n.clone()));
        nodes.chain(edges).chain(questions).collect()
    }

    /// Reconstructs the pair set a list of decisions was made over.
    pub fn from_decisions(decisions: &[ReconcileDecision], w: &WorkspaceInstance) -> Self {
        let mut set = CandidatePairSet::default();
        let mut paired = BTreeSet::new();
        for d in decisions {
            match (d.task, &d.old_ref, &d.new_ref) {
                (Task::RecNode, ElementKey::Node(o), ElementKey::Node(n)) => {
                    set.node_pairs.push((o.clone(), n.clone()));
                    paired.insert(d.new_ref.clone());
                }
                (Task::RecEdge, ElementKey::Edge(o), ElementKey::Edge(n)) => {
                    set.edge_pairs.push((o.clone(), n.clone()));
                    paired.insert(d.new_ref.clone());
                }
                (Task::Qr, ElementKey::Question(q), new) => {
                    set.question_checks.push((q.clone(), new.clone()));
                }
                // Malformed decisions are left out so that merge reports
                // the mismatch.
                _ => {}
            }
        }
        set.unmatched_new = unmatched(w, &paired);
        set
    }
}

fn unmatched(w: &WorkspaceInstance, paired: &BTreeSet<ElementKey>) -> Vec<ElementKey> {
    w.nodes
        .iter()
        .map(|n| ElementKey::Node(n.id.clone()))
        .chain(w.edges.iter().map(|e| ElementKey::Edge(e.key())))
        .filter(|k| !paired.contains(k))
        .collect()
}

fn endpoint_actors(w: &WorkspaceInstance) -> impl Fn(&EdgeKey) -> Option<(ActorId, ActorId)> + '_ {
    let actor_of: BTreeMap<&NodeId, &ActorId> = w.nodes.iter().map(|n| (&n.id, &n.actor.id)).collect();
    move |k: &EdgeKey| {
        Some(((*actor_of.get(&k.source)?).clone(), (*actor_of.get(&k.target)?).clone()))
    }
}

type Signature = (String, String, String, String);

/// Id-free content of each node and edge, for spotting verbatim repeats.
fn signatures(w: &WorkspaceInstance) -> Vec<(ElementKey, Signature)> {
    let idx = w.node_index();
    let node_sig = |id: &NodeId| idx.get(id).map(|n| format!("{}|{}|{}", n.actor.id, n.role, n.state));
    let mut out: Vec<(ElementKey, Signature)> = w
        .nodes
        .iter()
        .map(|n| {
            let sig = (n.actor.id.to_string(), n.role.clone(), n.state.clone(), String::new());
            (ElementKey::Node(n.id.clone()), sig)
        })
        .collect();
    for e in &w.edges {
        let ends = format!("{}>{}", node_sig(&e.source).unwrap_or_default(), node_sig(&e.target).unwrap_or_default());
        let sig = ("edge".to_string(), e.label.clone(), e.attributes.clone().unwrap_or_default(), ends);
        out.push((ElementKey::Edge(e.key()), sig));
    }
    out
}

/// Candidate pairs between the consensus and an alias-resolved instance.
/// With `prune`, old candidates come from the `hops`-neighbourhood of the
/// instance's actors instead of the whole consensus.
pub fn propose_pairs(memory: &WorkingMemory, w: &WorkspaceInstance, prune: bool, hops: usize) -> CandidatePairSet {
    let new_actors = w.actor_ids();
    let pruned;
    let old: &WorkspaceInstance = if prune {
        pruned = subgraph_by_actors(&memory.consensus, &new_actors, hops);
        &pruned
    } else {
        &memory.consensus
    };

    let mut set = CandidatePairSet::default();
    let mut paired = BTreeSet::new();

    let mut old_by_actor: BTreeMap<&ActorId, Vec<&NodeId>> = BTreeMap::new();
    for n in &old.nodes {
        old_by_actor.entry(&n.actor.id).or_default().push(&n.id);
    }
    for n in &w.nodes {
        for o in old_by_actor.get(&n.actor.id).into_iter().flatten() {
            set.node_pairs.push(((*o).clone(), n.id.clone()));
            paired.insert(ElementKey::Node(n.id.clone()));
        }
    }

    let old_ends = endpoint_actors(old);
    let mut old_by_ends: BTreeMap<(ActorId, ActorId), Vec<EdgeKey>> = BTreeMap::new();
    for e in &old.edges {
        let k = e.key();
        if let Some(ends) = old_ends(&k) {
            old_by_ends.entry(ends).or_default().push(k);
        }
    }
    let new_ends = endpoint_actors(w);
    for e in &w.edges {
        let k = e.key();
        let Some(ends) = new_ends(&k) else { continue };
        for o in old_by_ends.get(&ends).into_iter().flatten() {
            set.edge_pairs.push((o.clone(), k.clone()));
            paired.insert(ElementKey::Edge(k.clone()));
        }
    }

    // only new information can answer a question: elements already in the
    // consensus verbatim are not evidence
    let known: BTreeSet<Signature> = signatures(&memory.consensus).into_iter().map(|(_, sig)| sig).collect();
    let evidence: Vec<ElementKey> =
        signatures(w).into_iter().filter(|(_, sig)| !known.contains(sig)).map(|(k, _)| k).collect();
    for q in &old.questions {
        if q.status == QuestionStatus::Open && q.anchors.iter().any(|a| new_actors.contains(a)) {
            for k in &evidence {
                set.question_checks.push((q.text.clone(), k.clone()));
            }
        }
    }

    set.unmatched_new = unmatched(w, &paired);
    set
}
