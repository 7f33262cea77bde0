//! Deterministic merge of one alias-resolved instance into the consensus,
//! driven entirely by pairwise decisions.
//!
//! A new element with any keep-old vote is a duplicate and is dropped; its
//! other votes are void. Otherwise it is inserted, replacing every old
//! element it voted replace on, or alongside them (keep-both, or no partner
//! at all). An old element is removed iff an inserted element replaces it.
//! Edges that touched a replaced node are re-pointed to its replacement.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::decision::{ElementKey, ReconcileDecision, Task};
use super::pairs::CandidatePairSet;
use crate::error::MergeError;
use crate::memory::{HistoryEvent, MergeRecord, WorkingMemory};
use crate::model::{
    validate_instance, EdgeKey, NodeId, PredicateEdge, QuestionNode, QuestionStatus, SemanticNode, WorkspaceInstance,
};

/// Where a consensus element came from in one merge step.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "fate")]
pub enum Lineage {
    Retained,
    /// Retained old edge whose endpoint was replaced.
    Repointed { from: EdgeKey },
    Inserted,
    Replacing { replaced: Vec<ElementKey> },
}

#[derive(Clone, Debug)]
pub struct MergeOutcome {
    pub consensus: WorkspaceInstance,
    pub resolved: Vec<String>,
    pub lineage: Vec<(ElementKey, Lineage)>,
    pub warnings: Vec<String>,
}

enum Fate<'a> {
    Insert(Vec<&'a ElementKey>),
    Drop(Option<&'a ElementKey>),
}

/// Keep-old beats replace beats keep-both for the new element.
fn fate<'a>(votes: Option<&Vec<(&'a ElementKey, u8)>>, own: &ElementKey) -> Fate<'a> {
    let Some(votes) = votes else { return Fate::Insert(Vec::new()) };
    let keep_old: Vec<&ElementKey> = votes.iter().filter(|(_, l)| *l == 0).map(|(k, _)| *k).collect();
    if !keep_old.is_empty() {
        let partner = keep_old.iter().find(|k| **k == own).or_else(|| keep_old.iter().min()).copied();
        return Fate::Drop(partner);
    }
    Fate::Insert(votes.iter().filter(|(_, l)| *l == 1).map(|(k, _)| *k).collect())
}

fn check(
    memory: &WorkingMemory,
    w: &WorkspaceInstance,
    decisions: &[ReconcileDecision],
    pairs: &CandidatePairSet,
) -> Result<(), MergeError> {
    if w.situation != memory.consensus.situation && !w.nodes.is_empty() {
        return Err(MergeError::SituationMismatch {
            memory: memory.consensus.situation.to_string(),
            new: w.situation.to_string(),
        });
    }
    let mut expected = pairs.triples();
    let mut got: Vec<(Task, ElementKey, ElementKey)> = Vec::with_capacity(decisions.len());
    for d in decisions {
        d.task.check_label(d.label)?;
        let kinds_ok = matches!(
            (d.task, &d.old_ref, &d.new_ref),
            (Task::RecNode, ElementKey::Node(_), ElementKey::Node(_))
                | (Task::RecEdge, ElementKey::Edge(_), ElementKey::Edge(_))
                | (Task::Qr, ElementKey::Question(_), ElementKey::Node(_) | ElementKey::Edge(_))
        );
        if !kinds_ok {
            return Err(MergeError::DecisionMismatch(format!(
                "{} decision on {} / {}",
                d.task, d.old_ref, d.new_ref
            )));
        }
        got.push((d.task, d.old_ref.clone(), d.new_ref.clone()));
    }
    expected.sort();
    got.sort();
    if expected != got {
        let detail = match expected.iter().zip(&got).find(|(a, b)| a != b) {
            Some(((t, o, n), _)) => format!("first differing pair: {t} {o} / {n}"),
            None => format!("{} pairs but {} decisions", expected.len(), got.len()),
        };
        return Err(MergeError::DecisionMismatch(detail));
    }
    for d in decisions {
        let old_ok = match &d.old_ref {
            ElementKey::Node(id) => memory.consensus.node(id).is_some(),
            ElementKey::Edge(k) => memory.consensus.edge(k).is_some(),
            ElementKey::Question(q) => memory.consensus.question(q).is_some(),
        };
        if !old_ok {
            return Err(MergeError::UnknownElement(format!("old {}", d.old_ref)));
        }
        let new_ok = match &d.new_ref {
            ElementKey::Node(id) => w.node(id).is_some(),
            ElementKey::Edge(k) => w.edge(k).is_some(),
            ElementKey::Question(_) => false,
        };
        if !new_ok {
            return Err(MergeError::UnknownElement(format!("new {}", d.new_ref)));
        }
    }
    Ok(())
}

/// Computes the merged consensus without touching `memory`.
pub fn merge_outcome(
    memory: &WorkingMemory,
    w: &WorkspaceInstance,
    decisions: &[ReconcileDecision],
    pairs: &CandidatePairSet,
) -> Result<MergeOutcome, MergeError> {
    check(memory, w, decisions, pairs)?;
    let old = &memory.consensus;
    let mut warnings = Vec::new();

    // REC votes per new element; QR replace means the question is resolved
    let mut old_replaced: BTreeSet<&ElementKey> = BTreeSet::new();
    let mut new_votes: BTreeMap<&ElementKey, Vec<(&ElementKey, u8)>> = BTreeMap::new();
    for d in decisions {
        if d.task.is_rec() {
            new_votes.entry(&d.new_ref).or_default().push((&d.old_ref, d.label));
        } else if d.label == 1 {
            old_replaced.insert(&d.old_ref);
        }
    }
    for key in w
        .nodes
        .iter()
        .map(|n| ElementKey::Node(n.id.clone()))
        .chain(w.edges.iter().map(|e| ElementKey::Edge(e.key())))
    {
        if let Fate::Insert(replaced) = fate(new_votes.get(&key), &key) {
            old_replaced.extend(replaced);
        }
    }

    // nodes
    let mut nodes: BTreeMap<NodeId, SemanticNode> = BTreeMap::new();
    let mut lineage: BTreeMap<ElementKey, Lineage> = BTreeMap::new();
    for n in &old.nodes {
        let key = ElementKey::Node(n.id.clone());
        if !old_replaced.contains(&key) {
            nodes.insert(n.id.clone(), n.clone());
            lineage.insert(key, Lineage::Retained);
        }
    }
    let mut new_to_final: BTreeMap<NodeId, NodeId> = BTreeMap::new();
    let mut replacers: BTreeMap<NodeId, Vec<NodeId>> = BTreeMap::new();
    for n in &w.nodes {
        let key = ElementKey::Node(n.id.clone());
        match fate(new_votes.get(&key), &key) {
            Fate::Drop(partner) => {
                if let Some(ElementKey::Node(p)) = partner {
                    new_to_final.insert(n.id.clone(), p.clone());
                }
            }
            Fate::Insert(replaced) => {
                let final_id = place_node(&mut nodes, n);
                if let Some(final_id) = &final_id {
                    let entry = if replaced.is_empty() {
                        Lineage::Inserted
                    } else {
                        Lineage::Replacing { replaced: replaced.iter().map(|k| (*k).clone()).collect() }
                    };
                    lineage.insert(ElementKey::Node(final_id.clone()), entry);
                }
                let final_id = final_id.unwrap_or_else(|| dedupe_target(&nodes, n));
                for r in replaced {
                    if let ElementKey::Node(o) = r {
                        replacers.entry(o.clone()).or_default().push(final_id.clone());
                    }
                }
                new_to_final.insert(n.id.clone(), final_id);
            }
        }
    }
    let resolve = |id: &NodeId| -> Option<NodeId> {
        if nodes.contains_key(id) {
            return Some(id.clone());
        }
        let candidates = replacers.get(id)?;
        let pick = candidates
            .iter()
            .find(|c| *c == id)
            .or_else(|| candidates.iter().filter(|c| c.base_part() == id.base_part()).min())
            .or_else(|| candidates.iter().min())?;
        nodes.contains_key(pick).then(|| pick.clone())
    };

    // edges
    let mut edges: BTreeMap<EdgeKey, PredicateEdge> = BTreeMap::new();
    let mut place_edge = |e: PredicateEdge, origin: &EdgeKey, entry: Lineage, warnings: &mut Vec<String>| {
        let (Some(source), Some(target)) = (resolve(&e.source), resolve(&e.target)) else {
            warnings.push(format!("dropped dangling edge {origin}"));
            return;
        };
        if source == target {
            warnings.push(format!("dropped edge {origin}: endpoints collapsed into {source}"));
            return;
        }
        let moved = source != e.source || target != e.target;
        let e = PredicateEdge { source, target, ..e };
        let key = e.key();
        if edges.contains_key(&key) {
            if moved {
                warnings.push(format!("dropped edge {origin}: duplicates {key}"));
            }
            return;
        }
        let entry = match entry {
            Lineage::Retained if moved => Lineage::Repointed { from: origin.clone() },
            other => other,
        };
        lineage.insert(ElementKey::Edge(key.clone()), entry);
        edges.insert(key, e);
    };
    for e in &old.edges {
        let key = e.key();
        if !old_replaced.contains(&ElementKey::Edge(key.clone())) {
            place_edge(e.clone(), &key, Lineage::Retained, &mut warnings);
        }
    }
    for e in &w.edges {
        let key = e.key();
        let ek = ElementKey::Edge(key.clone());
        if let Fate::Insert(replaced) = fate(new_votes.get(&ek), &ek) {
            let (Some(source), Some(target)) = (new_to_final.get(&e.source), new_to_final.get(&e.target)) else {
                warnings.push(format!("dropped edge {key}: endpoint was not merged"));
                continue;
            };
            let mapped = PredicateEdge { source: source.clone(), target: target.clone(), ..e.clone() };
            let entry = if replaced.is_empty() {
                Lineage::Inserted
            } else {
                Lineage::Replacing { replaced: replaced.into_iter().cloned().collect() }
            };
            place_edge(mapped, &key, entry, &mut warnings);
        }
    }

    // questions
    let mut resolved = Vec::new();
    let mut questions: Vec<QuestionNode> = Vec::new();
    for q in &old.questions {
        if old_replaced.contains(&ElementKey::Question(q.text.clone())) {
            resolved.push(q.text.clone());
        } else {
            questions.push(q.clone());
            lineage.insert(ElementKey::Question(q.text.clone()), Lineage::Retained);
        }
    }
    for q in &w.questions {
        let seen = memory.resolved.contains(&q.text)
            || resolved.contains(&q.text)
            || questions.iter().any(|have| have.text == q.text);
        if !seen {
            questions.push(QuestionNode { status: QuestionStatus::Open, ..q.clone() });
            lineage.insert(ElementKey::Question(q.text.clone()), Lineage::Inserted);
        }
    }

    let mut consensus = WorkspaceInstance {
        situation: old.situation.clone(),
        segment: w.segment.max(old.segment),
        nodes: nodes.into_values().collect(),
        edges: edges.into_values().collect(),
        questions,
    };
    for n in &mut consensus.nodes {
        if let Some(forms) = memory.actor_forms.get(&n.actor.id) {
            for f in forms {
                n.actor.add_form(f);
            }
        }
    }
    consensus.reanchor(&memory.actor_forms);
    consensus.canonicalize();
    let violations = validate_instance(&consensus);
    debug_assert!(violations.is_empty(), "merge broke invariants: {violations:?}");
    warnings.extend(violations.iter().map(|v| format!("merged consensus: {v}")));

    Ok(MergeOutcome { consensus, resolved, lineage: lineage.into_iter().collect(), warnings })
}

/// Picks the id a new node gets in `nodes` and inserts it, or returns None
/// when an identical node (same actor, role and state) is already there.
fn place_node(nodes: &mut BTreeMap<NodeId, SemanticNode>, n: &SemanticNode) -> Option<NodeId> {
    let base = n.id.base_part().to_string();
    let mut top = 0;
    for (id, have) in nodes.iter() {
        if id.base_part() == base {
            if have.state == n.state {
                return None;
            }
            top = top.max(id.suffix());
        }
    }
    let id = if !nodes.contains_key(&n.id) {
        n.id.clone()
    } else {
        n.id.with_suffix(top + 1)
    };
    nodes.insert(id.clone(), SemanticNode { id: id.clone(), ..n.clone() });
    Some(id)
}

fn dedupe_target(nodes: &BTreeMap<NodeId, SemanticNode>, n: &SemanticNode) -> NodeId {
    nodes
        .values()
        .find(|have| have.id.base_part() == n.id.base_part() && have.state == n.state)
        .map(|have| have.id.clone())
        .expect("dedupe target exists")
}

/// Applies one merge step and appends it to the history. On error the
/// memory is left untouched. Returns the step's warnings.
pub fn merge_in_place(
    memory: &mut WorkingMemory,
    w: &WorkspaceInstance,
    decisions: &[ReconcileDecision],
    pairs: &CandidatePairSet,
) -> Result<Vec<String>, MergeError> {
    let outcome = merge_outcome(memory, w, decisions, pairs)?;
    memory.consensus = outcome.consensus;
    memory.resolved.extend(outcome.resolved.iter().cloned());
    memory.history.push(HistoryEvent::Merge(MergeRecord {
        segment: w.segment,
        instance: w.clone(),
        decisions: decisions.to_vec(),
        resolved: outcome.resolved,
        lineage: outcome.lineage,
        warnings: outcome.warnings.clone(),
    }));
    Ok(outcome.warnings)
}

/// Pure form of [`merge_in_place`].
pub fn merge(
    memory: &WorkingMemory,
    w: &WorkspaceInstance,
    decisions: &[ReconcileDecision],
    pairs: &CandidatePairSet,
) -> Result<WorkingMemory, MergeError> {
    let mut next = memory.clone();
    merge_in_place(&mut next, w, decisions, pairs)?;
    Ok(next)
}
