//! Workspace graph data model: actors, role/state nodes, predicate edges and
//! open questions, plus the pure graph operations shared by the rest of the
//! crate.
//!
//! Identity rules:
//! - an actor's id is `"{situation}:{canonical mention}"`;
//! - a node's id is `"{actor id}#{role}"`, with a `~k` suffix (k >= 2) when
//!   the same actor holds the same role with several states.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{EmptyMention, ModelError};
use crate::text::{self, NONE};

/// Coarse scenario label conditioning generation (e.g. `crime_and_justice`).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct SituationLabel(String);

impl SituationLabel {
    pub const KNOWN: [&'static str; 5] = [
        "crime_and_justice",
        "fire_fighting",
        "technology_development",
        "healthcare",
        "economy",
    ];

    pub fn new(value: impl Into<String>) -> Result<Self, ModelError> {
        let value = value.into();
        let valid = value
            .chars()
            .next()
            .is_some_and(|c| c.is_ascii_lowercase())
            && value
                .chars()
                .all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
            && !value.ends_with('_')
            && !value.contains("__");
        if valid {
            Ok(SituationLabel(value))
        } else {
            Err(ModelError::InvalidSituation(value))
        }
    }

    /// Accepts human spellings such as `"Crime and Justice"`.
    pub fn parse_loose(raw: &str) -> Result<Self, ModelError> {
        let snake = text::tokens(raw).join("_");
        Self::new(snake).map_err(|_| ModelError::InvalidSituation(raw.to_string()))
    }

    pub fn crime_and_justice() -> Self {
        SituationLabel(Self::KNOWN[0].to_string())
    }

    pub fn fire_fighting() -> Self {
        SituationLabel(Self::KNOWN[1].to_string())
    }

    pub fn is_known(&self) -> bool {
        Self::KNOWN.contains(&self.0.as_str())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for SituationLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl FromStr for SituationLabel {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::new(s)
    }
}

impl TryFrom<String> for SituationLabel {
    type Error = ModelError;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        Self::new(value)
    }
}

impl From<SituationLabel> for String {
    fn from(value: SituationLabel) -> Self {
        value.0
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ActorId(String);

impl ActorId {
    /// `mention` must already be normalized.
    pub fn for_mention(mention: &str, situation: &SituationLabel) -> Self {
        ActorId(format!("{situation}:{mention}"))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ActorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Node key. Ordered by base string, then numerically by state suffix, so
/// `x#r` < `x#r~2` < `x#r~10`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(String);

impl NodeId {
    pub fn base(actor: &ActorId, role: &str) -> Self {
        NodeId(format!("{actor}#{role}"))
    }

    pub fn with_suffix(&self, k: u32) -> Self {
        let base = self.base_part();
        if k <= 1 {
            NodeId(base.to_string())
        } else {
            NodeId(format!("{base}~{k}"))
        }
    }

    pub fn base_part(&self) -> &str {
        self.split().0
    }

    pub fn suffix(&self) -> u32 {
        self.split().1
    }

    fn split(&self) -> (&str, u32) {
        if let Some((base, raw)) = self.0.rsplit_once('~') {
            if let Ok(k) = raw.parse::<u32>() {
                if k >= 2 && raw == k.to_string() {
                    return (base, k);
                }
            }
        }
        (&self.0, 1)
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl Ord for NodeId {
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, ka) = self.split();
        let (b, kb) = other.split();
        a.cmp(b).then(ka.cmp(&kb)).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for NodeId {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A tracked entity. Identity (equality, ordering, hashing) is the canonical
/// id alone; `surface_forms[0]` is the canonical mention.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Actor {
    pub id: ActorId,
    pub surface_forms: Vec<String>,
    pub situation: SituationLabel,
}

impl Actor {
    pub fn new(mention: &str, situation: &SituationLabel) -> Result<Self, EmptyMention> {
        let mention = text::normalize_mention(mention)?;
        Ok(Actor {
            id: ActorId::for_mention(&mention, situation),
            surface_forms: vec![mention],
            situation: situation.clone(),
        })
    }

    pub fn mention(&self) -> &str {
        &self.surface_forms[0]
    }

    /// Adds a normalized alias form; no-op for duplicates.
    pub fn add_form(&mut self, form: &str) {
        if !self.surface_forms.iter().any(|f| f == form) {
            self.surface_forms.push(form.to_string());
        }
    }
}

impl PartialEq for Actor {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id
    }
}

impl Eq for Actor {}

impl std::hash::Hash for Actor {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.id.hash(state);
    }
}

impl PartialOrd for Actor {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Actor {
    fn cmp(&self, other: &Self) -> Ordering {
        self.id.cmp(&other.id)
    }
}

/// One actor-role-state triple.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SemanticNode {
    pub id: NodeId,
    pub actor: Actor,
    pub role: String,
    pub state: String,
    pub provenance: u32,
}

impl SemanticNode {
    /// Negative samples carry the `none` sentinel as role or state and are
    /// dropped before an instance leaves the operator.
    pub fn is_negative(&self) -> bool {
        self.role == NONE || self.state == NONE
    }

    /// Node id without the situation prefix: `"mention#role[~k]"`.
    pub fn local_key(&self) -> &str {
        let prefix_len = self.actor.situation.as_str().len() + 1;
        &self.id.as_str()[prefix_len..]
    }

    /// Text used for token-overlap checks.
    pub fn text(&self) -> String {
        format!("{} {} {}", self.actor.mention(), self.role, self.state)
    }
}

/// Builds a node; `role` and `state` must be normalized or `"none"`.
pub fn make_node(actor: &Actor, role: &str, state: &str, seg: u32) -> SemanticNode {
    SemanticNode {
        id: NodeId::base(&actor.id, role),
        actor: actor.clone(),
        role: role.to_string(),
        state: state.to_string(),
        provenance: seg,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EdgeKey {
    pub source: NodeId,
    pub label: String,
    pub target: NodeId,
}

impl fmt::Display for EdgeKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -[{}]-> {}", self.source, self.label, self.target)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredicateEdge {
    pub source: NodeId,
    pub label: String,
    pub target: NodeId,
    pub attributes: Option<String>,
    pub provenance: u32,
}

impl PredicateEdge {
    pub fn key(&self) -> EdgeKey {
        EdgeKey {
            source: self.source.clone(),
            label: self.label.clone(),
            target: self.target.clone(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuestionStatus {
    Open,
    Resolved,
}

/// An unresolved question held as a placeholder for future semantics.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuestionNode {
    pub text: String,
    pub anchors: BTreeSet<ActorId>,
    pub status: QuestionStatus,
    pub provenance: u32,
}

/// Actors whose surface forms all occur (plural-folded) in the question.
pub fn compute_anchors<'a>(
    question: &str,
    actors: impl IntoIterator<Item = (&'a ActorId, &'a [String])>,
) -> BTreeSet<ActorId> {
    let q = text::stemmed_content_tokens(question);
    let mut out = BTreeSet::new();
    for (id, forms) in actors {
        let hit = forms.iter().any(|form| {
            let toks = text::stemmed_content_tokens(form);
            !toks.is_empty() && toks.is_subset(&q)
        });
        if hit {
            out.insert(id.clone());
        }
    }
    out
}

/// One operator output (or the consensus built from many).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorkspaceInstance {
    pub situation: SituationLabel,
    pub segment: u32,
    pub nodes: Vec<SemanticNode>,
    pub edges: Vec<PredicateEdge>,
    pub questions: Vec<QuestionNode>,
}

impl WorkspaceInstance {
    pub fn empty(situation: SituationLabel, segment: u32) -> Self {
        WorkspaceInstance {
            situation,
            segment,
            nodes: Vec::new(),
            edges: Vec::new(),
            questions: Vec::new(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty() && self.edges.is_empty() && self.questions.is_empty()
    }

    pub fn node(&self, id: &NodeId) -> Option<&SemanticNode> {
        self.nodes.iter().find(|n| &n.id == id)
    }

    pub fn edge(&self, key: &EdgeKey) -> Option<&PredicateEdge> {
        self.edges
            .iter()
            .find(|e| e.source == key.source && e.label == key.label && e.target == key.target)
    }

    pub fn question(&self, text: &str) -> Option<&QuestionNode> {
        self.questions.iter().find(|q| q.text == text)
    }

    pub fn node_index(&self) -> BTreeMap<&NodeId, &SemanticNode> {
        self.nodes.iter().map(|n| (&n.id, n)).collect()
    }

    pub fn actors(&self) -> BTreeMap<ActorId, &Actor> {
        self.nodes
            .iter()
            .map(|n| (n.actor.id.clone(), &n.actor))
            .collect()
    }

    pub fn actor_ids(&self) -> BTreeSet<ActorId> {
        self.nodes.iter().map(|n| n.actor.id.clone()).collect()
    }

    pub fn nodes_of<'a>(&'a self, actor: &'a ActorId) -> impl Iterator<Item = &'a SemanticNode> {
        self.nodes.iter().filter(move |n| &n.actor.id == actor)
    }

    /// Nodes by id, edges by key, questions by provenance then text.
    pub fn canonicalize(&mut self) {
        self.nodes.sort_by(|a, b| a.id.cmp(&b.id));
        self.edges.sort_by_key(|e| e.key());
        self.questions
            .sort_by(|a, b| a.provenance.cmp(&b.provenance).then_with(|| a.text.cmp(&b.text)));
    }

    /// Recomputes question anchors from the actors present in this instance,
    /// using each actor's own surface forms plus any `extra_forms`.
    pub fn reanchor(&mut self, extra_forms: &BTreeMap<ActorId, Vec<String>>) {
        let mut forms: BTreeMap<ActorId, Vec<String>> = BTreeMap::new();
        for node in &self.nodes {
            let entry = forms.entry(node.actor.id.clone()).or_default();
            for f in &node.actor.surface_forms {
                if !entry.contains(f) {
                    entry.push(f.clone());
                }
            }
            if let Some(extra) = extra_forms.get(&node.actor.id) {
                for f in extra {
                    if !entry.contains(f) {
                        entry.push(f.clone());
                    }
                }
            }
        }
        for q in &mut self.questions {
            q.anchors = compute_anchors(&q.text, forms.iter().map(|(k, v)| (k, v.as_slice())));
        }
    }

    pub fn validate(&self) -> Vec<Violation> {
        validate_instance(self)
    }
}

/// A broken invariant, naming the element and the rule.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    DuplicateNode(NodeId),
    NodeIdMismatch { id: NodeId, expected_base: String },
    ActorIdMismatch { actor: ActorId, mention: String },
    ActorSituationMismatch { actor: ActorId },
    Unnormalized { element: String, field: &'static str, value: String },
    ZeroProvenance { element: String },
    DanglingEdge { edge: EdgeKey, endpoint: NodeId },
    SelfLoop(EdgeKey),
    DuplicateEdge(EdgeKey),
    NotAQuestion(String),
    DuplicateQuestion(String),
    UnknownAnchor { question: String, actor: ActorId },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DuplicateNode(id) => write!(f, "duplicate node {id}"),
            Violation::NodeIdMismatch { id, expected_base } => {
                write!(f, "node id {id} does not derive from {expected_base}")
            }
            Violation::ActorIdMismatch { actor, mention } => {
                write!(f, "actor id {actor} does not derive from mention {mention:?}")
            }
            Violation::ActorSituationMismatch { actor } => {
                write!(f, "actor {actor} belongs to a different situation")
            }
            Violation::Unnormalized { element, field, value } => {
                write!(f, "{element}: {field} {value:?} is empty or not normalized")
            }
            Violation::ZeroProvenance { element } => {
                write!(f, "{element}: provenance must be >= 1")
            }
            Violation::DanglingEdge { edge, endpoint } => {
                write!(f, "dangling edge {edge}: missing node {endpoint}")
            }
            Violation::SelfLoop(edge) => write!(f, "self-loop edge {edge}"),
            Violation::DuplicateEdge(edge) => write!(f, "duplicate edge {edge}"),
            Violation::NotAQuestion(q) => write!(f, "question {q:?} is not a normalized question"),
            Violation::DuplicateQuestion(q) => write!(f, "duplicate question {q:?}"),
            Violation::UnknownAnchor { question, actor } => {
                write!(f, "question {question:?} anchors unknown actor {actor}")
            }
        }
    }
}

fn is_normalized_lexeme(s: &str) -> bool {
    s == NONE || text::normalize_mention(s).is_ok_and(|n| n == s)
}

/// Checks every type invariant. Total and side-effect free.
pub fn validate_instance(w: &WorkspaceInstance) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut ids = BTreeSet::new();
    for n in &w.nodes {
        let element = format!("node {}", n.id);
        if !ids.insert(&n.id) {
            out.push(Violation::DuplicateNode(n.id.clone()));
        }
        match n.actor.surface_forms.first() {
            Some(m) if is_normalized_lexeme(m) && m != NONE => {
                if n.actor.id != ActorId::for_mention(m, &n.actor.situation) {
                    out.push(Violation::ActorIdMismatch {
                        actor: n.actor.id.clone(),
                        mention: m.clone(),
                    });
                }
            }
            other => out.push(Violation::Unnormalized {
                element: element.clone(),
                field: "actor",
                value: other.cloned().unwrap_or_default(),
            }),
        }
        if n.actor.situation != w.situation {
            out.push(Violation::ActorSituationMismatch { actor: n.actor.id.clone() });
        }
        for (field, value) in [("role", &n.role), ("state", &n.state)] {
            if !is_normalized_lexeme(value) {
                out.push(Violation::Unnormalized {
                    element: element.clone(),
                    field,
                    value: value.clone(),
                });
            }
        }
        let expected = NodeId::base(&n.actor.id, &n.role);
        if n.id.base_part() != expected.as_str() {
            out.push(Violation::NodeIdMismatch {
                id: n.id.clone(),
                expected_base: expected.as_str().to_string(),
            });
        }
        if n.provenance == 0 {
            out.push(Violation::ZeroProvenance { element });
        }
    }

    let mut keys = BTreeSet::new();
    for e in &w.edges {
        let key = e.key();
        for endpoint in [&e.source, &e.target] {
            if !ids.contains(endpoint) {
                out.push(Violation::DanglingEdge { edge: key.clone(), endpoint: endpoint.clone() });
            }
        }
        if e.source == e.target {
            out.push(Violation::SelfLoop(key.clone()));
        }
        if !is_normalized_lexeme(&e.label) {
            out.push(Violation::Unnormalized {
                element: format!("edge {key}"),
                field: "label",
                value: e.label.clone(),
            });
        }
        if let Some(a) = &e.attributes {
            if text::normalize_attributes(Some(a)).as_deref() != Some(a.as_str()) {
                out.push(Violation::Unnormalized {
                    element: format!("edge {key}"),
                    field: "attributes",
                    value: a.clone(),
                });
            }
        }
        if e.provenance == 0 {
            out.push(Violation::ZeroProvenance { element: format!("edge {key}") });
        }
        if !keys.insert(key.clone()) {
            out.push(Violation::DuplicateEdge(key));
        }
    }

    let actors = w.actor_ids();
    let mut texts = BTreeSet::new();
    for q in &w.questions {
        if text::normalize_question(&q.text).ok().as_deref() != Some(q.text.as_str()) {
            out.push(Violation::NotAQuestion(q.text.clone()));
        }
        if !texts.insert(&q.text) {
            out.push(Violation::DuplicateQuestion(q.text.clone()));
        }
        for a in &q.anchors {
            if !actors.contains(a) {
                out.push(Violation::UnknownAnchor { question: q.text.clone(), actor: a.clone() });
            }
        }
        if q.provenance == 0 {
            out.push(Violation::ZeroProvenance { element: format!("question {:?}", q.text) });
        }
    }
    out
}

/// Soft findings that do not break invariants (currently: questions that
/// anchor no tracked actor).
pub fn instance_warnings(w: &WorkspaceInstance) -> Vec<String> {
    w.questions
        .iter()
        .filter(|q| q.anchors.is_empty())
        .map(|q| format!("question {:?} anchors no tracked actor", q.text))
        .collect()
}

/// Nodes of `actors`, everything reachable from them within `hops`
/// undirected edge steps, the induced edges, and the questions anchored on
/// any selected actor (anchors trimmed to the selection). Questions without
/// anchors are never selected.
pub fn subgraph_by_actors(
    w: &WorkspaceInstance,
    actors: &BTreeSet<ActorId>,
    hops: usize,
) -> WorkspaceInstance {
    let mut selected: BTreeSet<&NodeId> = w
        .nodes
        .iter()
        .filter(|n| actors.contains(&n.actor.id))
        .map(|n| &n.id)
        .collect();

    let mut adjacency: BTreeMap<&NodeId, Vec<&NodeId>> = BTreeMap::new();
    for e in &w.edges {
        adjacency.entry(&e.source).or_default().push(&e.target);
        adjacency.entry(&e.target).or_default().push(&e.source);
    }
    let mut frontier: VecDeque<(&NodeId, usize)> = selected.iter().map(|id| (*id, 0)).collect();
    while let Some((id, depth)) = frontier.pop_front() {
        if depth == hops {
            continue;
        }
        for next in adjacency.get(id).into_iter().flatten() {
            if selected.insert(next) {
                frontier.push_back((next, depth + 1));
            }
        }
    }

    let nodes: Vec<SemanticNode> = w
        .nodes
        .iter()
        .filter(|n| selected.contains(&n.id))
        .cloned()
        .collect();
    let selected_actors: BTreeSet<&ActorId> = nodes.iter().map(|n| &n.actor.id).collect();
    let edges = w
        .edges
        .iter()
        .filter(|e| selected.contains(&e.source) && selected.contains(&e.target))
        .cloned()
        .collect();
    let questions = w
        .questions
        .iter()
        .filter(|q| q.anchors.iter().any(|a| selected_actors.contains(a)))
        .map(|q| {
            let mut q = q.clone();
            q.anchors.retain(|a| selected_actors.contains(a));
            q
        })
        .collect();
    WorkspaceInstance {
        situation: w.situation.clone(),
        segment: w.segment,
        nodes,
        edges,
        questions,
    }
}

/// Incremental constructor that keeps the instance invariants: identical
/// triples collapse, extra states for an existing actor-role get a `~k`
/// suffix, and edges to unknown nodes or duplicate keys are refused.
#[derive(Debug)]
pub struct InstanceBuilder {
    instance: WorkspaceInstance,
    warnings: Vec<String>,
}

impl InstanceBuilder {
    pub fn new(situation: SituationLabel, segment: u32) -> Self {
        InstanceBuilder {
            instance: WorkspaceInstance::empty(situation, segment),
            warnings: Vec::new(),
        }
    }

    pub fn situation(&self) -> &SituationLabel {
        &self.instance.situation
    }

    pub fn nodes(&self) -> &[SemanticNode] {
        &self.instance.nodes
    }

    pub fn warn(&mut self, message: impl Into<String>) {
        self.warnings.push(message.into());
    }

    /// Returns the id the node ended up with (an existing one when the triple
    /// was already present).
    pub fn add_node(&mut self, actor: &Actor, role: &str, state: &str, provenance: u32) -> NodeId {
        let base = NodeId::base(&actor.id, role);
        let mut taken = 0;
        let mut existing = None;
        for n in &self.instance.nodes {
            if n.id.base_part() == base.as_str() {
                if n.state == state {
                    existing = Some(n.id.clone());
                    break;
                }
                taken = taken.max(n.id.suffix());
            }
        }
        if let Some(id) = existing {
            if let Some(node) = self.instance.nodes.iter_mut().find(|m| m.id == id) {
                for f in &actor.surface_forms {
                    node.actor.add_form(f);
                }
            }
            return id;
        }
        let id = if taken == 0 { base } else { base.with_suffix(taken + 1) };
        let mut node = make_node(actor, role, state, provenance);
        node.id = id.clone();
        self.instance.nodes.push(node);
        id
    }

    pub fn add_edge(
        &mut self,
        source: &NodeId,
        label: &str,
        target: &NodeId,
        attributes: Option<String>,
        provenance: u32,
    ) -> Option<EdgeKey> {
        if source == target {
            self.warn(format!("dropped self-loop edge {label:?} on {source}"));
            return None;
        }
        for endpoint in [source, target] {
            if self.instance.node(endpoint).is_none() {
                self.warn(format!("dropped edge {label:?}: unknown endpoint {endpoint}"));
                return None;
            }
        }
        let edge = PredicateEdge {
            source: source.clone(),
            label: label.to_string(),
            target: target.clone(),
            attributes,
            provenance,
        };
        let key = edge.key();
        if self.instance.edge(&key).is_some() {
            self.warn(format!("dropped duplicate edge {key}"));
            return None;
        }
        self.instance.edges.push(edge);
        Some(key)
    }

    /// Adds an open question; returns false for exact duplicates.
    pub fn add_question(&mut self, normalized: &str, provenance: u32) -> bool {
        if self.instance.question(normalized).is_some() {
            return false;
        }
        self.instance.questions.push(QuestionNode {
            text: normalized.to_string(),
            anchors: BTreeSet::new(),
            status: QuestionStatus::Open,
            provenance,
        });
        true
    }

    /// Finishes the instance. Nodes and edges are sorted; question order is
    /// kept as inserted.
    pub fn build(self) -> (WorkspaceInstance, Vec<String>) {
        let mut instance = self.instance;
        instance.nodes.sort_by(|a, b| a.id.cmp(&b.id));
        instance.edges.sort_by_key(|e| e.key());
        instance.reanchor(&BTreeMap::new());
        (instance, self.warnings)
    }
}
