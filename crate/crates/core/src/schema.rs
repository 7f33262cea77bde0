//! Canonical JSON interchange for workspace instances.
//!
//! ```json
//! {"situation": "crime_and_justice", "segment": 1,
//!  "nodes": [{"actor": "johnathan miller", "role": "suspect", "state": "apprehended"}],
//!  "edges": [{"label": "apprehended by", "source": "johnathan miller",
//!             "target": "law enforcement officer", "attributes": "in downtown area"}],
//!  "questions": ["how did the law enforcement officers apprehend johnathan miller?"]}
//! ```
//!
//! Edge endpoints are written as the actor mention when the actor has a
//! single node, `mention#role` when the role disambiguates, and
//! `mention#role#state` otherwise. Provenance is not part of the format;
//! parsed elements take the instance's segment. Question order is preserved
//! on parse so that serialize -> parse -> serialize is a fixed point.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::model::{Actor, InstanceBuilder, NodeId, SemanticNode, SituationLabel, WorkspaceInstance};
use crate::text::{self, NONE};

/// Wire form of an instance or of a partial (per-stage) instance.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFragment {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub situation: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub segment: Option<u32>,
    #[serde(default)]
    pub nodes: Vec<NodeRecord>,
    #[serde(default)]
    pub edges: Vec<EdgeRecord>,
    #[serde(default)]
    pub questions: Vec<String>,
}

/// Role and state are absent while a staged generation has not reached them.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeRecord {
    pub actor: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub role: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeRecord {
    pub label: String,
    pub source: String,
    pub target: String,
    #[serde(default)]
    pub attributes: Option<String>,
}

impl InstanceFragment {
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty() && self.edges.is_empty() && self.questions.is_empty()
    }
}

/// Endpoint reference for `node` as written in the canonical format.
pub fn node_ref(w: &WorkspaceInstance, node: &SemanticNode) -> String {
    let same_actor = w.nodes_of(&node.actor.id).count();
    if same_actor <= 1 {
        return node.actor.mention().to_string();
    }
    let same_role = w
        .nodes_of(&node.actor.id)
        .filter(|n| n.role == node.role)
        .count();
    if same_role <= 1 {
        format!("{}#{}", node.actor.mention(), node.role)
    } else {
        format!("{}#{}#{}", node.actor.mention(), node.role, node.state)
    }
}

pub fn to_fragment(w: &WorkspaceInstance) -> InstanceFragment {
    let mut nodes: Vec<&SemanticNode> = w.nodes.iter().collect();
    nodes.sort_by(|a, b| a.id.cmp(&b.id));
    let refs: BTreeMap<&NodeId, String> = w.nodes.iter().map(|n| (&n.id, node_ref(w, n))).collect();
    let endpoint = |id: &NodeId| refs.get(id).cloned().unwrap_or_else(|| id.to_string());
    let mut edges: Vec<_> = w.edges.iter().collect();
    edges.sort_by_key(|e| e.key());
    InstanceFragment {
        situation: Some(w.situation.to_string()),
        segment: Some(w.segment),
        nodes: nodes
            .into_iter()
            .map(|n| NodeRecord {
                actor: n.actor.mention().to_string(),
                role: Some(n.role.clone()),
                state: Some(n.state.clone()),
            })
            .collect(),
        edges: edges
            .into_iter()
            .map(|e| EdgeRecord {
                label: e.label.clone(),
                source: endpoint(&e.source),
                target: endpoint(&e.target),
                attributes: e.attributes.clone(),
            })
            .collect(),
        questions: w.questions.iter().map(|q| q.text.clone()).collect(),
    }
}

/// Compact canonical JSON. Byte-stable for equal instances.
pub fn to_canonical_json(w: &WorkspaceInstance) -> String {
    serde_json::to_string(&to_fragment(w)).expect("fragment serialization is infallible")
}

pub fn to_canonical_json_pretty(w: &WorkspaceInstance) -> String {
    serde_json::to_string_pretty(&to_fragment(w)).expect("fragment serialization is infallible")
}

/// Result of turning a fragment into a validated-shape instance.
#[derive(Debug, Clone)]
pub struct Assembled {
    pub instance: WorkspaceInstance,
    pub warnings: Vec<String>,
}

/// Builds an instance from a fragment. Missing roles/states become `none`
/// (negative samples are kept; scrubbing is the operator's job). Unresolvable
/// edges and unparseable elements are dropped with a warning.
pub fn from_fragment(
    frag: &InstanceFragment,
    default_situation: &SituationLabel,
    default_segment: u32,
) -> Assembled {
    let mut warnings = Vec::new();
    let situation = match frag.situation.as_deref().map(SituationLabel::new) {
        Some(Ok(s)) => s,
        Some(Err(e)) => {
            warnings.push(format!("{e}; using {default_situation}"));
            default_situation.clone()
        }
        None => default_situation.clone(),
    };
    let segment = frag.segment.unwrap_or(default_segment);
    let provenance = segment.max(1);
    let mut b = InstanceBuilder::new(situation.clone(), segment);

    for rec in &frag.nodes {
        let actor = match Actor::new(&rec.actor, &situation) {
            Ok(a) => a,
            Err(e) => {
                warnings.push(format!("dropped node: {e}"));
                continue;
            }
        };
        let role = lexeme(rec.role.as_deref());
        let state = lexeme(rec.state.as_deref());
        b.add_node(&actor, &role, &state, provenance);
    }

    let resolver = RefResolver::new(b.nodes());
    for rec in &frag.edges {
        let label = lexeme(Some(&rec.label));
        let (Some(source), Some(target)) = (resolver.resolve(&rec.source), resolver.resolve(&rec.target))
        else {
            warnings.push(format!(
                "dropped edge {:?}: unresolved endpoint {:?} -> {:?}",
                rec.label, rec.source, rec.target
            ));
            continue;
        };
        let attributes = text::normalize_attributes(rec.attributes.as_deref());
        b.add_edge(&source, &label, &target, attributes, provenance);
    }

    for q in &frag.questions {
        match text::normalize_question(q) {
            Ok(q) => {
                b.add_question(&q, provenance);
            }
            Err(e) => warnings.push(format!("dropped question: {e}")),
        }
    }

    let (instance, builder_warnings) = b.build();
    warnings.extend(builder_warnings);
    Assembled { instance, warnings }
}

fn lexeme(raw: Option<&str>) -> String {
    raw.and_then(|r| text::normalize_mention(r).ok())
        .unwrap_or_else(|| NONE.to_string())
}

/// Maps endpoint strings back to node ids.
struct RefResolver {
    exact: BTreeMap<String, NodeId>,
    by_mention: BTreeMap<String, NodeId>,
    by_stem: BTreeMap<String, NodeId>,
}

impl RefResolver {
    fn new(nodes: &[SemanticNode]) -> Self {
        let mut sorted: Vec<&SemanticNode> = nodes.iter().collect();
        sorted.sort_by(|a, b| a.id.cmp(&b.id));
        let mut exact = BTreeMap::new();
        let mut by_mention = BTreeMap::new();
        let mut by_stem = BTreeMap::new();
        for n in sorted {
            let m = n.actor.mention();
            exact
                .entry(format!("{m}#{}#{}", n.role, n.state))
                .or_insert_with(|| n.id.clone());
            exact.entry(format!("{m}#{}", n.role)).or_insert_with(|| n.id.clone());
            exact.entry(n.local_key().to_string()).or_insert_with(|| n.id.clone());
            by_mention.entry(m.to_string()).or_insert_with(|| n.id.clone());
            by_stem.entry(stem_key(m)).or_insert_with(|| n.id.clone());
        }
        RefResolver { exact, by_mention, by_stem }
    }

    fn resolve(&self, raw: &str) -> Option<NodeId> {
        let trimmed = raw.trim().to_lowercase();
        if let Some(id) = self.by_mention.get(&trimmed).or_else(|| self.exact.get(&trimmed)) {
            return Some(id.clone());
        }
        let norm = text::normalize_mention(raw).ok()?;
        self.by_mention
            .get(&norm)
            .or_else(|| self.exact.get(&norm))
            .or_else(|| self.by_stem.get(&stem_key(&norm)))
            .cloned()
    }
}

fn stem_key(mention: &str) -> String {
    text::tokens(mention)
        .iter()
        .map(|t| text::stem(t))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Strict parse of canonical JSON into an instance.
pub fn parse_canonical(json: &str, default_situation: &SituationLabel) -> Result<Assembled, serde_json::Error> {
    let frag: InstanceFragment = serde_json::from_str(json)?;
    Ok(from_fragment(&frag, default_situation, frag.segment.unwrap_or(1)))
}
