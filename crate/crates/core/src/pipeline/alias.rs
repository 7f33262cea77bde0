//! Lexical actor alias resolution against the working memory.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::memory::{AliasEntry, WorkingMemory};
use crate::model::{Actor, ActorId, InstanceBuilder, NodeId, WorkspaceInstance};
use crate::text;

/// A fresh actor that plays the same role as a known one. The lexical rule
/// never merges these; they are kept for a semantic coreference pass.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorefCandidate {
    pub form: String,
    pub known: ActorId,
    pub shared_roles: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct AliasResolution {
    pub instance: WorkspaceInstance,
    /// Bindings to register before merging, fresh mentions first.
    pub entries: Vec<AliasEntry>,
    pub ambiguities: Vec<String>,
    pub coref_candidates: Vec<CorefCandidate>,
    pub warnings: Vec<String>,
}

enum Match {
    Known(ActorId),
    Fresh,
    Ambiguous(Vec<ActorId>),
}

fn token_set(form: &str) -> BTreeSet<String> {
    text::tokens(form).into_iter().collect()
}

/// Token-subset match in either direction, sharing at least one
/// non-stopword.
fn subset_match(a: &BTreeSet<String>, b: &BTreeSet<String>) -> bool {
    (a.is_subset(b) || b.is_subset(a)) && a.intersection(b).any(|t| !text::is_stopword(t))
}

fn match_form(memory: &WorkingMemory, form: &str) -> Match {
    if let Some(id) = memory.lookup_alias(form) {
        return Match::Known(id.clone());
    }
    let toks = token_set(form);
    let candidates: BTreeSet<&ActorId> = memory
        .actor_forms
        .iter()
        .filter(|(_, forms)| forms.iter().any(|f| subset_match(&toks, &token_set(f))))
        .map(|(id, _)| id)
        .collect();
    match candidates.len() {
        0 => Match::Fresh,
        1 => Match::Known(candidates.into_iter().next().cloned().expect("one candidate")),
        _ => Match::Ambiguous(candidates.into_iter().cloned().collect()),
    }
}

/// Maps every actor in `w` onto a canonical id: an exact alias-table hit,
/// else a unique token-subset match against known forms, else a fresh id.
/// The memory is not modified; the caller registers `entries`.
pub fn resolve_aliases(memory: &WorkingMemory, w: &WorkspaceInstance) -> AliasResolution {
    let mut entries = Vec::new();
    let mut ambiguities = Vec::new();
    let mut coref_candidates = Vec::new();
    let mut canonical: BTreeMap<ActorId, Actor> = BTreeMap::new();

    let known_roles: BTreeMap<&ActorId, BTreeSet<&str>> =
        memory.consensus.nodes.iter().fold(BTreeMap::new(), |mut acc, n| {
            acc.entry(&n.actor.id).or_default().insert(n.role.as_str());
            acc
        });

    for (id, actor) in w.actors() {
        let form = actor.mention().to_string();
        let target = match match_form(memory, &form) {
            Match::Known(target) => {
                if memory.lookup_alias(&form).is_none() {
                    entries.push(AliasEntry { form: form.clone(), actor: target.clone(), fresh: false });
                }
                Some(target)
            }
            Match::Ambiguous(candidates) => {
                let names: Vec<&str> = candidates.iter().map(ActorId::as_str).collect();
                ambiguities.push(format!("{form:?} matches {}; kept as a new actor", names.join(", ")));
                None
            }
            Match::Fresh => None,
        };
        let resolved = match target {
            Some(target) => {
                let mut forms = memory.actor_forms.get(&target).cloned().unwrap_or_default();
                for f in &actor.surface_forms {
                    if !forms.contains(f) {
                        forms.push(f.clone());
                    }
                }
                Actor { id: target, surface_forms: forms, situation: actor.situation.clone() }
            }
            None => {
                entries.push(AliasEntry { form: form.clone(), actor: id.clone(), fresh: true });
                let roles: BTreeSet<&str> = w.nodes_of(&id).map(|n| n.role.as_str()).collect();
                for (known, theirs) in &known_roles {
                    let shared: Vec<String> = roles.intersection(theirs).map(|r| r.to_string()).collect();
                    if !shared.is_empty() {
                        coref_candidates.push(CorefCandidate {
                            form: form.clone(),
                            known: (*known).clone(),
                            shared_roles: shared,
                        });
                    }
                }
                actor.clone()
            }
        };
        for f in actor.surface_forms.iter().skip(1) {
            if memory.lookup_alias(f).is_none() && !entries.iter().any(|e| &e.form == f) {
                entries.push(AliasEntry { form: f.clone(), actor: resolved.id.clone(), fresh: false });
            }
        }
        canonical.insert(id, resolved);
    }

    let mut b = InstanceBuilder::new(w.situation.clone(), w.segment);
    let mut renamed: BTreeMap<&NodeId, NodeId> = BTreeMap::new();
    for n in &w.nodes {
        let actor = canonical.get(&n.actor.id).unwrap_or(&n.actor);
        renamed.insert(&n.id, b.add_node(actor, &n.role, &n.state, n.provenance));
    }
    for e in &w.edges {
        if let (Some(s), Some(t)) = (renamed.get(&e.source), renamed.get(&e.target)) {
            b.add_edge(s, &e.label, t, e.attributes.clone(), e.provenance);
        }
    }
    for q in &w.questions {
        b.add_question(&q.text, q.provenance);
    }
    let (mut instance, warnings) = b.build();
    instance.reanchor(&memory.actor_forms);
    instance.canonicalize();
    AliasResolution { instance, entries, ambiguities, coref_candidates, warnings }
}
