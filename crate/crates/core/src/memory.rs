//! Working memory: the consensus instance plus everything needed to
//! reproduce it (alias table, resolved questions, append-only history).

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::ReplayError;
use crate::model::{ActorId, SituationLabel, WorkspaceInstance};
use crate::reconcile::decision::{ElementKey, ReconcileDecision};
use crate::reconcile::merge::{merge_in_place, Lineage};
use crate::reconcile::pairs::CandidatePairSet;

/// A surface form bound to a canonical actor id.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AliasEntry {
    pub form: String,
    pub actor: ActorId,
    /// The form minted a new actor rather than joining a known one.
    pub fresh: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MergeRecord {
    pub segment: u32,
    /// The alias-resolved instance that was merged.
    pub instance: WorkspaceInstance,
    pub decisions: Vec<ReconcileDecision>,
    pub resolved: Vec<String>,
    pub lineage: Vec<(ElementKey, Lineage)>,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "event")]
pub enum HistoryEvent {
    Aliases { segment: u32, entries: Vec<AliasEntry> },
    Merge(MergeRecord),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorkingMemory {
    pub consensus: WorkspaceInstance,
    /// Normalized surface form -> canonical id. Entries are never rebound.
    pub alias_table: BTreeMap<String, ActorId>,
    /// Every form seen for each known actor, canonical mention first.
    pub actor_forms: BTreeMap<ActorId, Vec<String>>,
    /// Questions removed as answered or irrelevant; they never come back.
    pub resolved: BTreeSet<String>,
    pub history: Vec<HistoryEvent>,
}

impl WorkingMemory {
    pub fn new(situation: SituationLabel) -> Self {
        WorkingMemory {
            consensus: WorkspaceInstance::empty(situation, 0),
            alias_table: BTreeMap::new(),
            actor_forms: BTreeMap::new(),
            resolved: BTreeSet::new(),
            history: Vec::new(),
        }
    }

    pub fn situation(&self) -> &SituationLabel {
        &self.consensus.situation
    }

    pub fn is_known(&self, actor: &ActorId) -> bool {
        self.actor_forms.contains_key(actor)
    }

    pub fn lookup_alias(&self, form: &str) -> Option<&ActorId> {
        self.alias_table.get(form)
    }

    /// Binds new forms; a form that is already bound keeps its first binding.
    pub fn register_aliases(&mut self, segment: u32, entries: Vec<AliasEntry>) {
        for e in &entries {
            self.alias_table.entry(e.form.clone()).or_insert_with(|| e.actor.clone());
            let forms = self.actor_forms.entry(e.actor.clone()).or_default();
            if !forms.contains(&e.form) {
                forms.push(e.form.clone());
            }
        }
        self.history.push(HistoryEvent::Aliases { segment, entries });
    }

    pub fn merges(&self) -> impl Iterator<Item = &MergeRecord> {
        self.history.iter().filter_map(|e| match e {
            HistoryEvent::Merge(m) => Some(m),
            _ => None,
        })
    }

    /// Rebuilds a memory by folding `history` over an empty one.
    pub fn replay(situation: SituationLabel, history: &[HistoryEvent]) -> Result<Self, ReplayError> {
        let mut memory = WorkingMemory::new(situation);
        for event in history {
            match event {
                HistoryEvent::Aliases { segment, entries } => memory.register_aliases(*segment, entries.clone()),
                HistoryEvent::Merge(rec) => {
                    let pairs = CandidatePairSet::from_decisions(&rec.decisions, &rec.instance);
                    merge_in_place(&mut memory, &rec.instance, &rec.decisions, &pairs)
                        .map_err(|source| ReplayError::Merge { segment: rec.segment, source })?;
                }
            }
        }
        Ok(memory)
    }
}
