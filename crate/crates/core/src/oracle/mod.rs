//! The generation operator: context in, workspace instance out.
//!
//! Generation runs as five conditional stages (actors, roles per actor,
//! states per actor-role, predicates over nodes, questions). Each stage sees
//! the partial instance built so far. A backend answers one stage at a time.

pub mod config;
pub mod mock;
pub mod parse;
pub mod remote;

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use config::{BackendConfig, BackendKind, Decoding, RetryPolicy};
pub use mock::{mock_lookup, FixtureStore, LookupSource, MockBackend, MockLookup};
pub use parse::{parse_oracle_output, ParseStatus, ParsedOutput, RepairPass, REPAIR_PASSES};
pub use remote::{call_remote, generate_request_body, HttpTransport, RemoteBackend};

use crate::error::OracleError;
use crate::model::{validate_instance, SituationLabel, WorkspaceInstance};
use crate::schema::{self, EdgeRecord, InstanceFragment, NodeRecord};
use crate::text::{self, NONE};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Actors,
    Roles,
    States,
    Predicates,
    Questions,
    /// Whole schema in one call (single-call mode).
    Full,
}

pub const STAGES: [Stage; 5] = [
    Stage::Actors,
    Stage::Roles,
    Stage::States,
    Stage::Predicates,
    Stage::Questions,
];

impl Stage {
    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Actors => "actors",
            Stage::Roles => "roles",
            Stage::States => "states",
            Stage::Predicates => "predicates",
            Stage::Questions => "questions",
            Stage::Full => "full",
        }
    }

    /// Whether `partial` carries what this stage conditions on.
    pub fn ready(self, partial: &InstanceFragment) -> bool {
        match self {
            Stage::Actors | Stage::Questions | Stage::Full => true,
            Stage::Roles => !partial.nodes.is_empty(),
            Stage::States => partial.nodes.iter().any(|n| n.role.is_some()),
            Stage::Predicates => partial
                .nodes
                .iter()
                .any(|n| n.role.is_some() && n.state.is_some()),
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleRequest {
    pub context: String,
    pub situation: SituationLabel,
    pub stage: Stage,
    pub conditioning: InstanceFragment,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RawOracleOutput {
    pub text: String,
    /// Empty when `parse_status` is `Failed`.
    pub fragment: InstanceFragment,
    pub parse_status: ParseStatus,
    pub repairs: Vec<RepairPass>,
}

impl RawOracleOutput {
    pub fn from_text(text: impl Into<String>) -> Self {
        let text = text.into();
        let parsed = parse_oracle_output(&text);
        RawOracleOutput {
            text,
            fragment: parsed.fragment,
            parse_status: parsed.status,
            repairs: parsed.repairs,
        }
    }
}

/// One stage-level completion. Implementations must not assume call order
/// and must be safe to share across threads.
pub trait OracleBackend: Send + Sync {
    fn complete(&self, req: &OracleRequest) -> Result<RawOracleOutput, OracleError>;
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "outcome")]
pub enum StageOutcome {
    /// Prerequisites from earlier stages were missing.
    Skipped,
    Parsed { status: ParseStatus, repairs: Vec<RepairPass> },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: Stage,
    #[serde(flatten)]
    pub outcome: StageOutcome,
}

#[derive(Clone, Debug)]
pub struct Generation {
    pub instance: WorkspaceInstance,
    pub warnings: Vec<String>,
    pub failed_stages: Vec<Stage>,
    pub trace: Vec<StageRecord>,
    /// Partial instances handed to each stage, in call order.
    pub conditioning: Vec<(Stage, InstanceFragment)>,
}

/// Operator bound to one backend configuration.
#[derive(Clone)]
pub struct Operator {
    config: BackendConfig,
    backend: Arc<dyn OracleBackend>,
}

impl fmt::Debug for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Operator").field("config", &self.config).finish_non_exhaustive()
    }
}

impl Operator {
    pub fn from_config(config: BackendConfig) -> Result<Self, OracleError> {
        config.validate()?;
        let backend: Arc<dyn OracleBackend> = match config.kind {
            BackendKind::Mock => {
                let store = match &config.fixtures {
                    Some(path) => FixtureStore::load(path)?,
                    None => FixtureStore::bundled(),
                };
                Arc::new(MockBackend::new(store))
            }
            BackendKind::Remote => Arc::new(RemoteBackend::new(config.clone())?),
        };
        Ok(Operator { config, backend })
    }

    pub fn with_backend(config: BackendConfig, backend: Arc<dyn OracleBackend>) -> Self {
        Operator { config, backend }
    }

    pub fn config(&self) -> &BackendConfig {
        &self.config
    }

    /// Same backend, generating for another situation.
    pub fn for_situation(&self, situation: &SituationLabel) -> Operator {
        let mut config = self.config.clone();
        config.situation = situation.clone();
        Operator { config, backend: Arc::clone(&self.backend) }
    }

    pub fn backend(&self) -> &Arc<dyn OracleBackend> {
        &self.backend
    }

    /// Runs the staged generation for one context window. Transport and
    /// rejection errors abort; unparseable stage output leaves that stage
    /// empty and records a warning.
    pub fn generate_instance(&self, context: &str, seg: u32) -> Result<Generation, OracleError> {
        let situation = self.config.situation.clone();
        let mut gen = Generation {
            instance: WorkspaceInstance::empty(situation.clone(), seg),
            warnings: Vec::new(),
            failed_stages: Vec::new(),
            trace: Vec::new(),
            conditioning: Vec::new(),
        };
        if context.trim().is_empty() {
            gen.warnings.push("empty context; nothing to generate".to_string());
            return Ok(gen);
        }

        let stages: &[Stage] = if self.config.single_call { &[Stage::Full] } else { &STAGES };
        let mut partial = InstanceFragment::default();
        for &stage in stages {
            if !stage.ready(&partial) {
                gen.trace.push(StageRecord { stage, outcome: StageOutcome::Skipped });
                continue;
            }
            let req = OracleRequest {
                context: context.to_string(),
                situation: situation.clone(),
                stage,
                conditioning: partial.clone(),
            };
            gen.conditioning.push((stage, partial.clone()));
            let out = self.backend.complete(&req)?;
            gen.trace.push(StageRecord {
                stage,
                outcome: StageOutcome::Parsed { status: out.parse_status, repairs: out.repairs.clone() },
            });
            if out.parse_status == ParseStatus::Failed {
                gen.failed_stages.push(stage);
                gen.warnings.push(format!("stage {stage}: unparseable output, stage left empty"));
                continue;
            }
            apply_stage(&mut partial, stage, &out.fragment, &mut gen.warnings);
        }

        let assembled = schema::from_fragment(&partial, &situation, seg);
        gen.warnings.extend(assembled.warnings);
        let mut instance = assembled.instance;
        instance.segment = seg;
        let dropped = scrub_negatives(&mut instance);
        if dropped > 0 {
            log::debug!("scrubbed {dropped} negative sample(s) from segment {seg}");
        }
        instance.reanchor(&Default::default());
        instance.canonicalize();
        for v in validate_instance(&instance) {
            gen.warnings.push(format!("generated instance violates an invariant: {v}"));
        }
        gen.instance = instance;
        Ok(gen)
    }
}

/// Builds an operator from `cfg` and runs one generation.
pub fn generate_instance(cfg: &BackendConfig, context: &str, seg: u32) -> Result<WorkspaceInstance, OracleError> {
    Ok(Operator::from_config(cfg.clone())?.generate_instance(context, seg)?.instance)
}

fn norm(raw: &str) -> Option<String> {
    text::normalize_mention(raw).ok()
}

/// Folds one stage's output into the partial instance. Earlier stage output
/// is only ever refined (actor -> actor+role -> actor+role+state), never
/// dropped.
fn apply_stage(partial: &mut InstanceFragment, stage: Stage, out: &InstanceFragment, warnings: &mut Vec<String>) {
    match stage {
        Stage::Actors => {
            let mut seen = BTreeSet::new();
            partial.nodes = out
                .nodes
                .iter()
                .filter_map(|n| norm(&n.actor))
                .filter(|a| seen.insert(a.clone()))
                .map(|actor| NodeRecord { actor, role: None, state: None })
                .collect();
        }
        Stage::Roles => {
            refine(partial, out, warnings, stage, |have, got| {
                have.role.is_none() && got.role.is_some() && norm(&have.actor) == norm(&got.actor)
            }, |have, got| NodeRecord {
                actor: have.actor.clone(),
                role: got.role.clone(),
                state: None,
            });
        }
        Stage::States => {
            refine(partial, out, warnings, stage, |have, got| {
                have.role.is_some()
                    && have.state.is_none()
                    && got.state.is_some()
                    && norm(&have.actor) == norm(&got.actor)
                    && have.role.as_deref().and_then(norm) == got.role.as_deref().and_then(norm)
            }, |have, got| NodeRecord {
                actor: have.actor.clone(),
                role: have.role.clone(),
                state: got.state.clone(),
            });
        }
        Stage::Predicates => {
            partial.edges = out
                .edges
                .iter()
                .filter(|e| norm(&e.label).is_some_and(|l| l != NONE))
                .cloned()
                .collect::<Vec<EdgeRecord>>();
        }
        Stage::Questions => partial.questions = out.questions.clone(),
        Stage::Full => {
            partial.nodes = out.nodes.clone();
            partial.edges = out.edges.clone();
            partial.questions = out.questions.clone();
        }
    }
}

/// Replaces each partial record with the matching output records (or keeps
/// it when none match); output records that match nothing are reported.
fn refine(
    partial: &mut InstanceFragment,
    out: &InstanceFragment,
    warnings: &mut Vec<String>,
    stage: Stage,
    matches: impl Fn(&NodeRecord, &NodeRecord) -> bool,
    extend: impl Fn(&NodeRecord, &NodeRecord) -> NodeRecord,
) {
    let mut used = vec![false; out.nodes.len()];
    let mut next = Vec::new();
    for have in &partial.nodes {
        let mut hit = false;
        let mut seen = BTreeSet::new();
        for (i, got) in out.nodes.iter().enumerate() {
            if matches(have, got) {
                used[i] = true;
                hit = true;
                let rec = extend(have, got);
                if seen.insert((rec.role.as_deref().and_then(norm), rec.state.as_deref().and_then(norm))) {
                    next.push(rec);
                }
            }
        }
        if !hit {
            next.push(have.clone());
        }
    }
    let stray = used.iter().filter(|u| !**u).count();
    if stray > 0 {
        warnings.push(format!("stage {stage}: ignored {stray} record(s) not conditioned on earlier stages"));
    }
    partial.nodes = next;
}

/// Drops nodes whose role or state is `none`, edges labelled `none`, and
/// anything left dangling. Returns how many elements were removed.
pub fn scrub_negatives(w: &mut WorkspaceInstance) -> usize {
    let before = w.nodes.len() + w.edges.len();
    w.nodes.retain(|n| !n.is_negative());
    let ids: BTreeSet<_> = w.nodes.iter().map(|n| n.id.clone()).collect();
    w.edges
        .retain(|e| e.label != NONE && ids.contains(&e.source) && ids.contains(&e.target));
    before - w.nodes.len() - w.edges.len()
}
