//! The per-document loop: segment, generate, alias, pair, classify, merge.

use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::alias::{resolve_aliases, CorefCandidate};
use super::segment::{check_window, segment};
use crate::error::{ConfigError, IoError, MergeError, PipelineError};
use crate::memory::{AliasEntry, WorkingMemory};
use crate::model::{SituationLabel, WorkspaceInstance};
use crate::oracle::{BackendConfig, Operator};
use crate::reconcile::{
    classify_all, merge_in_place, propose_pairs, reconciler_from_config, CandidatePairSet, DecisionLogLine,
    ReconcileDecision, Reconciler,
};

/// One line of an input corpus.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusEntry {
    pub doc_id: String,
    pub situation: String,
    pub text: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub doc_id: String,
    pub situation: SituationLabel,
    pub text: String,
    pub segments: Vec<String>,
}

impl Document {
    pub fn new(
        doc_id: impl Into<String>,
        situation: SituationLabel,
        text: impl Into<String>,
        window: usize,
        overlap: usize,
    ) -> Result<(Self, Vec<String>), ConfigError> {
        let text = text.into();
        let seg = segment(&text, window, overlap)?;
        Ok((Document { doc_id: doc_id.into(), situation, text, segments: seg.segments }, seg.warnings))
    }
}

pub fn parse_corpus(src: &str, path: &str) -> Result<Vec<CorpusEntry>, IoError> {
    let mut out = Vec::new();
    for (i, line) in src.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let entry = serde_json::from_str(line).map_err(|e| IoError::Parse {
            path: path.to_string(),
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push(entry);
    }
    Ok(out)
}

pub fn read_corpus(path: &Path) -> Result<Vec<CorpusEntry>, IoError> {
    let shown = path.display().to_string();
    let src = std::fs::read_to_string(path).map_err(|source| IoError::File { path: shown.clone(), source })?;
    parse_corpus(&src, &shown)
}

fn default_window() -> usize {
    3
}

fn default_hops() -> usize {
    1
}

fn default_true() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    #[serde(default = "default_window")]
    pub window: usize,
    #[serde(default)]
    pub overlap: usize,
    #[serde(default = "default_true")]
    pub prune: bool,
    #[serde(default = "default_hops")]
    pub hops: usize,
    #[serde(default)]
    pub operator: BackendConfig,
    #[serde(default)]
    pub reconciler: BackendConfig,
    /// Recorded for remote decoding; the core itself draws no randomness.
    #[serde(default)]
    pub seed: Option<u64>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            window: default_window(),
            overlap: 0,
            prune: true,
            hops: default_hops(),
            operator: BackendConfig::default(),
            reconciler: BackendConfig::default(),
            seed: None,
        }
    }
}

impl PipelineConfig {
    pub fn mock(situation: SituationLabel) -> Self {
        PipelineConfig {
            operator: BackendConfig::mock(situation.clone()),
            reconciler: BackendConfig::mock(situation),
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        check_window(self.window, self.overlap)?;
        self.operator.validate()?;
        self.reconciler.validate()?;
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SegmentStatus {
    Merged,
    /// Generation failed; memory was left as it was.
    Skipped,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Snapshot {
    pub segment: u32,
    pub context: String,
    pub status: SegmentStatus,
    /// Alias-resolved operator output (W').
    pub instance: Option<WorkspaceInstance>,
    pub aliases: Vec<AliasEntry>,
    pub pairs: CandidatePairSet,
    pub decisions: Vec<ReconcileDecision>,
    /// Consensus after this segment.
    pub consensus: WorkspaceInstance,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Timings {
    pub total_ms: u64,
    pub per_segment_ms: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub doc_id: String,
    pub situation: SituationLabel,
    pub config: PipelineConfig,
    pub segments: Vec<String>,
    pub snapshots: Vec<Snapshot>,
    pub final_consensus: WorkspaceInstance,
    pub warnings: Vec<String>,
    pub timings: Timings,
}

impl RunRecord {
    /// The record with wall-clock data zeroed, for comparing runs.
    pub fn without_timings(&self) -> RunRecord {
        RunRecord { timings: Timings::default(), ..self.clone() }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("run record serializes")
    }

    pub fn from_json(src: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(src)
    }

    pub fn decision_log(&self) -> Vec<DecisionLogLine> {
        self.snapshots
            .iter()
            .flat_map(|s| s.decisions.iter().map(|d| DecisionLogLine::now(&self.doc_id, s.segment, d.clone())))
            .collect()
    }

    pub fn skipped(&self) -> usize {
        self.snapshots.iter().filter(|s| s.status == SegmentStatus::Skipped).count()
    }
}

pub struct Pipeline {
    config: PipelineConfig,
    operator: Operator,
    reconciler: Arc<dyn Reconciler>,
}

impl Pipeline {
    pub fn new(config: PipelineConfig) -> Result<Self, ConfigError> {
        config.validate()?;
        let operator = Operator::from_config(config.operator.clone())?;
        let reconciler = reconciler_from_config(&config.reconciler)?;
        Ok(Pipeline { config, operator, reconciler })
    }

    /// Uses the given backends; `config` only supplies the loop settings.
    pub fn with_parts(
        config: PipelineConfig,
        operator: Operator,
        reconciler: Arc<dyn Reconciler>,
    ) -> Result<Self, ConfigError> {
        check_window(config.window, config.overlap)?;
        Ok(Pipeline { config, operator, reconciler })
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.config
    }

    pub fn document(&self, entry: &CorpusEntry) -> Result<(Document, Vec<String>), ConfigError> {
        let situation = SituationLabel::parse_loose(&entry.situation)?;
        Document::new(&entry.doc_id, situation, &entry.text, self.config.window, self.config.overlap)
    }

    /// Runs one document from an empty memory. A segment whose generation
    /// fails is skipped; a merge failure aborts the document.
    pub fn run_document(&self, doc: &Document) -> Result<RunRecord, PipelineError> {
        let started = Instant::now();
        let operator = self.operator.for_situation(&doc.situation);
        let mut memory = WorkingMemory::new(doc.situation.clone());
        let mut snapshots = Vec::with_capacity(doc.segments.len());
        let mut per_segment_ms = Vec::with_capacity(doc.segments.len());
        let mut warnings = Vec::new();

        for (i, context) in doc.segments.iter().enumerate() {
            let seg_started = Instant::now();
            let n = i as u32 + 1;
            let generation = match operator.generate_instance(context, n) {
                Ok(g) => g,
                Err(e) => {
                    let msg = format!("segment {n} skipped: {e}");
                    log::warn!("{}: {msg}", doc.doc_id);
                    warnings.push(msg.clone());
                    snapshots.push(Snapshot {
                        segment: n,
                        context: context.clone(),
                        status: SegmentStatus::Skipped,
                        instance: None,
                        aliases: Vec::new(),
                        pairs: CandidatePairSet::default(),
                        decisions: Vec::new(),
                        consensus: memory.consensus.clone(),
                        warnings: vec![msg],
                    });
                    per_segment_ms.push(seg_started.elapsed().as_millis() as u64);
                    continue;
                }
            };
            let step = reconcile_step(&mut memory, &generation.instance, self.reconciler.as_ref(), &self.config, context)
                .map_err(|source| PipelineError::Merge { doc_id: doc.doc_id.clone(), segment: n, source })?;
            for c in &step.coref_candidates {
                log::info!("{}: possible coreference {:?} ~ {}", doc.doc_id, c.form, c.known);
            }
            let mut seg_warnings = generation.warnings;
            seg_warnings.extend(step.warnings);

            snapshots.push(Snapshot {
                segment: n,
                context: context.clone(),
                status: SegmentStatus::Merged,
                instance: Some(step.instance),
                aliases: step.aliases,
                pairs: step.pairs,
                decisions: step.decisions,
                consensus: memory.consensus.clone(),
                warnings: seg_warnings,
            });
            per_segment_ms.push(seg_started.elapsed().as_millis() as u64);
        }

        Ok(RunRecord {
            doc_id: doc.doc_id.clone(),
            situation: doc.situation.clone(),
            config: self.config.clone(),
            segments: doc.segments.clone(),
            snapshots,
            final_consensus: memory.consensus,
            warnings,
            timings: Timings { total_ms: started.elapsed().as_millis() as u64, per_segment_ms },
        })
    }
}

/// What one reconcile step saw and decided.
#[derive(Clone, Debug)]
pub struct StepOutcome {
    /// Alias-resolved instance (W').
    pub instance: WorkspaceInstance,
    pub aliases: Vec<AliasEntry>,
    pub pairs: CandidatePairSet,
    pub decisions: Vec<ReconcileDecision>,
    pub coref_candidates: Vec<CorefCandidate>,
    pub warnings: Vec<String>,
}

/// Aliases, pairs, classifies and merges one generated instance into
/// `memory`. On error `memory` is untouched.
pub fn reconcile_step(
    memory: &mut WorkingMemory,
    generated: &WorkspaceInstance,
    reconciler: &dyn Reconciler,
    cfg: &PipelineConfig,
    context: &str,
) -> Result<StepOutcome, MergeError> {
    let resolution = resolve_aliases(memory, generated);
    let mut warnings = resolution.warnings;
    warnings.extend(resolution.ambiguities.iter().map(|a| format!("ambiguous alias: {a}")));
    let w = resolution.instance;
    let pairs = propose_pairs(memory, &w, cfg.prune, cfg.hops);
    let classification = classify_all(reconciler, &memory.consensus, &w, &pairs, context)?;
    warnings.extend(classification.warnings);

    let mut next = memory.clone();
    next.register_aliases(w.segment, resolution.entries.clone());
    warnings.extend(merge_in_place(&mut next, &w, &classification.decisions, &pairs)?);
    *memory = next;
    Ok(StepOutcome {
        instance: w,
        aliases: resolution.entries,
        pairs,
        decisions: classification.decisions,
        coref_candidates: resolution.coref_candidates,
        warnings,
    })
}

/// Builds a pipeline from `cfg` and runs one document.
pub fn run_document(doc: &Document, cfg: &PipelineConfig) -> Result<RunRecord, PipelineError> {
    Pipeline::new(cfg.clone())?.run_document(doc)
}
