//! Autoregressive document processing.

pub mod alias;
pub mod run;
pub mod segment;

pub use alias::{resolve_aliases, AliasResolution, CorefCandidate};
pub use run::{
    parse_corpus, read_corpus, reconcile_step, run_document, CorpusEntry, Document, Pipeline, PipelineConfig, RunRecord,
    SegmentStatus, Snapshot, StepOutcome, Timings,
};
pub use segment::{segment, split_sentences, Segmentation};
