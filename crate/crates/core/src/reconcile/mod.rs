//! The reconciler: propose candidate pairs between the consensus and a new
//! instance, classify each pair, and merge according to the decisions.

pub mod classify;
pub mod decision;
pub mod merge;
pub mod pairs;

pub use classify::{
    classify_all, classify_pair, conservative_default, reconcile_request_body, reconciler_from_config,
    BaselineReconciler, Classification, Classified, ElementView, MockReconciler, NliModel, NodeView, QaModel,
    Reconciler, RemoteReconciler, QR_THRESHOLD,
};
pub use decision::{DecisionLogLine, ElementKey, QrLabel, RecLabel, ReconcileDecision, Task};
pub use merge::{merge, merge_in_place, merge_outcome, Lineage, MergeOutcome};
pub use pairs::{propose_pairs, CandidatePairSet};
