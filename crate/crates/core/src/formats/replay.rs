use std::collections::BTreeSet;

use crate::error::ReplayError;
use crate::memory::WorkingMemory;
use crate::model::WorkspaceInstance;
use crate::pipeline::{RunRecord, SegmentStatus};
use crate::reconcile::merge_in_place;

fn bytes(w: &WorkspaceInstance) -> String {
    serde_json::to_string(w).expect("instance serializes")
}

/// Names the first element present on one side only, or the first field
/// that differs.
fn describe_difference(expected: &WorkspaceInstance, got: &WorkspaceInstance) -> String {
    let ids = |w: &WorkspaceInstance| -> BTreeSet<String> {
        w.nodes
            .iter()
            .map(|n| format!("node {} ({})", n.id, n.state))
            .chain(w.edges.iter().map(|e| format!("edge {}", e.key())))
            .chain(w.questions.iter().map(|q| format!("question {:?}", q.text)))
            .collect()
    };
    let (want, have) = (ids(expected), ids(got));
    if let Some(missing) = want.difference(&have).next() {
        return format!("replayed consensus lacks {missing}");
    }
    if let Some(extra) = have.difference(&want).next() {
        return format!("replayed consensus has unexpected {extra}");
    }
    if expected.segment != got.segment {
        return format!("segment {} recorded, {} replayed", expected.segment, got.segment);
    }
    "element details differ (provenance, surface forms or anchors)".to_string()
}

/// Folds the recorded aliases and decisions over an empty memory and checks
/// every snapshot, then the final consensus, byte for byte.
pub fn replay(record: &RunRecord) -> Result<WorkspaceInstance, ReplayError> {
    let mut memory = WorkingMemory::new(record.situation.clone());
    for snap in &record.snapshots {
        let segment = snap.segment;
        if snap.status == SegmentStatus::Merged {
            let Some(w) = &snap.instance else {
                return Err(ReplayError::Divergence { segment, detail: "merged snapshot has no instance".into() });
            };
            memory.register_aliases(segment, snap.aliases.clone());
            merge_in_place(&mut memory, w, &snap.decisions, &snap.pairs)
                .map_err(|source| ReplayError::Merge { segment, source })?;
        }
        if bytes(&memory.consensus) != bytes(&snap.consensus) {
            return Err(ReplayError::Divergence { segment, detail: describe_difference(&snap.consensus, &memory.consensus) });
        }
    }
    if bytes(&memory.consensus) != bytes(&record.final_consensus) {
        let segment = record.snapshots.last().map_or(0, |s| s.segment);
        return Err(ReplayError::Divergence {
            segment,
            detail: format!("final consensus: {}", describe_difference(&record.final_consensus, &memory.consensus)),
        });
    }
    Ok(memory.consensus)
}
