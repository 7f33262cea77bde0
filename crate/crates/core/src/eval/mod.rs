//! Reconciler evaluation: accuracy, weighted F1 and Sensitivity over
//! labeled pairs, plus the mappings that let NLI and QA baselines stand in
//! for a reconciler.

pub mod metrics;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use metrics::{
    accuracy, class_metrics, macro_f1, score, sensitivity, weighted_f1, ClassMetrics, ConfusionMatrix, MetricReport,
    Scalar,
};

use crate::error::{EvalError, IoError};
use crate::reconcile::Task;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabeledPair {
    pub task: Task,
    pub gold: u8,
    pub pred: u8,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<serde_json::Value>,
}

impl LabeledPair {
    pub fn new(task: Task, gold: u8, pred: u8) -> Self {
        LabeledPair { task, gold, pred, meta: None }
    }
}

/// entailment -> keep old (0), contradiction -> replace (1),
/// neutral -> keep both (2).
pub fn map_nli(label: &str) -> Result<u8, EvalError> {
    match label.trim().to_ascii_lowercase().as_str() {
        "entailment" => Ok(0),
        "contradiction" => Ok(1),
        "neutral" => Ok(2),
        _ => Err(EvalError::UnknownNliLabel(label.to_string())),
    }
}

/// A question counts as answered (1) iff the QA model returned a
/// non-empty span.
pub fn map_qa(span: Option<&str>) -> u8 {
    u8::from(span.is_some_and(|s| !s.trim().is_empty()))
}

pub fn read_labeled_pairs(path: &Path) -> Result<Vec<LabeledPair>, IoError> {
    let shown = path.display().to_string();
    let src = std::fs::read_to_string(path).map_err(|source| IoError::File { path: shown.clone(), source })?;
    let mut out = Vec::new();
    for (i, line) in src.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let pair = serde_json::from_str(line).map_err(|e| IoError::Parse {
            path: shown.clone(),
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push(pair);
    }
    Ok(out)
}

/// Splits a mixed batch by task and scores each part.
pub fn score_by_task(pairs: &[LabeledPair]) -> Result<BTreeMap<Task, MetricReport<f64>>, EvalError> {
    if pairs.is_empty() {
        return Err(EvalError::Empty);
    }
    let mut groups: BTreeMap<Task, Vec<LabeledPair>> = BTreeMap::new();
    for p in pairs {
        groups.entry(p.task).or_default().push(p.clone());
    }
    groups.into_iter().map(|(t, ps)| Ok((t, score::<f64>(&ps)?))).collect()
}

/// One situation's results, as rows of the results table.
#[derive(Clone, Debug, Default)]
pub struct TableRow<'a> {
    pub situation: String,
    pub rec: Option<&'a MetricReport<f64>>,
    pub qr: Option<&'a MetricReport<f64>>,
}

/// Plain-text table: a Reconciliation block (ACC, F1, Sensitivity) and a
/// Question Resolution block (ACC, F1), one row per situation. `use_macro`
/// swaps weighted F1 for macro F1.
pub fn format_table(rows: &[TableRow<'_>], use_macro: bool) -> String {
    let width = rows.iter().map(|r| r.situation.len()).max().unwrap_or(0).max(22);
    let f1 = |m: &MetricReport<f64>| if use_macro { m.macro_f1 } else { m.weighted_f1 };
    let mut out = String::new();
    let _ = writeln!(out, "{:width$} | {:>6} | {:>6} | {:>11}", "Situation", "ACC.", "F1", "Sensitivity");
    let rule = "-".repeat(width + 33);
    for (title, is_rec) in [("Reconciliation", true), ("Question Resolution", false)] {
        let _ = writeln!(out, "{rule}\n{title}\n{rule}");
        for row in rows {
            let situation = row.situation.replace('_', " ");
            match if is_rec { row.rec } else { row.qr } {
                Some(m) => {
                    let sens = m.sensitivity.map_or_else(|| "-".to_string(), |s| format!("{s:.2}"));
                    let _ = writeln!(
                        out,
                        "{situation:width$} | {:>6.2} | {:>6.2} | {sens:>11}",
                        m.accuracy,
                        f1(m)
                    );
                }
                None => {
                    let _ = writeln!(out, "{situation:width$} | {:>6} | {:>6} | {:>11}", "-", "-", "-");
                }
            }
        }
    }
    out
}
