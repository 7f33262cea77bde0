use std::fmt;

use num_traits::{FromPrimitive, Num, ToPrimitive};
use serde::{Deserialize, Serialize};

use super::LabeledPair;
use crate::error::EvalError;
use crate::reconcile::Task;

/// Number type metrics are computed in. `f64` for reports, an exact
/// rational for oracle checks.
pub trait Scalar: Num + Copy + PartialOrd + FromPrimitive + ToPrimitive + fmt::Debug {}

impl<T: Num + Copy + PartialOrd + FromPrimitive + ToPrimitive + fmt::Debug> Scalar for T {}

fn count<T: Scalar>(n: u64) -> T {
    T::from_u64(n).expect("count fits the scalar type")
}

/// `num / den`, or zero when `den` is zero.
fn ratio<T: Scalar>(num: u64, den: u64) -> T {
    if den == 0 {
        T::zero()
    } else {
        count::<T>(num) / count::<T>(den)
    }
}

/// `confusion[gold][pred]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix(pub Vec<Vec<u64>>);

impl ConfusionMatrix {
    pub fn new(classes: usize) -> Self {
        ConfusionMatrix(vec![vec![0; classes]; classes])
    }

    pub fn from_labels(classes: usize, gold: &[u8], pred: &[u8]) -> Self {
        let mut m = Self::new(classes);
        for (&g, &p) in gold.iter().zip(pred) {
            m.0[g as usize][p as usize] += 1;
        }
        m
    }

    pub fn classes(&self) -> usize {
        self.0.len()
    }

    pub fn total(&self) -> u64 {
        self.0.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.classes()).map(|i| self.0[i][i]).sum()
    }

    /// Row sum: how often `class` is the gold label.
    pub fn support(&self, class: usize) -> u64 {
        self.0[class].iter().sum()
    }

    /// Column sum: how often `class` is predicted.
    pub fn predicted(&self, class: usize) -> u64 {
        self.0.iter().map(|row| row[class]).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics<T> {
    pub label: u8,
    pub precision: T,
    pub recall: T,
    pub f1: T,
    pub support: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricReport<T> {
    pub task: Task,
    pub total: u64,
    pub accuracy: T,
    /// Support-weighted mean of per-class F1.
    pub weighted_f1: T,
    /// Unweighted mean over classes seen in gold or predictions.
    pub macro_f1: T,
    /// Accuracy after folding labels 1 and 2 together (REC only).
    pub sensitivity: Option<T>,
    pub per_class: Vec<ClassMetrics<T>>,
    pub confusion: ConfusionMatrix,
}

pub fn class_metrics<T: Scalar>(m: &ConfusionMatrix) -> Vec<ClassMetrics<T>> {
    (0..m.classes())
        .map(|c| {
            let tp = m.0[c][c];
            let support = m.support(c);
            let predicted = m.predicted(c);
            ClassMetrics {
                label: c as u8,
                precision: ratio(tp, predicted),
                recall: ratio(tp, support),
                // harmonic mean of precision and recall, in closed form
                f1: ratio(2 * tp, predicted + support),
                support,
            }
        })
        .collect()
}

pub fn accuracy<T: Scalar>(m: &ConfusionMatrix) -> T {
    ratio(m.trace(), m.total())
}

pub fn weighted_f1<T: Scalar>(m: &ConfusionMatrix) -> T {
    let total = m.total();
    if total == 0 {
        return T::zero();
    }
    let sum = class_metrics::<T>(m)
        .into_iter()
        .fold(T::zero(), |acc, c| acc + count::<T>(c.support) * c.f1);
    sum / count::<T>(total)
}

pub fn macro_f1<T: Scalar>(m: &ConfusionMatrix) -> T {
    let seen: Vec<ClassMetrics<T>> = class_metrics::<T>(m)
        .into_iter()
        .enumerate()
        .filter(|(c, _)| m.support(*c) + m.predicted(*c) > 0)
        .map(|(_, x)| x)
        .collect();
    if seen.is_empty() {
        return T::zero();
    }
    let n = seen.len() as u64;
    seen.into_iter().fold(T::zero(), |acc, c| acc + c.f1) / count::<T>(n)
}

fn fold_replace_keep_both(label: u8) -> u8 {
    label.min(1)
}

pub fn sensitivity<T: Scalar>(gold: &[u8], pred: &[u8]) -> T {
    let hits = gold
        .iter()
        .zip(pred)
        .filter(|(g, p)| fold_replace_keep_both(**g) == fold_replace_keep_both(**p))
        .count();
    ratio(hits as u64, gold.len() as u64)
}

/// Scores a single-task batch of labeled pairs.
pub fn score<T: Scalar>(pairs: &[LabeledPair]) -> Result<MetricReport<T>, EvalError> {
    let first = pairs.first().ok_or(EvalError::Empty)?;
    let task = first.task;
    for p in pairs {
        if p.task != task {
            return Err(EvalError::MixedTasks(task.to_string(), p.task.to_string()));
        }
        for label in [p.gold, p.pred] {
            if label > task.max_label() {
                return Err(EvalError::LabelOutOfRange { task: task.to_string(), label });
            }
        }
    }
    let gold: Vec<u8> = pairs.iter().map(|p| p.gold).collect();
    let pred: Vec<u8> = pairs.iter().map(|p| p.pred).collect();
    let m = ConfusionMatrix::from_labels(task.max_label() as usize + 1, &gold, &pred);
    Ok(MetricReport {
        task,
        total: m.total(),
        accuracy: accuracy(&m),
        weighted_f1: weighted_f1(&m),
        macro_f1: macro_f1(&m),
        sensitivity: task.is_rec().then(|| sensitivity(&gold, &pred)),
        per_class: class_metrics(&m),
        confusion: m,
    })
}

impl<T: Scalar> MetricReport<T> {
    pub fn to_f64(&self) -> MetricReport<f64> {
        let f = |x: T| x.to_f64().unwrap_or(f64::NAN);
        MetricReport {
            task: self.task,
            total: self.total,
            accuracy: f(self.accuracy),
            weighted_f1: f(self.weighted_f1),
            macro_f1: f(self.macro_f1),
            sensitivity: self.sensitivity.map(f),
            per_class: self
                .per_class
                .iter()
                .map(|c| ClassMetrics {
                    label: c.label,
                    precision: f(c.precision),
                    recall: f(c.recall),
                    f1: f(c.f1),
                    support: c.support,
                })
                .collect(),
            confusion: self.confusion.clone(),
        }
    }
}
