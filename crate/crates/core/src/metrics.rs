//! Detection metrics: accuracy, macro F1, false positive rate, per-class
//! precision/recall, confusion counts, and baseline/refined deltas.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::ClassLabel;

pub const N_CLASSES: usize = ClassLabel::ALL.len();

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub label: ClassLabel,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Rows of this class in the truth vector.
    pub support: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    /// Unweighted mean F1 over classes present in the truth labels.
    pub f1_macro: f64,
    /// Benign rows predicted as any attack class, over all benign rows.
    pub fpr: f64,
    pub per_class: Vec<ClassMetrics>,
    /// confusion[truth][pred], class declaration order.
    pub confusion: [[u64; N_CLASSES]; N_CLASSES],
}

/// Signed differences, refined minus baseline. Improvement means positive
/// accuracy/F1 deltas and a negative FPR delta.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsDelta {
    pub d_accuracy: f64,
    pub d_f1: f64,
    pub d_fpr: f64,
}

impl MetricsDelta {
    pub fn improvement(&self) -> bool {
        self.d_accuracy > 0.0 && self.d_f1 > 0.0 && self.d_fpr < 0.0
    }
}

pub fn evaluate(pred: &[ClassLabel], truth: &[ClassLabel]) -> Result<Metrics> {
    if pred.len() != truth.len() {
        return Err(Error::LengthMismatch(pred.len(), truth.len()));
    }
    assert!(!truth.is_empty(), "evaluate needs at least one row");

    let mut confusion = [[0u64; N_CLASSES]; N_CLASSES];
    for (&p, &t) in pred.iter().zip(truth) {
        confusion[t.index()][p.index()] += 1;
    }
    let total: u64 = truth.len() as u64;
    let trace: u64 = (0..N_CLASSES).map(|i| confusion[i][i]).sum();
    let accuracy = trace as f64 / total as f64;

    let mut per_class = Vec::with_capacity(N_CLASSES);
    for label in ClassLabel::ALL {
        let i = label.index();
        let tp = confusion[i][i];
        let row_sum: u64 = confusion[i].iter().sum();
        let col_sum: u64 = (0..N_CLASSES).map(|t| confusion[t][i]).sum();
        let precision = if col_sum == 0 {
            0.0
        } else {
            tp as f64 / col_sum as f64
        };
        let recall = if row_sum == 0 {
            0.0
        } else {
            tp as f64 / row_sum as f64
        };
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        per_class.push(ClassMetrics {
            label,
            precision,
            recall,
            f1,
            support: row_sum,
        });
    }

    let present: Vec<&ClassMetrics> = per_class.iter().filter(|c| c.support > 0).collect();
    let f1_macro = present.iter().map(|c| c.f1).sum::<f64>() / present.len() as f64;

    let benign = ClassLabel::Benign.index();
    let benign_total: u64 = confusion[benign].iter().sum();
    let fpr = if benign_total == 0 {
        0.0
    } else {
        (benign_total - confusion[benign][benign]) as f64 / benign_total as f64
    };

    Ok(Metrics {
        accuracy,
        f1_macro,
        fpr,
        per_class,
        confusion,
    })
}

/// Componentwise refined minus baseline.
pub fn delta(baseline: &Metrics, refined: &Metrics) -> MetricsDelta {
    MetricsDelta {
        d_accuracy: refined.accuracy - baseline.accuracy,
        d_f1: refined.f1_macro - baseline.f1_macro,
        d_fpr: refined.fpr - baseline.fpr,
    }
}
