//! Confusion matrix and one-vs-rest accuracy/sensitivity/specificity.

mod report;

use serde::{Deserialize, Serialize};

use crate::wfdb::BeatClass;

pub use report::{ClassReport, EvalReport, REPORT_SCHEMA};

const K: usize = BeatClass::COUNT;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetricsError {
    #[error("confusion matrix is empty")]
    EmptyMatrix,
    #[error("malformed report: {0}")]
    MalformedReport(String),
}

/// Counts indexed `[truth][prediction]`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: [[u64; K]; K],
}

impl ConfusionMatrix {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_counts(counts: [[u64; K]; K]) -> Self {
        Self { counts }
    }

    pub fn accumulate(&mut self, truth: BeatClass, pred: BeatClass) {
        self.counts[truth.index()][pred.index()] += 1;
    }

    pub fn merge(&mut self, other: &ConfusionMatrix) {
        for (r, o) in self.counts.iter_mut().zip(&other.counts) {
            for (a, b) in r.iter_mut().zip(o) {
                *a += b;
            }
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..K).map(|i| self.counts[i][i]).sum()
    }

    pub fn row_sum(&self, c: BeatClass) -> u64 {
        self.counts[c.index()].iter().sum()
    }

    pub fn col_sum(&self, c: BeatClass) -> u64 {
        self.counts.iter().map(|r| r[c.index()]).sum()
    }

    /// `(tp, fn, fp, tn)` for class `c` against the rest.
    pub fn one_vs_rest(&self, c: BeatClass) -> (u64, u64, u64, u64) {
        let tp = self.counts[c.index()][c.index()];
        let fn_ = self.row_sum(c) - tp;
        let fp = self.col_sum(c) - tp;
        let tn = self.total() - tp - fn_ - fp;
        (tp, fn_, fp, tn)
    }

    pub fn overall_accuracy(&self) -> Result<f64, MetricsError> {
        match self.total() {
            0 => Err(MetricsError::EmptyMatrix),
            n => Ok(self.trace() as f64 / n as f64),
        }
    }

    /// `TP / (TP + FN)`; `None` when class `c` has no true members.
    pub fn sensitivity(&self, c: BeatClass) -> Option<f64> {
        let (tp, fn_, _, _) = self.one_vs_rest(c);
        ratio(tp, tp + fn_)
    }

    /// `TN / (TN + FP)`; `None` when every example belongs to class `c`.
    pub fn specificity(&self, c: BeatClass) -> Option<f64> {
        let (_, _, fp, tn) = self.one_vs_rest(c);
        ratio(tn, tn + fp)
    }
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}
