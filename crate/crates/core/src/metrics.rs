//! Binary classification metrics at a fixed 0.5 decision threshold.
//!
//! AUC is the rank statistic `P(score_pos > score_neg) + 0.5 P(tie)`,
//! computed with midranks; it equals the trapezoidal area under the ROC
//! curve.

use alloc::vec::Vec;
use core::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MetricsError {
    LengthMismatch { scores: usize, labels: usize },
    ScoreOutOfRange,
    BadLabel(u8),
    /// AUC needs at least one sample of each class.
    SingleClass,
}

impl fmt::Display for MetricsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricsError::LengthMismatch { scores, labels } => {
                write!(f, "{scores} scores but {labels} labels")
            }
            MetricsError::ScoreOutOfRange => f.write_str("score outside [0, 1]"),
            MetricsError::BadLabel(l) => write!(f, "label {l} is not 0 or 1"),
            MetricsError::SingleClass => f.write_str("batch contains a single class"),
        }
    }
}

impl core::error::Error for MetricsError {}

/// Scores paired with `{0, 1}` labels.
#[derive(Debug, Clone, Copy)]
pub struct ScoredBatch<'a> {
    scores: &'a [f64],
    labels: &'a [u8],
}

/// Confusion counts at a threshold; `predicted 1` iff `score >= threshold`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

pub const DEFAULT_THRESHOLD: f64 = 0.5;

impl<'a> ScoredBatch<'a> {
    pub fn new(scores: &'a [f64], labels: &'a [u8]) -> Result<Self, MetricsError> {
        if scores.len() != labels.len() {
            return Err(MetricsError::LengthMismatch {
                scores: scores.len(),
                labels: labels.len(),
            });
        }
        if scores.iter().any(|&s| !(0.0..=1.0).contains(&s)) {
            return Err(MetricsError::ScoreOutOfRange);
        }
        if let Some(&bad) = labels.iter().find(|&&l| l > 1) {
            return Err(MetricsError::BadLabel(bad));
        }
        Ok(ScoredBatch { scores, labels })
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    /// Counts at `threshold`; ties at the boundary predict class 1.
    pub fn confusion(&self, threshold: f64) -> Confusion {
        let mut c = Confusion {
            tp: 0,
            fp: 0,
            tn: 0,
            fn_: 0,
        };
        for (&s, &y) in self.scores.iter().zip(self.labels) {
            let pred = s >= threshold;
            match (pred, y) {
                (true, 1) => c.tp += 1,
                (true, 0) => c.fp += 1,
                (false, 0) => c.tn += 1,
                (false, 1) => c.fn_ += 1,
                _ => unreachable!("labels validated on construction"),
            }
        }
        c
    }

    /// F1 at the default threshold; 0 when there are neither positive
    /// predictions nor positive labels.
    pub fn f1(&self) -> f64 {
        let c = self.confusion(DEFAULT_THRESHOLD);
        let denom = 2 * c.tp + c.fp + c.fn_;
        if denom == 0 {
            0.0
        } else {
            2.0 * c.tp as f64 / denom as f64
        }
    }

    /// Fraction of correct predictions at the default threshold.
    pub fn accuracy(&self) -> f64 {
        let c = self.confusion(DEFAULT_THRESHOLD);
        (c.tp + c.tn) as f64 / self.len() as f64
    }

    /// Rank-based AUC with midranks for ties.
    pub fn auc(&self) -> Result<f64, MetricsError> {
        let n_pos = self.labels.iter().filter(|&&y| y == 1).count();
        let n_neg = self.len() - n_pos;
        if n_pos == 0 || n_neg == 0 {
            return Err(MetricsError::SingleClass);
        }
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_unstable_by(|&i, &j| self.scores[i].total_cmp(&self.scores[j]));

        // Sum of positive midranks (1-based). Ties share the mean rank of
        // their group.
        let mut rank_sum_pos = 0.0f64;
        let mut i = 0;
        while i < order.len() {
            let mut j = i + 1;
            while j < order.len() && self.scores[order[j]] == self.scores[order[i]] {
                j += 1;
            }
            let midrank = (i + 1 + j) as f64 / 2.0;
            let pos_in_group = order[i..j]
                .iter()
                .filter(|&&k| self.labels[k] == 1)
                .count();
            rank_sum_pos += midrank * pos_in_group as f64;
            i = j;
        }
        let n_pos = n_pos as f64;
        let n_neg = n_neg as f64;
        Ok((rank_sum_pos - n_pos * (n_pos + 1.0) / 2.0) / (n_pos * n_neg))
    }
}

/// Arithmetic mean and population standard deviation.
///
/// Panics on an empty slice.
pub fn aggregate(values: &[f64]) -> (f64, f64) {
    assert!(!values.is_empty(), "aggregate needs at least one value");
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, libm::sqrt(var))
}
