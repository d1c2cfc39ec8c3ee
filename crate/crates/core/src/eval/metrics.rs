use serde::{Deserialize, Serialize};

use crate::drift::{BalancedAccuracyTracker, ConfusionCounts};
use crate::types::Label;

/// Default width of the sliding metric window.
pub const DEFAULT_METRIC_WINDOW: usize = 500;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricSet {
    pub balanced_accuracy: f64,
    pub g_mean: f64,
    pub recall_pos: f64,
    pub recall_neg: f64,
}

impl MetricSet {
    pub fn from_recalls(recall_pos: f64, recall_neg: f64) -> Self {
        MetricSet {
            balanced_accuracy: 0.5 * (recall_pos + recall_neg),
            g_mean: (recall_pos * recall_neg).sqrt(),
            recall_pos,
            recall_neg,
        }
    }

    /// A class that has not appeared yet counts as perfectly recalled.
    pub fn from_counts(c: &ConfusionCounts) -> Self {
        MetricSet::from_recalls(c.recall_pos().unwrap_or(1.0), c.recall_neg().unwrap_or(1.0))
    }
}

/// Cumulative and sliding-window metrics updated one prediction at a time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricTracker {
    cumulative: ConfusionCounts,
    window: BalancedAccuracyTracker,
}

impl MetricTracker {
    pub fn new(window: usize) -> Self {
        MetricTracker {
            cumulative: ConfusionCounts::default(),
            window: BalancedAccuracyTracker::new(window),
        }
    }

    pub fn record(&mut self, truth: Label, pred: Label) {
        self.cumulative.record(truth, pred);
        self.window.update(truth, pred);
    }

    pub fn cumulative(&self) -> MetricSet {
        MetricSet::from_counts(&self.cumulative)
    }

    pub fn windowed(&self) -> MetricSet {
        MetricSet::from_recalls(self.window.recall_pos(), self.window.recall_neg())
    }

    pub fn counts(&self) -> ConfusionCounts {
        self.cumulative
    }
}
