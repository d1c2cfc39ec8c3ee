use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::types::Label;

/// Confusion counts with `Positive` as the class of interest.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fn_: u64,
    pub tn: u64,
    pub fp: u64,
}

impl ConfusionCounts {
    pub fn record(&mut self, truth: Label, pred: Label) {
        match (truth, pred) {
            (Label::Positive, Label::Positive) => self.tp += 1,
            (Label::Positive, Label::Negative) => self.fn_ += 1,
            (Label::Negative, Label::Negative) => self.tn += 1,
            (Label::Negative, Label::Positive) => self.fp += 1,
        }
    }

    pub fn forget(&mut self, truth: Label, pred: Label) {
        let slot = match (truth, pred) {
            (Label::Positive, Label::Positive) => &mut self.tp,
            (Label::Positive, Label::Negative) => &mut self.fn_,
            (Label::Negative, Label::Negative) => &mut self.tn,
            (Label::Negative, Label::Positive) => &mut self.fp,
        };
        *slot -= 1;
    }

    pub fn positives(&self) -> u64 {
        self.tp + self.fn_
    }

    pub fn negatives(&self) -> u64 {
        self.tn + self.fp
    }

    pub fn total(&self) -> u64 {
        self.positives() + self.negatives()
    }

    /// True positive rate, `None` without positives.
    pub fn recall_pos(&self) -> Option<f64> {
        (self.positives() > 0).then(|| self.tp as f64 / self.positives() as f64)
    }

    /// True negative rate, `None` without negatives.
    pub fn recall_neg(&self) -> Option<f64> {
        (self.negatives() > 0).then(|| self.tn as f64 / self.negatives() as f64)
    }
}

/// `(TPR + TNR) / 2`; a class with no instances contributes a rate of 1.
pub fn balanced_accuracy(tp: u64, fn_: u64, tn: u64, fp: u64) -> f64 {
    let c = ConfusionCounts { tp, fn_, tn, fp };
    0.5 * (c.recall_pos().unwrap_or(1.0) + c.recall_neg().unwrap_or(1.0))
}

/// Balanced accuracy over the last `window` (truth, prediction) pairs.
///
/// A class missing from the window contributes the rate it had the last
/// time it was present, or 1 if it was never seen.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BalancedAccuracyTracker {
    window: usize,
    history: VecDeque<(Label, Label)>,
    counts: ConfusionCounts,
    last_tpr: Option<f64>,
    last_tnr: Option<f64>,
}

impl BalancedAccuracyTracker {
    pub fn new(window: usize) -> Self {
        assert!(window > 0, "tracker window must be positive");
        BalancedAccuracyTracker {
            window,
            history: VecDeque::with_capacity(window + 1),
            counts: ConfusionCounts::default(),
            last_tpr: None,
            last_tnr: None,
        }
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn len(&self) -> usize {
        self.history.len()
    }

    pub fn is_empty(&self) -> bool {
        self.history.is_empty()
    }

    pub fn counts(&self) -> ConfusionCounts {
        self.counts
    }

    pub fn history(&self) -> impl Iterator<Item = &(Label, Label)> {
        self.history.iter()
    }

    pub fn update(&mut self, truth: Label, pred: Label) {
        self.history.push_back((truth, pred));
        self.counts.record(truth, pred);
        if self.history.len() > self.window {
            let (t, p) = self.history.pop_front().expect("non-empty");
            self.counts.forget(t, p);
        }
        if let Some(r) = self.counts.recall_pos() {
            self.last_tpr = Some(r);
        }
        if let Some(r) = self.counts.recall_neg() {
            self.last_tnr = Some(r);
        }
    }

    pub fn recall_pos(&self) -> f64 {
        self.counts.recall_pos().or(self.last_tpr).unwrap_or(1.0)
    }

    pub fn recall_neg(&self) -> f64 {
        self.counts.recall_neg().or(self.last_tnr).unwrap_or(1.0)
    }

    pub fn value(&self) -> f64 {
        0.5 * (self.recall_pos() + self.recall_neg())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn balanced_accuracy_cases() {
        assert_eq!(balanced_accuracy(10, 0, 10, 0), 1.0);
        assert!((balanced_accuracy(8, 2, 6, 4) - 0.7).abs() < 1e-15);
        assert_eq!(balanced_accuracy(0, 5, 5, 0), 0.5);
        assert_eq!(balanced_accuracy(0, 0, 3, 1), 0.5 * (1.0 + 0.75));
    }

    #[test]
    fn absent_class_keeps_last_rate() {
        let mut t = BalancedAccuracyTracker::new(3);
        assert_eq!(t.value(), 1.0);
        t.update(Label::Positive, Label::Negative);
        assert_eq!(t.recall_pos(), 0.0);
        for _ in 0..3 {
            t.update(Label::Negative, Label::Negative);
        }
        assert_eq!(t.counts().positives(), 0);
        assert_eq!(t.recall_pos(), 0.0);
        assert_eq!(t.value(), 0.5);
    }

    proptest! {
        #[test]
        fn counts_match_ring_recount(
            window in 1usize..20,
            pairs in prop::collection::vec((any::<bool>(), any::<bool>()), 0..100),
        ) {
            let mut t = BalancedAccuracyTracker::new(window);
            let lab = |b: bool| if b { Label::Positive } else { Label::Negative };
            for (a, b) in pairs {
                t.update(lab(a), lab(b));
                let mut c = ConfusionCounts::default();
                for &(x, y) in t.history() {
                    c.record(x, y);
                }
                prop_assert_eq!(c, t.counts());
                prop_assert!(t.len() <= window);
                let v = t.value();
                prop_assert!((0.0..=1.0).contains(&v));
            }
        }
    }
}
