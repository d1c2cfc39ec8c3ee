use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::buffer::{imbalance_ratio, MemoryBuffer};
use crate::types::{class_counts, InstanceId, Label, LabeledInstance};

/// Memory sizes and movements recorded after one training step.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StepDiagnostics {
    pub t: u64,
    pub stm_pos: usize,
    pub stm_neg: usize,
    pub ltm_pos: usize,
    pub ltm_neg: usize,
    pub wm_pos: usize,
    pub wm_neg: usize,
    pub ltm_to_wm_pos: usize,
    pub ltm_to_wm_neg: usize,
    pub wm_to_ltm_pos: usize,
    pub wm_to_ltm_neg: usize,
    pub noise_removed_pos: usize,
    pub noise_removed_neg: usize,
    /// Deleted outright from the LTM by cleaning (baseline only).
    pub ltm_deleted_pos: usize,
    pub ltm_deleted_neg: usize,
    /// Dropped by cleaning while being transferred into the LTM (baseline only).
    pub transfer_cleaned_pos: usize,
    pub transfer_cleaned_neg: usize,
    /// Moved from the STM into the LTM, synthetic instances included.
    pub transferred_pos: usize,
    pub transferred_neg: usize,
    /// |LTM| + |WM| just before and just after the exchange.
    pub exchange_total_before: usize,
    pub exchange_total_after: usize,
    pub drift: bool,
    pub compressions: u32,
    pub theta: Option<f64>,
}

impl StepDiagnostics {
    pub fn stm_ir(&self) -> Option<f64> {
        imbalance_ratio(self.stm_pos, self.stm_neg)
    }

    pub fn ltm_ir(&self) -> Option<f64> {
        imbalance_ratio(self.ltm_pos, self.ltm_neg)
    }

    pub fn wm_ir(&self) -> Option<f64> {
        imbalance_ratio(self.wm_pos, self.wm_neg)
    }

    pub(crate) fn set_sizes(&mut self, stm: &MemoryBuffer, ltm: &MemoryBuffer, wm: Option<&MemoryBuffer>) {
        self.stm_pos = stm.count_pos();
        self.stm_neg = stm.count_neg();
        self.ltm_pos = ltm.count_pos();
        self.ltm_neg = ltm.count_neg();
        if let Some(wm) = wm {
            self.wm_pos = wm.count_pos();
            self.wm_neg = wm.count_neg();
        }
    }
}

/// Running totals of every counter in [`StepDiagnostics`].
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransferTotals {
    pub ltm_to_wm_pos: u64,
    pub ltm_to_wm_neg: u64,
    pub wm_to_ltm_pos: u64,
    pub wm_to_ltm_neg: u64,
    pub noise_removed_pos: u64,
    pub noise_removed_neg: u64,
    pub ltm_deleted_pos: u64,
    pub ltm_deleted_neg: u64,
    pub transfer_cleaned_pos: u64,
    pub transfer_cleaned_neg: u64,
    pub transferred_pos: u64,
    pub transferred_neg: u64,
    pub drift_events: u64,
    pub compression_events: u64,
}

impl TransferTotals {
    pub fn add(&mut self, s: &StepDiagnostics) {
        self.ltm_to_wm_pos += s.ltm_to_wm_pos as u64;
        self.ltm_to_wm_neg += s.ltm_to_wm_neg as u64;
        self.wm_to_ltm_pos += s.wm_to_ltm_pos as u64;
        self.wm_to_ltm_neg += s.wm_to_ltm_neg as u64;
        self.noise_removed_pos += s.noise_removed_pos as u64;
        self.noise_removed_neg += s.noise_removed_neg as u64;
        self.ltm_deleted_pos += s.ltm_deleted_pos as u64;
        self.ltm_deleted_neg += s.ltm_deleted_neg as u64;
        self.transfer_cleaned_pos += s.transfer_cleaned_pos as u64;
        self.transfer_cleaned_neg += s.transfer_cleaned_neg as u64;
        self.transferred_pos += s.transferred_pos as u64;
        self.transferred_neg += s.transferred_neg as u64;
        self.drift_events += s.drift as u64;
        self.compression_events += s.compressions as u64;
    }
}

/// Totals plus the identities of minority instances that left the LTM for
/// the working memory, and of those that came back.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TransferLog {
    pub totals: TransferTotals,
    pub last: StepDiagnostics,
    minority_to_wm: BTreeSet<InstanceId>,
    minority_returned: BTreeSet<InstanceId>,
}

impl TransferLog {
    pub(crate) fn note_to_wm(&mut self, moved: &[LabeledInstance]) {
        self.minority_to_wm
            .extend(moved.iter().filter(|i| i.label == Label::Positive).map(|i| i.id()));
    }

    pub(crate) fn note_to_ltm(&mut self, moved: &[LabeledInstance]) {
        self.minority_returned
            .extend(moved.iter().filter(|i| i.label == Label::Positive).map(|i| i.id()));
    }

    pub(crate) fn finish_step(&mut self, step: StepDiagnostics) {
        self.totals.add(&step);
        self.last = step;
    }

    /// Distinct minority instances moved LTM → WM that never moved back.
    pub fn minority_never_returned(&self) -> usize {
        self.minority_to_wm.difference(&self.minority_returned).count()
    }

    /// As [`Self::minority_never_returned`], stream instances only.
    pub fn real_minority_never_returned(&self) -> usize {
        self.minority_to_wm
            .difference(&self.minority_returned)
            .filter(|id| id.synthetic == 0)
            .count()
    }
}

pub(crate) fn counts(instances: &[LabeledInstance]) -> (usize, usize) {
    class_counts(instances)
}
