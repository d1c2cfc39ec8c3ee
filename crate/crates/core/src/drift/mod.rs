//! Imbalance-sensitive drift detection.
//!
//! The short-term classifier's windowed balanced accuracy is recorded once
//! per instance. The detector keeps the latest `2·ws` values, splits them
//! into a reference (older) and a test (newer) window, and signals drift when
//! a two-sample Kolmogorov–Smirnov test rejects equality and the test window
//! performs worse.

mod ks;
mod tracker;

pub use ks::{ks_critical_value, ks_statistic, Detection, KsDriftDetector};
pub use tracker::{balanced_accuracy, BalancedAccuracyTracker, ConfusionCounts};

use crate::buffer::MemoryBuffer;
use crate::types::LabeledInstance;

/// Shrinks the short-term memory to its newest `ws` instances and returns
/// the released older part, oldest first. No-op when `|stm| <= ws`.
pub fn on_drift_split(stm: &mut MemoryBuffer, ws: usize) -> Vec<LabeledInstance> {
    if stm.len() <= ws {
        return Vec::new();
    }
    stm.drain_oldest(stm.len() - ws)
}
