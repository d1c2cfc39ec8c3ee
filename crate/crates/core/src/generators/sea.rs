use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::schedule::DriftSchedule;
use super::ConceptSource;
use crate::types::Label;

/// Concept thresholds on `f1 + f2`, cycled through at every change point.
pub const SEA_THRESHOLDS: [f64; 4] = [8.0, 9.0, 7.0, 9.5];

/// One SEA concept: positive iff `f1 + f2 <= threshold`; `f3` is irrelevant.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeaConcept {
    pub threshold: f64,
}

impl SeaConcept {
    pub fn nth(index: usize) -> Self {
        SeaConcept {
            threshold: SEA_THRESHOLDS[index % SEA_THRESHOLDS.len()],
        }
    }

    pub fn classify(&self, features: &[f64]) -> Label {
        if features[0] + features[1] <= self.threshold {
            Label::Positive
        } else {
            Label::Negative
        }
    }
}

/// Three uniform features in `[0, 10]`, labeled by the SEA concept in force.
#[derive(Clone, Debug)]
pub struct SeaSource {
    schedule: DriftSchedule,
    rng: ChaCha8Rng,
}

impl SeaSource {
    pub fn new(schedule: DriftSchedule, seed: u64) -> Self {
        SeaSource {
            schedule,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn concept_at(&mut self, t: u64) -> SeaConcept {
        let idx = match self.schedule.transition(t) {
            Some((new_idx, p_new)) => {
                if self.rng.random::<f64>() < p_new {
                    new_idx
                } else {
                    new_idx - 1
                }
            }
            None => self.schedule.concept_index(t),
        };
        SeaConcept::nth(idx)
    }
}

impl ConceptSource for SeaSource {
    fn dim(&self) -> usize {
        3
    }

    fn sample(&mut self, t: u64) -> (Vec<f64>, Label) {
        let concept = self.concept_at(t);
        let features: Vec<f64> = (0..3).map(|_| self.rng.random_range(0.0..=10.0)).collect();
        let label = concept.classify(&features);
        (features, label)
    }
}
