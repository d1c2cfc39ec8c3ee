use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::ConceptSource;
use crate::types::Label;

pub const HYPERPLANE_DIM: usize = 5;
/// Per-step probability that a weight reverses its drift direction.
pub const DIRECTION_FLIP_PROB: f64 = 0.1;

/// Rotating hyperplane: positive iff `Σ w_i x_i >= ½ Σ w_i` on `[0, 1]^d`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HyperplaneState {
    pub weights: Vec<f64>,
    pub directions: Vec<f64>,
    pub drift_magnitude: f64,
}

impl HyperplaneState {
    pub fn classify(&self, features: &[f64]) -> Label {
        let total: f64 = self.weights.iter().sum();
        let dot: f64 = self.weights.iter().zip(features).map(|(w, x)| w * x).sum();
        if dot >= 0.5 * total {
            Label::Positive
        } else {
            Label::Negative
        }
    }
}

#[derive(Clone, Debug)]
pub struct HyperplaneSource {
    state: HyperplaneState,
    position: u64,
    rng: ChaCha8Rng,
}

impl HyperplaneSource {
    pub fn new(drift_magnitude: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let weights = (0..HYPERPLANE_DIM).map(|_| rng.random::<f64>()).collect();
        let directions = (0..HYPERPLANE_DIM)
            .map(|_| if rng.random_bool(0.5) { 1.0 } else { -1.0 })
            .collect();
        HyperplaneSource {
            state: HyperplaneState {
                weights,
                directions,
                drift_magnitude,
            },
            position: 0,
            rng,
        }
    }

    pub fn state(&self) -> &HyperplaneState {
        &self.state
    }

    fn advance_to(&mut self, t: u64) {
        while self.position < t {
            let s = &mut self.state;
            for (w, dir) in s.weights.iter_mut().zip(s.directions.iter_mut()) {
                *w += *dir * s.drift_magnitude;
                if self.rng.random_bool(DIRECTION_FLIP_PROB) {
                    *dir = -*dir;
                }
            }
            self.position += 1;
        }
    }
}

impl ConceptSource for HyperplaneSource {
    fn dim(&self) -> usize {
        HYPERPLANE_DIM
    }

    fn sample(&mut self, t: u64) -> (Vec<f64>, Label) {
        self.advance_to(t);
        let features: Vec<f64> = (0..HYPERPLANE_DIM).map(|_| self.rng.random::<f64>()).collect();
        let label = self.state.classify(&features);
        (features, label)
    }
}
