use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::cleaning::{consistent_set, distance_threshold, exchange, inconsistent_set};
use super::compress::compress;
use super::config::Dam3Config;
use super::log::{counts, StepDiagnostics, TransferLog};
use super::noise::NoiseFilter;
use crate::buffer::MemoryBuffer;
use crate::classifiers::{knn_predict_parts, FullBayesModel};
use crate::drift::{on_drift_split, BalancedAccuracyTracker, KsDriftDetector};
use crate::error::{DriftMemError, Result};
use crate::generators::sub_seed;
use crate::sampling::borderline_smote_with_rng;
use crate::types::{Label, LabeledInstance};

/// The classifiers that can answer a prediction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Submodel {
    Stm,
    Ltm,
    Cm,
}

impl Submodel {
    /// Preference order when tracked balanced accuracies tie.
    pub const TIE_ORDER: [Submodel; 3] = [Submodel::Cm, Submodel::Stm, Submodel::Ltm];

    pub fn name(self) -> &'static str {
        match self {
            Submodel::Stm => "stm",
            Submodel::Ltm => "ltm",
            Submodel::Cm => "cm",
        }
    }
}

/// Each submodel's answer; `None` when its memory is empty.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubmodelVotes {
    pub stm: Option<Label>,
    pub ltm: Option<Label>,
    pub cm: Option<Label>,
}

impl SubmodelVotes {
    pub fn get(&self, which: Submodel) -> Option<Label> {
        match which {
            Submodel::Stm => self.stm,
            Submodel::Ltm => self.ltm,
            Submodel::Cm => self.cm,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prediction {
    pub label: Label,
    pub chosen: Option<Submodel>,
    pub votes: SubmodelVotes,
}

/// Windowed balanced accuracy of each submodel.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubmodelTrackers {
    pub stm: BalancedAccuracyTracker,
    pub ltm: BalancedAccuracyTracker,
    pub cm: BalancedAccuracyTracker,
}

impl SubmodelTrackers {
    pub fn new(window: usize) -> Self {
        SubmodelTrackers {
            stm: BalancedAccuracyTracker::new(window),
            ltm: BalancedAccuracyTracker::new(window),
            cm: BalancedAccuracyTracker::new(window),
        }
    }

    pub fn get(&self, which: Submodel) -> &BalancedAccuracyTracker {
        match which {
            Submodel::Stm => &self.stm,
            Submodel::Ltm => &self.ltm,
            Submodel::Cm => &self.cm,
        }
    }

    pub fn update(&mut self, truth: Label, votes: &SubmodelVotes) {
        if let Some(p) = votes.stm {
            self.stm.update(truth, p);
        }
        if let Some(p) = votes.ltm {
            self.ltm.update(truth, p);
        }
        if let Some(p) = votes.cm {
            self.cm.update(truth, p);
        }
    }

    /// Picks the available submodel with the best tracked balanced accuracy.
    pub fn select(&self, votes: SubmodelVotes) -> Prediction {
        let mut best: Option<(Submodel, f64)> = None;
        for which in Submodel::TIE_ORDER {
            if votes.get(which).is_none() {
                continue;
            }
            let score = self.get(which).value();
            if best.is_none_or(|(_, s)| score > s) {
                best = Some((which, score));
            }
        }
        match best {
            Some((which, _)) => Prediction {
                label: votes.get(which).expect("available"),
                chosen: Some(which),
                votes,
            },
            None => Prediction {
                label: Label::Positive,
                chosen: None,
                votes,
            },
        }
    }
}

pub(crate) fn check_query_dim(dim: Option<usize>, x: &[f64]) -> Result<()> {
    match dim {
        Some(d) if d != x.len() => Err(DriftMemError::DimensionMismatch {
            expected: d,
            actual: x.len(),
        }),
        _ => Ok(()),
    }
}

/// Drift-aware multi-memory model.
///
/// Memories: STM (sliding window of the current concept, mirrored by a
/// full Bayes model), LTM (knowledge of former concepts consistent with the
/// current one), WM (LTM instances found inconsistent, kept for possible
/// reinstatement) and the combined view STM ∪ LTM.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dam3Model {
    config: Dam3Config,
    stm: MemoryBuffer,
    ltm: MemoryBuffer,
    wm: MemoryBuffer,
    fb: FullBayesModel,
    detector: KsDriftDetector,
    detector_tracker: BalancedAccuracyTracker,
    trackers: SubmodelTrackers,
    log: TransferLog,
    rng: ChaCha8Rng,
    next_serial: u64,
    seen: u64,
    dim: Option<usize>,
    #[serde(skip)]
    noise: NoiseFilter,
}

impl Dam3Model {
    pub fn new(config: Dam3Config) -> Result<Self> {
        config.validate()?;
        Ok(Dam3Model {
            stm: MemoryBuffer::with_capacity(config.max_stm),
            ltm: MemoryBuffer::with_capacity(config.max_ltm),
            wm: MemoryBuffer::with_capacity(config.max_wm),
            fb: FullBayesModel::new(),
            detector: KsDriftDetector::new(config.ws, config.alpha),
            detector_tracker: BalancedAccuracyTracker::new(config.ws),
            trackers: SubmodelTrackers::new(config.ms),
            log: TransferLog::default(),
            rng: ChaCha8Rng::seed_from_u64(sub_seed(config.seed, 0xDA3)),
            next_serial: 1,
            seen: 0,
            dim: None,
            noise: NoiseFilter::new(),
            config,
        })
    }

    pub fn config(&self) -> &Dam3Config {
        &self.config
    }

    pub fn stm(&self) -> &MemoryBuffer {
        &self.stm
    }

    pub fn ltm(&self) -> &MemoryBuffer {
        &self.ltm
    }

    pub fn wm(&self) -> &MemoryBuffer {
        &self.wm
    }

    pub fn full_bayes(&self) -> &FullBayesModel {
        &self.fb
    }

    pub fn detector(&self) -> &KsDriftDetector {
        &self.detector
    }

    pub fn trackers(&self) -> &SubmodelTrackers {
        &self.trackers
    }

    pub fn log(&self) -> &TransferLog {
        &self.log
    }

    pub fn seen(&self) -> u64 {
        self.seen
    }

    /// Each submodel's prediction for `x`.
    pub fn votes(&self, x: &[f64]) -> Result<SubmodelVotes> {
        check_query_dim(self.dim, x)?;
        let (k, eps) = (self.config.k, self.config.epsilon_dist);
        let stm = self.stm.instances();
        let ltm = self.ltm.instances();
        Ok(SubmodelVotes {
            stm: (!stm.is_empty()).then(|| self.fb.predict(x)).transpose()?,
            ltm: (!ltm.is_empty())
                .then(|| knn_predict_parts(&[ltm], x, k, eps))
                .transpose()?,
            cm: (!stm.is_empty() || !ltm.is_empty())
                .then(|| knn_predict_parts(&[stm, ltm], x, k, eps))
                .transpose()?,
        })
    }

    pub fn predict_detailed(&self, x: &[f64]) -> Result<Prediction> {
        Ok(self.trackers.select(self.votes(x)?))
    }

    pub fn predict(&self, x: &[f64]) -> Result<Label> {
        Ok(self.predict_detailed(x)?.label)
    }

    /// Learns from one labeled instance (to be called after predicting it).
    ///
    /// The instance is re-indexed with the model's own arrival counter.
    pub fn train_step(&mut self, mut instance: LabeledInstance) -> Result<&StepDiagnostics> {
        check_query_dim(self.dim, &instance.features)?;
        if instance.features.iter().any(|v| !v.is_finite()) {
            return Err(DriftMemError::InvalidArgument("non-finite feature".into()));
        }
        self.dim = Some(instance.dim());
        instance.arrival_index = self.seen;
        instance.synthetic_id = 0;
        self.seen += 1;
        let truth = instance.label;
        let mut step = StepDiagnostics {
            t: instance.arrival_index,
            ..Default::default()
        };

        // 1. submodel trackers
        let votes = self.votes(&instance.features)?;
        self.trackers.update(truth, &votes);
        if let Some(p) = votes.stm {
            self.detector_tracker.update(truth, p);
        }

        // 2. STM window and its Bayes mirror
        self.fb.update(&instance)?;
        self.stm.push(instance.clone())?;
        while self.stm.len() > self.config.max_stm {
            let old = self.stm.pop_oldest().expect("non-empty");
            self.fb.downdate(&old)?;
        }

        // 3. LTM ⇄ WM exchange around the newest instance
        step.exchange_total_before = self.ltm.len() + self.wm.len();
        step.theta = distance_threshold(self.stm.instances(), &instance, self.config.k);
        if let Some(theta) = step.theta {
            let is = inconsistent_set(self.ltm.instances(), &instance, theta, self.config.k);
            let cs = consistent_set(self.wm.instances(), &instance, theta, self.config.k);
            if !is.is_empty() || !cs.is_empty() {
                let moved = exchange(&mut self.ltm, &mut self.wm, &is, &cs)?;
                (step.ltm_to_wm_pos, step.ltm_to_wm_neg) = moved.to_wm_counts();
                (step.wm_to_ltm_pos, step.wm_to_ltm_neg) = moved.to_ltm_counts();
                self.log.note_to_wm(&moved.to_wm);
                self.log.note_to_ltm(&moved.to_ltm);
                self.noise.ltm_removed(&moved.to_wm);
                self.noise.ltm_added(&moved.to_ltm);
            }
        }

        step.exchange_total_after = self.ltm.len() + self.wm.len();

        // 4. WM instances the LTM already explains are noise
        let removed = self.noise.run(&mut self.wm, self.ltm.instances(), self.config.k, self.config.epsilon_dist);
        (step.noise_removed_pos, step.noise_removed_neg) = counts(&removed);

        // 5. drift detection on the STM classifier's balanced accuracy
        if votes.stm.is_some() && self.detector.observe(self.detector_tracker.value()).is_drift() {
            step.drift = true;
            let delta = on_drift_split(&mut self.stm, self.config.ws);
            self.fb = FullBayesModel::fit(self.stm.instances())?;
            if !delta.is_empty() {
                let balanced =
                    borderline_smote_with_rng(&delta, &self.config.smote, &mut self.rng, &mut self.next_serial);
                (step.transferred_pos, step.transferred_neg) = counts(&balanced);
                self.noise.ltm_added(&balanced);
                self.ltm.extend(balanced)?;
            }
        }

        // 6. compression
        if let Some(r) = compress(&mut self.ltm, self.config.max_ltm, &mut self.rng, &mut self.next_serial)? {
            step.compressions += r.rounds;
            self.noise.invalidate();
        }
        if let Some(r) = compress(&mut self.wm, self.config.max_wm, &mut self.rng, &mut self.next_serial)? {
            step.compressions += r.rounds;
        }

        // 7. diagnostics
        step.set_sizes(&self.stm, &self.ltm, Some(&self.wm));
        self.log.finish_step(step);
        Ok(&self.log.last)
    }

    /// JSON snapshot of configuration, memories and tracker states.
    pub fn snapshot_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_snapshot_json(json: &str) -> Result<Self> {
        let model: Dam3Model = serde_json::from_str(json)?;
        model.config.validate()?;
        Ok(model)
    }
}
