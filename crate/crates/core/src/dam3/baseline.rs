use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::cleaning::{clean_against, distance_threshold, inconsistent_set};
use super::compress::compress;
use super::config::SamKnnConfig;
use super::log::{counts, StepDiagnostics, TransferLog};
use super::model::{check_query_dim, Prediction, SubmodelTrackers, SubmodelVotes};
use crate::buffer::MemoryBuffer;
use crate::classifiers::{knn_predict_parts, weighted_vote};
use crate::drift::ConfusionCounts;
use crate::error::{DriftMemError, Result};
use crate::generators::sub_seed;
use crate::neighbors::k_nearest;
use crate::types::{LabeledInstance, Label};

/// Interleaved test-then-train balanced accuracy of kNN over `window`:
/// each instance is predicted from the instances before it.
pub fn interleaved_balanced_accuracy(window: &[LabeledInstance], k: usize, epsilon_dist: f64) -> f64 {
    let mut counts = ConfusionCounts::default();
    for i in 1..window.len() {
        let prefix = &window[..i];
        let x = &window[i];
        let nn = k_nearest(&x.features, &[prefix], k, None);
        let pred = weighted_vote(nn.iter().map(|n| (prefix[n.index].label, n.distance)), epsilon_dist);
        counts.record(x.label, pred);
    }
    crate::drift::balanced_accuracy(counts.tp, counts.fn_, counts.tn, counts.fp)
}

/// Dual-memory baseline in the style of self-adjusting-memory kNN.
///
/// No working memory: LTM instances inconsistent with the newest instance
/// are deleted. No drift detector: every `adapt_interval` steps the STM is
/// shrunk to whichever suffix (full, half, quarter) scores best, and the
/// discarded prefix is cleaned and moved to the LTM without oversampling.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamKnnBaseline {
    config: SamKnnConfig,
    stm: MemoryBuffer,
    ltm: MemoryBuffer,
    trackers: SubmodelTrackers,
    log: TransferLog,
    rng: ChaCha8Rng,
    next_serial: u64,
    seen: u64,
    dim: Option<usize>,
}

impl SamKnnBaseline {
    pub fn new(config: SamKnnConfig) -> Result<Self> {
        config.validate()?;
        Ok(SamKnnBaseline {
            stm: MemoryBuffer::with_capacity(config.max_stm),
            ltm: MemoryBuffer::with_capacity(config.max_ltm),
            trackers: SubmodelTrackers::new(config.min_stm),
            log: TransferLog::default(),
            rng: ChaCha8Rng::seed_from_u64(sub_seed(config.seed, 0xBA5E)),
            next_serial: 1,
            seen: 0,
            dim: None,
            config,
        })
    }

    pub fn config(&self) -> &SamKnnConfig {
        &self.config
    }

    pub fn stm(&self) -> &MemoryBuffer {
        &self.stm
    }

    pub fn ltm(&self) -> &MemoryBuffer {
        &self.ltm
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

    pub fn votes(&self, x: &[f64]) -> Result<SubmodelVotes> {
        check_query_dim(self.dim, x)?;
        let (k, eps) = (self.config.k, self.config.epsilon_dist);
        let stm = self.stm.instances();
        let ltm = self.ltm.instances();
        let vote = |parts: &[&[LabeledInstance]]| -> Result<Option<Label>> {
            if parts.iter().all(|p| p.is_empty()) {
                Ok(None)
            } else {
                knn_predict_parts(parts, x, k, eps).map(Some)
            }
        };
        Ok(SubmodelVotes {
            stm: vote(&[stm])?,
            ltm: vote(&[ltm])?,
            cm: vote(&[stm, ltm])?,
        })
    }

    pub fn predict_detailed(&self, x: &[f64]) -> Result<Prediction> {
        Ok(self.trackers.select(self.votes(x)?))
    }

    pub fn predict(&self, x: &[f64]) -> Result<Label> {
        Ok(self.predict_detailed(x)?.label)
    }

    pub fn train_step(&mut self, mut instance: LabeledInstance) -> Result<&StepDiagnostics> {
        check_query_dim(self.dim, &instance.features)?;
        if instance.features.iter().any(|v| !v.is_finite()) {
            return Err(DriftMemError::InvalidArgument("non-finite feature".into()));
        }
        self.dim = Some(instance.dim());
        instance.arrival_index = self.seen;
        instance.synthetic_id = 0;
        self.seen += 1;
        let mut step = StepDiagnostics {
            t: instance.arrival_index,
            ..Default::default()
        };

        let votes = self.votes(&instance.features)?;
        self.trackers.update(instance.label, &votes);

        self.stm.push(instance.clone())?;
        while self.stm.len() > self.config.max_stm {
            self.stm.pop_oldest();
        }

        // cleaning deletes outright
        step.theta = distance_threshold(self.stm.instances(), &instance, self.config.k);
        if let Some(theta) = step.theta {
            let is = inconsistent_set(self.ltm.instances(), &instance, theta, self.config.k);
            if !is.is_empty() {
                let gone = self.ltm.remove_ids(&is);
                (step.ltm_deleted_pos, step.ltm_deleted_neg) = counts(&gone);
            }
        }

        if self.seen.is_multiple_of(self.config.adapt_interval as u64) {
            self.adapt_stm(&mut step)?;
        }

        if let Some(r) = compress(&mut self.ltm, self.config.max_ltm, &mut self.rng, &mut self.next_serial)? {
            step.compressions += r.rounds;
        }

        step.set_sizes(&self.stm, &self.ltm, None);
        self.log.finish_step(step);
        Ok(&self.log.last)
    }

    /// Candidate sizes are the full STM, half and quarter, never below
    /// `min_stm`; ties favour the larger window.
    fn adapt_stm(&mut self, step: &mut StepDiagnostics) -> Result<()> {
        let len = self.stm.len();
        let mut sizes = vec![len];
        for div in [2, 4] {
            let s = len / div;
            if s >= self.config.min_stm {
                sizes.push(s);
            }
        }
        if sizes.len() == 1 {
            return Ok(());
        }
        let all = self.stm.instances();
        let mut best = (len, f64::NEG_INFINITY);
        for &s in &sizes {
            let score = interleaved_balanced_accuracy(&all[len - s..], self.config.k, self.config.epsilon_dist);
            if score > best.1 {
                best = (s, score);
            }
        }
        if best.0 == len {
            return Ok(());
        }
        let mut prefix = self.stm.drain_oldest(len - best.0);
        let dropped = clean_against(&mut prefix, self.stm.instances(), self.config.k);
        (step.transfer_cleaned_pos, step.transfer_cleaned_neg) = counts(&dropped);
        (step.transferred_pos, step.transferred_neg) = counts(&prefix);
        self.ltm.extend(prefix)?;
        // an STM shrink plays the role of a detected drift
        step.drift = true;
        Ok(())
    }

    pub fn snapshot_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}
