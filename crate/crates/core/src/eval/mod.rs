//! Prequential (test-then-train) evaluation and result export.

mod export;
mod metrics;

pub use export::{export_result, format_sig9, ExportPaths, RunSummary, DIAGNOSTICS_COLUMNS, METRICS_COLUMNS};
pub use metrics::{MetricSet, MetricTracker, DEFAULT_METRIC_WINDOW};

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::dam3::{Dam3Model, SamKnnBaseline, StepDiagnostics, Submodel, TransferTotals};
use crate::error::{DriftMemError, Result};
use crate::types::{Label, LabeledInstance};

/// A model that can be scored prequentially.
pub trait StreamClassifier {
    fn name(&self) -> &str;

    /// Predicted label and, for ensembles, the submodel that produced it.
    fn predict(&self, x: &[f64]) -> Result<(Label, Option<Submodel>)>;

    /// Learns from a labeled instance. Memory models return the step's
    /// diagnostics.
    fn learn(&mut self, instance: LabeledInstance) -> Result<Option<StepDiagnostics>>;

    fn totals(&self) -> Option<TransferTotals> {
        None
    }

    /// Minority instances that left the LTM for good (deleted, or parked in
    /// the working memory and never reinstated).
    fn minority_lost_from_ltm(&self) -> Option<u64> {
        None
    }
}

impl StreamClassifier for Dam3Model {
    fn name(&self) -> &str {
        "dam3"
    }

    fn predict(&self, x: &[f64]) -> Result<(Label, Option<Submodel>)> {
        let p = self.predict_detailed(x)?;
        Ok((p.label, p.chosen))
    }

    fn learn(&mut self, instance: LabeledInstance) -> Result<Option<StepDiagnostics>> {
        self.train_step(instance).map(|s| Some(s.clone()))
    }

    fn totals(&self) -> Option<TransferTotals> {
        Some(self.log().totals.clone())
    }

    fn minority_lost_from_ltm(&self) -> Option<u64> {
        Some(self.log().minority_never_returned() as u64)
    }
}

impl StreamClassifier for SamKnnBaseline {
    fn name(&self) -> &str {
        "samknn-baseline"
    }

    fn predict(&self, x: &[f64]) -> Result<(Label, Option<Submodel>)> {
        let p = self.predict_detailed(x)?;
        Ok((p.label, p.chosen))
    }

    fn learn(&mut self, instance: LabeledInstance) -> Result<Option<StepDiagnostics>> {
        self.train_step(instance).map(|s| Some(s.clone()))
    }

    fn totals(&self) -> Option<TransferTotals> {
        Some(self.log().totals.clone())
    }

    fn minority_lost_from_ltm(&self) -> Option<u64> {
        Some(self.log().totals.ltm_deleted_pos)
    }
}

impl<M: StreamClassifier + ?Sized> StreamClassifier for Box<M> {
    fn name(&self) -> &str {
        (**self).name()
    }

    fn predict(&self, x: &[f64]) -> Result<(Label, Option<Submodel>)> {
        (**self).predict(x)
    }

    fn learn(&mut self, instance: LabeledInstance) -> Result<Option<StepDiagnostics>> {
        (**self).learn(instance)
    }

    fn totals(&self) -> Option<TransferTotals> {
        (**self).totals()
    }

    fn minority_lost_from_ltm(&self) -> Option<u64> {
        (**self).minority_lost_from_ltm()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub t: u64,
    pub y_true: Label,
    pub y_pred: Label,
    pub chosen: Option<Submodel>,
    pub cumulative: MetricSet,
    pub windowed: MetricSet,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrequentialResult {
    pub model: String,
    pub window: usize,
    pub records: Vec<StepRecord>,
    /// One entry per step for memory models, empty otherwise.
    pub diagnostics: Vec<StepDiagnostics>,
    pub totals: Option<TransferTotals>,
    pub minority_lost_from_ltm: Option<u64>,
    /// Wall-clock time; excluded from [`PrequentialResult::same_outcome`].
    pub elapsed: Duration,
}

impl PrequentialResult {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn final_cumulative(&self) -> MetricSet {
        self.records
            .last()
            .map(|r| r.cumulative)
            .unwrap_or(MetricSet::from_recalls(1.0, 1.0))
    }

    pub fn final_windowed(&self) -> MetricSet {
        self.records
            .last()
            .map(|r| r.windowed)
            .unwrap_or(MetricSet::from_recalls(1.0, 1.0))
    }

    pub fn drift_events(&self) -> u64 {
        self.diagnostics.iter().filter(|d| d.drift).count() as u64
    }

    /// LTM imbalance ratio per step (`None` where undefined).
    pub fn ltm_ir_series(&self) -> Vec<Option<f64>> {
        self.diagnostics.iter().map(|d| d.ltm_ir()).collect()
    }

    /// Equality of everything but the timing.
    pub fn same_outcome(&self, other: &PrequentialResult) -> bool {
        self.model == other.model
            && self.window == other.window
            && self.records == other.records
            && self.diagnostics == other.diagnostics
            && self.totals == other.totals
            && self.minority_lost_from_ltm == other.minority_lost_from_ltm
    }
}

/// Scores each instance before learning from it.
pub fn prequential_run<M, I>(model: &mut M, stream: I, window: usize) -> Result<PrequentialResult>
where
    M: StreamClassifier + ?Sized,
    I: IntoIterator<Item = LabeledInstance>,
{
    if window == 0 {
        return Err(DriftMemError::InvalidArgument("metric window must be positive".into()));
    }
    let start = Instant::now();
    let mut metrics = MetricTracker::new(window);
    let mut records = Vec::new();
    let mut diagnostics = Vec::new();
    for (t, instance) in stream.into_iter().enumerate() {
        let (y_pred, chosen) = model.predict(&instance.features)?;
        metrics.record(instance.label, y_pred);
        records.push(StepRecord {
            t: t as u64,
            y_true: instance.label,
            y_pred,
            chosen,
            cumulative: metrics.cumulative(),
            windowed: metrics.windowed(),
        });
        if let Some(mut d) = model.learn(instance)? {
            d.t = t as u64;
            diagnostics.push(d);
        }
    }
    Ok(PrequentialResult {
        model: model.name().to_string(),
        window,
        records,
        diagnostics,
        totals: model.totals(),
        minority_lost_from_ltm: model.minority_lost_from_ltm(),
        elapsed: start.elapsed(),
    })
}
