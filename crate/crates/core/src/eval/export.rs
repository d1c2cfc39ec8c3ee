use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{MetricSet, PrequentialResult};
use crate::dam3::TransferTotals;
use crate::error::Result;

pub const METRICS_COLUMNS: [&str; 12] = [
    "t",
    "y_true",
    "y_pred",
    "chosen",
    "balanced_accuracy",
    "g_mean",
    "recall_pos",
    "recall_neg",
    "win_balanced_accuracy",
    "win_g_mean",
    "win_recall_pos",
    "win_recall_neg",
];

pub const DIAGNOSTICS_COLUMNS: [&str; 25] = [
    "t",
    "stm_pos",
    "stm_neg",
    "ltm_pos",
    "ltm_neg",
    "wm_pos",
    "wm_neg",
    "stm_ir",
    "ltm_ir",
    "wm_ir",
    "ltm_to_wm_pos",
    "ltm_to_wm_neg",
    "wm_to_ltm_pos",
    "wm_to_ltm_neg",
    "drift_flag",
    "noise_removed_pos",
    "noise_removed_neg",
    "ltm_deleted_pos",
    "ltm_deleted_neg",
    "transfer_cleaned_pos",
    "transfer_cleaned_neg",
    "transferred_pos",
    "transferred_neg",
    "compressions",
    "theta",
];

/// Fixed nine-significant-digit rendering; `nan` for undefined values.
pub fn format_sig9(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let e = v.abs().log10().floor() as i32;
    if (-5..15).contains(&e) {
        format!("{:.*}", (8 - e).max(0) as usize, v)
    } else {
        format!("{v:.8e}")
    }
}

fn opt(v: Option<f64>) -> String {
    format_sig9(v.unwrap_or(f64::NAN))
}

/// Final metrics and counters of one run, as written to `summary.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub model: String,
    pub n: usize,
    pub window: usize,
    pub g_mean: f64,
    pub balanced_accuracy: f64,
    pub recall_pos: f64,
    pub recall_neg: f64,
    pub windowed: MetricSet,
    pub drift_events: u64,
    pub compression_events: u64,
    pub final_ltm_ir: Option<f64>,
    pub minority_lost_from_ltm: Option<u64>,
    pub totals: Option<TransferTotals>,
}

impl RunSummary {
    pub fn from_result(r: &PrequentialResult) -> Self {
        let m = r.final_cumulative();
        RunSummary {
            model: r.model.clone(),
            n: r.len(),
            window: r.window,
            g_mean: m.g_mean,
            balanced_accuracy: m.balanced_accuracy,
            recall_pos: m.recall_pos,
            recall_neg: m.recall_neg,
            windowed: r.final_windowed(),
            drift_events: r.drift_events(),
            compression_events: r.diagnostics.iter().map(|d| d.compressions as u64).sum(),
            final_ltm_ir: r.diagnostics.last().and_then(|d| d.ltm_ir()),
            minority_lost_from_ltm: r.minority_lost_from_ltm,
            totals: r.totals.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExportPaths {
    pub metrics: PathBuf,
    pub diagnostics: PathBuf,
    pub summary: PathBuf,
}

/// Writes `metrics.csv`, `diagnostics.csv` and `summary.json` into `dir`
/// (created if missing).
pub fn export_result(result: &PrequentialResult, dir: &Path) -> Result<ExportPaths> {
    fs::create_dir_all(dir)?;
    let paths = ExportPaths {
        metrics: dir.join("metrics.csv"),
        diagnostics: dir.join("diagnostics.csv"),
        summary: dir.join("summary.json"),
    };

    let mut w = csv::Writer::from_path(&paths.metrics)?;
    w.write_record(METRICS_COLUMNS)?;
    for r in &result.records {
        let (c, wd) = (r.cumulative, r.windowed);
        w.write_record([
            r.t.to_string(),
            r.y_true.to_string(),
            r.y_pred.to_string(),
            r.chosen.map_or("none", |s| s.name()).to_string(),
            format_sig9(c.balanced_accuracy),
            format_sig9(c.g_mean),
            format_sig9(c.recall_pos),
            format_sig9(c.recall_neg),
            format_sig9(wd.balanced_accuracy),
            format_sig9(wd.g_mean),
            format_sig9(wd.recall_pos),
            format_sig9(wd.recall_neg),
        ])?;
    }
    w.flush()?;

    let mut w = csv::Writer::from_path(&paths.diagnostics)?;
    w.write_record(DIAGNOSTICS_COLUMNS)?;
    for d in &result.diagnostics {
        w.write_record([
            d.t.to_string(),
            d.stm_pos.to_string(),
            d.stm_neg.to_string(),
            d.ltm_pos.to_string(),
            d.ltm_neg.to_string(),
            d.wm_pos.to_string(),
            d.wm_neg.to_string(),
            opt(d.stm_ir()),
            opt(d.ltm_ir()),
            opt(d.wm_ir()),
            d.ltm_to_wm_pos.to_string(),
            d.ltm_to_wm_neg.to_string(),
            d.wm_to_ltm_pos.to_string(),
            d.wm_to_ltm_neg.to_string(),
            (d.drift as u8).to_string(),
            d.noise_removed_pos.to_string(),
            d.noise_removed_neg.to_string(),
            d.ltm_deleted_pos.to_string(),
            d.ltm_deleted_neg.to_string(),
            d.transfer_cleaned_pos.to_string(),
            d.transfer_cleaned_neg.to_string(),
            d.transferred_pos.to_string(),
            d.transferred_neg.to_string(),
            d.compressions.to_string(),
            opt(d.theta),
        ])?;
    }
    w.flush()?;

    let mut f = fs::File::create(&paths.summary)?;
    serde_json::to_writer_pretty(&mut f, &RunSummary::from_result(result))?;
    f.write_all(b"\n")?;
    Ok(paths)
}
