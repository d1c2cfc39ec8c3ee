use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use driftmem::dataset::{load_csv_dataset, write_csv_stream, MinMaxNormalizer};
use driftmem::eval::{export_result, format_sig9, prequential_run, ExportPaths, PrequentialResult, RunSummary};
use driftmem::generators::Preset;
use driftmem::{Dam3Model, LabeledInstance, SamKnnBaseline};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{DatasetSource, ExperimentConfig, ModelKind};
use crate::stats::MeanStd;

/// Environment variable capping the worker pool.
pub const THREADS_ENV: &str = "DRIFTMEM_THREADS";

pub struct GeneratedFiles {
    pub stream: PathBuf,
    pub metadata: PathBuf,
}

/// Writes `<preset>.csv` and `<preset>.json` into `out`.
pub fn generate(preset: Preset, n: usize, seed: u64, out: &Path) -> Result<GeneratedFiles> {
    ensure!(n > 0, "n must be positive");
    fs::create_dir_all(out)?;
    let stream = preset.generate(n, seed)?;
    let files = GeneratedFiles {
        stream: out.join(format!("{}.csv", preset.name())),
        metadata: out.join(format!("{}.json", preset.name())),
    };
    write_csv_stream(&files.stream, &stream)?;
    write_json(&files.metadata, &preset.metadata(n, seed))?;
    Ok(files)
}

pub fn load_stream(cfg: &ExperimentConfig, seed: u64) -> Result<Vec<LabeledInstance>> {
    match cfg.source()? {
        DatasetSource::Preset(p) => Ok(p.generate(cfg.n.unwrap_or(p.default_len()), seed)?),
        DatasetSource::Csv(path) => {
            let mut stream = load_csv_dataset(&path, &cfg.csv.schema())?;
            if cfg.csv.normalize {
                if let Some(norm) = MinMaxNormalizer::fit(&stream) {
                    norm.apply_all(&mut stream);
                }
            }
            if let Some(n) = cfg.n {
                stream.truncate(n);
            }
            Ok(stream)
        }
    }
}

pub fn run_model(kind: ModelKind, cfg: &ExperimentConfig, seed: u64, stream: Vec<LabeledInstance>) -> Result<PrequentialResult> {
    let result = match kind {
        ModelKind::Dam3 => prequential_run(&mut Dam3Model::new(cfg.dam3_config(seed))?, stream, cfg.window)?,
        ModelKind::Baseline => {
            prequential_run(&mut SamKnnBaseline::new(cfg.baseline_config(seed))?, stream, cfg.window)?
        }
    };
    Ok(result)
}

/// One finished (model, seed) run.
pub struct SeedRun {
    pub model: ModelKind,
    pub seed: u64,
    pub dir: PathBuf,
    pub paths: ExportPaths,
    pub result: PrequentialResult,
}

fn seed_dir(out: &Path, model: ModelKind, seed: u64) -> PathBuf {
    out.join(model.name()).join(format!("seed_{seed}"))
}

fn count_rows(path: &Path) -> Result<usize> {
    let mut r = csv::Reader::from_path(path)?;
    let mut n = 0;
    for rec in r.records() {
        rec?;
        n += 1;
    }
    Ok(n)
}

/// Both CSVs must hold exactly one row per stream instance.
fn verify(paths: &ExportPaths, expected: usize) -> Result<()> {
    for path in [&paths.metrics, &paths.diagnostics] {
        let rows = count_rows(path)?;
        ensure!(rows == expected, "{} has {rows} rows, expected {expected}", path.display());
    }
    Ok(())
}

pub fn worker_pool() -> Result<rayon::ThreadPool> {
    let threads = match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .parse::<usize>()
            .ok()
            .filter(|&t| t > 0)
            .with_context(|| format!("{THREADS_ENV} must be a positive integer, got `{v}`"))?,
        Err(_) => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    Ok(rayon::ThreadPoolBuilder::new().num_threads(threads).build()?)
}

fn run_jobs(cfg: &ExperimentConfig, models: &[ModelKind]) -> Result<Vec<SeedRun>> {
    let jobs: Vec<(ModelKind, u64)> = cfg
        .seeds
        .iter()
        .flat_map(|&s| models.iter().map(move |&m| (m, s)))
        .collect();
    let pool = worker_pool()?;
    let runs: Vec<Result<SeedRun>> = pool.install(|| {
        jobs.par_iter()
            .map(|&(model, seed)| {
                let stream = load_stream(cfg, seed)?;
                let n = stream.len();
                let result = run_model(model, cfg, seed, stream)?;
                let dir = seed_dir(&cfg.out, model, seed);
                let paths = export_result(&result, &dir)?;
                verify(&paths, n)?;
                log::info!("{model} seed {seed}: {n} instances in {:.2?}", result.elapsed);
                Ok(SeedRun {
                    model,
                    seed,
                    dir,
                    paths,
                    result,
                })
            })
            .collect()
    });
    runs.into_iter().collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct Aggregate {
    pub model: String,
    pub dataset: String,
    pub seeds: Vec<u64>,
    pub g_mean: MeanStd,
    pub balanced_accuracy: MeanStd,
    pub recall_pos: MeanStd,
    pub recall_neg: MeanStd,
    pub drift_events: MeanStd,
}

pub const AGGREGATE_METRICS: [&str; 5] = ["g_mean", "balanced_accuracy", "recall_pos", "recall_neg", "drift_events"];

pub fn metric_of(s: &RunSummary, name: &str) -> Option<f64> {
    Some(match name {
        "g_mean" => s.g_mean,
        "balanced_accuracy" => s.balanced_accuracy,
        "recall_pos" => s.recall_pos,
        "recall_neg" => s.recall_neg,
        "drift_events" => s.drift_events as f64,
        "final_ltm_ir" => return s.final_ltm_ir,
        "minority_lost_from_ltm" => return s.minority_lost_from_ltm.map(|v| v as f64),
        _ => return None,
    })
}

fn aggregate(cfg: &ExperimentConfig, model: ModelKind, runs: &[&SeedRun]) -> Aggregate {
    let summaries: Vec<RunSummary> = runs.iter().map(|r| RunSummary::from_result(&r.result)).collect();
    let stat = |name: &str| MeanStd::of(summaries.iter().filter_map(|s| metric_of(s, name)));
    Aggregate {
        model: model.name().into(),
        dataset: cfg.dataset.clone(),
        seeds: runs.iter().map(|r| r.seed).collect(),
        g_mean: stat("g_mean"),
        balanced_accuracy: stat("balanced_accuracy"),
        recall_pos: stat("recall_pos"),
        recall_neg: stat("recall_neg"),
        drift_events: stat("drift_events"),
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

#[derive(Serialize)]
struct Timing {
    model: String,
    seed: u64,
    seconds: f64,
}

fn write_common(cfg: &ExperimentConfig, runs: &[SeedRun]) -> Result<()> {
    fs::write(cfg.out.join("config.toml"), cfg.to_toml()?)?;
    // wall-clock numbers live apart from the deterministic outputs
    let timing: Vec<Timing> = runs
        .iter()
        .map(|r| Timing {
            model: r.model.name().into(),
            seed: r.seed,
            seconds: r.result.elapsed.as_secs_f64(),
        })
        .collect();
    write_json(&cfg.out.join("timing.json"), &timing)
}

pub struct RunOutcome {
    pub runs: Vec<SeedRun>,
    pub aggregate: Aggregate,
    pub aggregate_path: PathBuf,
}

/// Runs the configured model once per seed.
pub fn run(cfg: &ExperimentConfig) -> Result<RunOutcome> {
    fs::create_dir_all(&cfg.out)?;
    let runs = run_jobs(cfg, &[cfg.model])?;
    let all: Vec<&SeedRun> = runs.iter().collect();
    let aggregate = aggregate(cfg, cfg.model, &all);
    let aggregate_path = cfg.out.join(cfg.model.name()).join("aggregate.json");
    write_json(&aggregate_path, &aggregate)?;
    write_common(cfg, &runs)?;
    Ok(RunOutcome {
        runs,
        aggregate,
        aggregate_path,
    })
}

pub const COMPARE_METRICS: [&str; 7] = [
    "g_mean",
    "balanced_accuracy",
    "recall_pos",
    "recall_neg",
    "drift_events",
    "final_ltm_ir",
    "minority_lost_from_ltm",
];

pub struct CompareOutcome {
    pub runs: Vec<SeedRun>,
    pub aggregates: Vec<Aggregate>,
    pub comparison: PathBuf,
    pub ltm_ir: PathBuf,
}

impl CompareOutcome {
    pub fn result(&self, model: ModelKind, seed: u64) -> Option<&PrequentialResult> {
        self.runs
            .iter()
            .find(|r| r.model == model && r.seed == seed)
            .map(|r| &r.result)
    }
}

fn cell(v: Option<f64>) -> String {
    format_sig9(v.unwrap_or(f64::NAN))
}

/// Runs DAM3 and the baseline on identical streams and tabulates
/// `dam3 - baseline` per metric, per seed and on the seed mean.
pub fn compare(cfg: &ExperimentConfig) -> Result<CompareOutcome> {
    fs::create_dir_all(&cfg.out)?;
    let runs = run_jobs(cfg, &ModelKind::ALL)?;
    let pick = |m: ModelKind| -> Vec<&SeedRun> { runs.iter().filter(|r| r.model == m).collect() };
    let (dam3, base) = (pick(ModelKind::Dam3), pick(ModelKind::Baseline));
    let mut aggregates = Vec::new();
    for (kind, group) in [(ModelKind::Dam3, &dam3), (ModelKind::Baseline, &base)] {
        let agg = aggregate(cfg, kind, group);
        write_json(&cfg.out.join(kind.name()).join("aggregate.json"), &agg)?;
        aggregates.push(agg);
    }

    let comparison = cfg.out.join("comparison.csv");
    let mut w = csv::Writer::from_path(&comparison)?;
    w.write_record(["seed", "metric", "dam3", "samknn-baseline", "delta"])?;
    let mut sums: Vec<(Vec<f64>, Vec<f64>)> = vec![(vec![], vec![]); COMPARE_METRICS.len()];
    for (a, b) in dam3.iter().zip(&base) {
        if a.seed != b.seed {
            bail!("internal error: seed mismatch in comparison");
        }
        let (sa, sb) = (RunSummary::from_result(&a.result), RunSummary::from_result(&b.result));
        for (i, name) in COMPARE_METRICS.iter().enumerate() {
            let (va, vb) = (metric_of(&sa, name), metric_of(&sb, name));
            if let (Some(x), Some(y)) = (va, vb) {
                sums[i].0.push(x);
                sums[i].1.push(y);
            }
            let delta = va.zip(vb).map(|(x, y)| x - y);
            w.write_record([a.seed.to_string(), name.to_string(), cell(va), cell(vb), cell(delta)])?;
        }
    }
    for (i, name) in COMPARE_METRICS.iter().enumerate() {
        let ma = MeanStd::of(sums[i].0.iter().copied()).mean;
        let mb = MeanStd::of(sums[i].1.iter().copied()).mean;
        w.write_record(["mean".to_string(), name.to_string(), cell(ma), cell(mb), cell(ma.zip(mb).map(|(x, y)| x - y))])?;
    }
    w.flush()?;

    // per-step LTM imbalance ratio of both models, one row per (seed, t)
    let ltm_ir = cfg.out.join("ltm_ir.csv");
    let mut w = csv::Writer::from_path(&ltm_ir)?;
    w.write_record(["seed", "t", "dam3_ltm_ir", "samknn-baseline_ltm_ir"])?;
    for (a, b) in dam3.iter().zip(&base) {
        let (ia, ib) = (a.result.ltm_ir_series(), b.result.ltm_ir_series());
        for (t, (x, y)) in ia.iter().zip(&ib).enumerate() {
            w.write_record([a.seed.to_string(), t.to_string(), cell(*x), cell(*y)])?;
        }
    }
    w.flush()?;
    write_common(cfg, &runs)?;
    Ok(CompareOutcome {
        runs,
        aggregates,
        comparison,
        ltm_ir,
    })
}
