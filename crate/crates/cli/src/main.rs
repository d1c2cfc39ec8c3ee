use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand};
use driftmem::generators::Preset;
use driftmem_cli::config::{read_config_file, FlatConfig};
use driftmem_cli::{compare, generate, run, ExperimentConfig};

/// Drift-aware memory models for imbalanced binary streams.
#[derive(Parser)]
#[command(name = "driftmem", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic benchmark stream and its metadata.
    Generate {
        /// sea_s, sea_g, hyper_fast or hyper_slow
        #[arg(required_unless_present = "preset_flag")]
        preset: Option<String>,
        #[arg(long = "preset", conflicts_with = "preset")]
        preset_flag: Option<String>,
        /// Stream length (default: the preset's full length).
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        n: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Prequential run of one model, once per seed.
    Run(ExperimentArgs),
    /// Run DAM3 and the baseline on identical streams and tabulate deltas.
    Compare(ExperimentArgs),
}

/// Values given here override the `--config` file.
#[derive(Args)]
struct ExperimentArgs {
    /// TOML file with flat or nested keys (dataset, n, model, seeds, out,
    /// window, csv.*, dam3.*).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Preset name or CSV path.
    #[arg(long)]
    dataset: Option<String>,
    #[arg(long, conflicts_with = "dataset")]
    preset: Option<String>,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    n: Option<u64>,
    /// dam3 or samknn-baseline (ignored by compare).
    #[arg(long)]
    model: Option<String>,
    /// One or more seeds, repeated or comma separated.
    #[arg(long = "seed", value_delimiter = ',', num_args = 1..)]
    seeds: Vec<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Sliding metric window.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    window: Option<u64>,
    #[arg(long = "dam3.k")]
    k: Option<u64>,
    #[arg(long = "dam3.ws")]
    ws: Option<u64>,
    #[arg(long = "dam3.ms")]
    ms: Option<u64>,
    #[arg(long = "dam3.alpha")]
    alpha: Option<f64>,
    #[arg(long = "dam3.max_stm")]
    max_stm: Option<u64>,
    #[arg(long = "dam3.max_ltm")]
    max_ltm: Option<u64>,
    #[arg(long = "dam3.max_wm")]
    max_wm: Option<u64>,
    #[arg(long = "dam3.epsilon_dist")]
    epsilon_dist: Option<f64>,
    #[arg(long = "dam3.smote.k_interp")]
    k_interp: Option<u64>,
    #[arg(long = "dam3.smote.m_danger")]
    m_danger: Option<u64>,
    /// Any other key, e.g. `--set csv.label_column=class`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

fn int(v: u64) -> toml::Value {
    toml::Value::Integer(v as i64)
}

fn parse_value(raw: &str) -> toml::Value {
    // a bare TOML value if it parses as one, a string otherwise
    format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

impl ExperimentArgs {
    fn resolve(&self, compare: bool) -> Result<ExperimentConfig> {
        let mut flat = match &self.config {
            Some(path) => read_config_file(path)?,
            None => FlatConfig::new(),
        };
        if flat.contains_key("preset") && self.dataset.is_some() {
            flat.remove("preset");
        }
        if flat.contains_key("dataset") && self.preset.is_some() {
            flat.remove("dataset");
        }
        let mut put = |k: &str, v: Option<toml::Value>| {
            if let Some(v) = v {
                flat.insert(k.to_string(), v);
            }
        };
        put("dataset", self.dataset.clone().map(toml::Value::String));
        put("preset", self.preset.clone().map(toml::Value::String));
        put("n", self.n.map(int));
        if !compare {
            put("model", self.model.clone().map(toml::Value::String));
        }
        if !self.seeds.is_empty() {
            put("seeds", Some(toml::Value::Array(self.seeds.iter().map(|&s| int(s)).collect())));
        }
        put("out", self.out.as_ref().map(|p| toml::Value::String(p.display().to_string())));
        put("window", self.window.map(int));
        put("dam3.k", self.k.map(int));
        put("dam3.ws", self.ws.map(int));
        put("dam3.ms", self.ms.map(int));
        put("dam3.alpha", self.alpha.map(toml::Value::Float));
        put("dam3.max_stm", self.max_stm.map(int));
        put("dam3.max_ltm", self.max_ltm.map(int));
        put("dam3.max_wm", self.max_wm.map(int));
        put("dam3.epsilon_dist", self.epsilon_dist.map(toml::Value::Float));
        put("dam3.smote.k_interp", self.k_interp.map(int));
        put("dam3.smote.m_danger", self.m_danger.map(int));
        for kv in &self.set {
            let Some((k, v)) = kv.split_once('=') else {
                bail!("--set expects KEY=VALUE, got `{kv}`");
            };
            flat.insert(k.trim().to_string(), parse_value(v.trim()));
        }
        if flat.contains_key("seeds") {
            flat.remove("seed");
        }
        if !flat.contains_key("dataset") && !flat.contains_key("preset") {
            bail!("no dataset given (use --dataset, --preset or a config file)");
        }
        ExperimentConfig::from_flat(&flat)
    }
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate {
            preset,
            preset_flag,
            n,
            seed,
            out,
        } => {
            let preset = Preset::parse(preset.or(preset_flag).as_deref().unwrap_or_default())?;
            let n = n.map_or(preset.default_len(), |n| n as usize);
            let files = generate(preset, n, seed, &out)?;
            println!("{}", files.stream.display());
            println!("{}", files.metadata.display());
        }
        Command::Run(args) => {
            let cfg = args.resolve(false)?;
            let outcome = run(&cfg)?;
            for r in &outcome.runs {
                let m = r.result.final_cumulative();
                println!(
                    "{} seed {}: g_mean {} balanced_accuracy {} -> {}",
                    r.model,
                    r.seed,
                    driftmem::eval::format_sig9(m.g_mean),
                    driftmem::eval::format_sig9(m.balanced_accuracy),
                    r.dir.display()
                );
            }
            println!("{}", outcome.aggregate_path.display());
        }
        Command::Compare(args) => {
            let cfg = args.resolve(true)?;
            let outcome = compare(&cfg)?;
            print!("{}", std::fs::read_to_string(&outcome.comparison)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
