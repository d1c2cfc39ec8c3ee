//! Experiment configuration: TOML file, flat key paths, flag overrides.
//!
//! Precedence, lowest first: built-in defaults, the `--config` file, then
//! command-line flags. Every source is reduced to a map of flat dotted keys
//! (`dam3.ws`, `csv.label_column`, ...) before the typed configuration is
//! built, so unknown keys are rejected the same way wherever they come from.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use driftmem::dam3::{Dam3Config, SamKnnConfig};
use driftmem::dataset::CsvSchema;
use driftmem::generators::Preset;
use serde::{Deserialize, Serialize};

pub type FlatConfig = BTreeMap<String, toml::Value>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelKind {
    #[serde(rename = "dam3")]
    Dam3,
    #[serde(rename = "samknn-baseline")]
    Baseline,
}

impl ModelKind {
    pub const ALL: [ModelKind; 2] = [ModelKind::Dam3, ModelKind::Baseline];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Dam3 => "dam3",
            ModelKind::Baseline => "samknn-baseline",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CsvOptions {
    pub label_column: String,
    pub positive: String,
    pub negative: Option<String>,
    pub features: Option<Vec<String>>,
    /// Min-max scale features using the whole file's range.
    pub normalize: bool,
}

impl Default for CsvOptions {
    fn default() -> Self {
        CsvOptions {
            label_column: "label".into(),
            positive: "1".into(),
            negative: None,
            features: None,
            normalize: false,
        }
    }
}

impl CsvOptions {
    pub fn schema(&self) -> CsvSchema {
        CsvSchema {
            label_column: self.label_column.clone(),
            positive_value: self.positive.clone(),
            negative_value: self.negative.clone(),
            feature_columns: self.features.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Preset name or path to a CSV file.
    #[serde(alias = "preset")]
    pub dataset: String,
    /// Stream length for presets (default: the preset's full length).
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default = "default_model")]
    pub model: ModelKind,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    /// Sliding metric window.
    #[serde(default = "default_window")]
    pub window: usize,
    #[serde(default)]
    pub csv: CsvOptions,
    #[serde(default)]
    pub dam3: Dam3Config,
}

fn default_model() -> ModelKind {
    ModelKind::Dam3
}

fn default_seeds() -> Vec<u64> {
    vec![0]
}

fn default_out() -> PathBuf {
    PathBuf::from("driftmem-out")
}

fn default_window() -> usize {
    driftmem::eval::DEFAULT_METRIC_WINDOW
}

/// Where the instances come from.
#[derive(Clone, Debug, PartialEq)]
pub enum DatasetSource {
    Preset(Preset),
    Csv(PathBuf),
}

impl ExperimentConfig {
    pub fn from_flat(flat: &FlatConfig) -> Result<Self> {
        let mut root = toml::Table::new();
        for (key, value) in flat {
            insert_path(&mut root, key, value.clone())?;
        }
        // `seed` is shorthand for a one-element `seeds`
        if let Some(seed) = root.remove("seed") {
            if root.contains_key("seeds") {
                bail!("give either `seed` or `seeds`, not both");
            }
            let seeds = match seed {
                toml::Value::Array(a) => a,
                v => vec![v],
            };
            root.insert("seeds".into(), toml::Value::Array(seeds));
        }
        let cfg: ExperimentConfig = toml::Value::Table(root)
            .try_into()
            .context("invalid experiment configuration")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            bail!("at least one seed is required");
        }
        if self.n == Some(0) {
            bail!("n must be positive");
        }
        if self.window == 0 {
            bail!("window must be positive");
        }
        self.dam3.validate()?;
        SamKnnConfig::from(&self.dam3).validate()?;
        self.source()?;
        Ok(())
    }

    pub fn source(&self) -> Result<DatasetSource> {
        if self.dataset.to_ascii_lowercase().ends_with(".csv") || Path::new(&self.dataset).is_file() {
            let path = PathBuf::from(&self.dataset);
            if !path.is_file() {
                bail!("dataset not found: {}", path.display());
            }
            return Ok(DatasetSource::Csv(path));
        }
        Ok(DatasetSource::Preset(Preset::parse(&self.dataset)?))
    }

    pub fn dam3_config(&self, seed: u64) -> Dam3Config {
        self.dam3.clone().with_seed(seed)
    }

    pub fn baseline_config(&self, seed: u64) -> SamKnnConfig {
        SamKnnConfig::from(&self.dam3_config(seed))
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }
}

fn insert_path(root: &mut toml::Table, key: &str, value: toml::Value) -> Result<()> {
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        bail!("malformed configuration key `{key}`");
    }
    let mut table = root;
    for part in &parts[..parts.len() - 1] {
        let entry = table
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        table = match entry {
            toml::Value::Table(t) => t,
            _ => bail!("configuration key `{key}` conflicts with a scalar value"),
        };
    }
    table.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

/// Flattens nested tables into dotted keys. Arrays stay values.
pub fn flatten(table: &toml::Table) -> FlatConfig {
    fn walk(prefix: &str, table: &toml::Table, out: &mut FlatConfig) {
        for (k, v) in table {
            let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
            match v {
                toml::Value::Table(t) => walk(&key, t, out),
                v => {
                    out.insert(key, v.clone());
                }
            }
        }
    }
    let mut out = FlatConfig::new();
    walk("", table, &mut out);
    out
}

pub fn read_config_file(path: &Path) -> Result<FlatConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let table: toml::Table = text.parse().with_context(|| format!("parsing {}", path.display()))?;
    Ok(flatten(&table))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat(pairs: &[(&str, toml::Value)]) -> FlatConfig {
        pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
    }

    #[test]
    fn nested_keys_reach_model_config() {
        let cfg = ExperimentConfig::from_flat(&flat(&[
            ("dataset", "sea_s".into()),
            ("dam3.ws", 40.into()),
            ("dam3.smote.k_interp", 3.into()),
            ("seed", 7.into()),
        ]))
        .unwrap();
        assert_eq!(cfg.dam3.ws, 40);
        assert_eq!(cfg.dam3.smote.k_interp, 3);
        assert_eq!(cfg.seeds, vec![7]);
        assert_eq!(cfg.source().unwrap(), DatasetSource::Preset(Preset::SeaS));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        for key in ["dam3.wss", "bogus", "csv.label"] {
            let r = ExperimentConfig::from_flat(&flat(&[("dataset", "sea_s".into()), (key, 1.into())]));
            assert!(r.is_err(), "{key}");
        }
    }

    #[test]
    fn invalid_values_are_rejected() {
        assert!(ExperimentConfig::from_flat(&flat(&[("dataset", "sea_s".into()), ("seeds", toml::Value::Array(vec![]))])).is_err());
        assert!(ExperimentConfig::from_flat(&flat(&[("dataset", "sea_s".into()), ("dam3.alpha", 2.0.into())])).is_err());
        assert!(ExperimentConfig::from_flat(&flat(&[("dataset", "nope".into())])).is_err());
        assert!(ExperimentConfig::from_flat(&flat(&[("dataset", "missing.csv".into())])).is_err());
    }

    #[test]
    fn file_round_trip_through_flat_keys() {
        let text = "dataset = \"hyper_fast\"\nn = 100\n[dam3]\nalpha = 0.05\n";
        let table: toml::Table = text.parse().unwrap();
        let f = flatten(&table);
        assert!(f.contains_key("dam3.alpha"));
        let cfg = ExperimentConfig::from_flat(&f).unwrap();
        assert_eq!(cfg.dam3.alpha, 0.05);
        assert_eq!(cfg.n, Some(100));
    }
}
