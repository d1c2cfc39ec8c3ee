//! Reproducible synthetic streams with controlled drift, imbalance and label noise.
//!
//! A [`ConceptSource`] draws feature vectors labeled by the concept in force
//! at an output position. [`apply_imbalance`] turns a source into a finite
//! stream whose class sequence follows an [`ImbalanceSchedule`] by rejection
//! sampling, so per-class feature distributions are left untouched.

mod hyperplane;
mod schedule;
mod sea;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use hyperplane::{HyperplaneSource, HyperplaneState, DIRECTION_FLIP_PROB, HYPERPLANE_DIM};
pub use schedule::{DriftKind, DriftSchedule, ImbalanceSchedule};
pub use sea::{SeaConcept, SeaSource, SEA_THRESHOLDS};

use crate::error::{DriftMemError, Result};
use crate::types::{Label, LabeledInstance};

/// Raw labeled draws; `t` is the output position the draw is made for.
pub trait ConceptSource {
    fn dim(&self) -> usize;
    fn sample(&mut self, t: u64) -> (Vec<f64>, Label);
}

/// Raw draws allowed per requested output instance before giving up.
pub const STARVATION_FACTOR: usize = 10;

pub(crate) fn sub_seed(seed: u64, stream: u64) -> u64 {
    // splitmix64 finaliser over (seed, stream)
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Rejection-samples `n` instances from `source` so that the emitted labels
/// are i.i.d. Bernoulli with `P(Positive) = 1 / (1 + r_t)`.
pub fn apply_imbalance<S: ConceptSource>(
    source: &mut S,
    schedule: &ImbalanceSchedule,
    n: usize,
    seed: u64,
) -> Result<Vec<LabeledInstance>> {
    select_stream(source, schedule, 0.0, n, seed)
}

/// Like [`apply_imbalance`], with label noise folded into the selection:
/// each emitted label disagrees with the concept with probability
/// `noise_rate`, independently of the class, and the class sequence still
/// follows the schedule exactly.
pub fn select_stream<S: ConceptSource>(
    source: &mut S,
    schedule: &ImbalanceSchedule,
    noise_rate: f64,
    n: usize,
    seed: u64,
) -> Result<Vec<LabeledInstance>> {
    schedule.validate()?;
    check_rate(noise_rate)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let budget = STARVATION_FACTOR * n.max(1);
    let mut draws = 0usize;
    let mut out = Vec::with_capacity(n);
    for t in 0..n as u64 {
        let p_pos = schedule.positive_probability(t, n as u64);
        let emitted = if rng.random_bool(p_pos) {
            Label::Positive
        } else {
            Label::Negative
        };
        let flipped = noise_rate > 0.0 && rng.random_bool(noise_rate);
        let wanted = if flipped { emitted.flipped() } else { emitted };
        let features = loop {
            if draws >= budget {
                return Err(DriftMemError::GeneratorStarvation {
                    needed: if wanted.is_positive() { "positive" } else { "negative" },
                    draws,
                });
            }
            draws += 1;
            let (x, y) = source.sample(t);
            if y == wanted {
                break x;
            }
        };
        out.push(LabeledInstance::new(features, emitted, t));
    }
    Ok(out)
}

fn check_rate(rate: f64) -> Result<()> {
    if (0.0..=1.0).contains(&rate) {
        Ok(())
    } else {
        Err(DriftMemError::InvalidArgument(format!(
            "noise rate {rate} outside [0, 1]"
        )))
    }
}

/// Flips each label independently with probability `rate`.
pub fn apply_noise(
    instances: impl IntoIterator<Item = LabeledInstance>,
    rate: f64,
    seed: u64,
) -> Result<Vec<LabeledInstance>> {
    check_rate(rate)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(instances
        .into_iter()
        .map(|mut inst| {
            if rate > 0.0 && rng.random_bool(rate) {
                inst.label = inst.label.flipped();
            }
            inst
        })
        .collect())
}

pub fn sea_stream(
    schedule: &DriftSchedule,
    imbalance: &ImbalanceSchedule,
    noise_rate: f64,
    n: usize,
    seed: u64,
) -> Result<Vec<LabeledInstance>> {
    check_n(n)?;
    schedule.validate()?;
    let mut source = SeaSource::new(schedule.clone(), sub_seed(seed, 1));
    select_stream(&mut source, imbalance, noise_rate, n, sub_seed(seed, 2))
}

pub fn hyperplane_stream(
    drift_magnitude: f64,
    imbalance: &ImbalanceSchedule,
    noise_rate: f64,
    n: usize,
    seed: u64,
) -> Result<Vec<LabeledInstance>> {
    check_n(n)?;
    if !drift_magnitude.is_finite() {
        return Err(DriftMemError::InvalidArgument("drift magnitude must be finite".into()));
    }
    let mut source = HyperplaneSource::new(drift_magnitude, sub_seed(seed, 1));
    select_stream(&mut source, imbalance, noise_rate, n, sub_seed(seed, 2))
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        Err(DriftMemError::InvalidArgument("stream length must be positive".into()))
    } else {
        Ok(())
    }
}

/// The four benchmark streams.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    SeaS,
    SeaG,
    HyperFast,
    HyperSlow,
}

pub const HYPER_FAST_MAGNITUDE: f64 = 0.01;
pub const HYPER_SLOW_MAGNITUDE: f64 = 0.001;

impl Preset {
    pub const ALL: [Preset; 4] = [Preset::SeaS, Preset::SeaG, Preset::HyperFast, Preset::HyperSlow];

    pub fn parse(name: &str) -> Result<Preset> {
        let key: String = name
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect::<String>()
            .to_ascii_lowercase();
        match key.as_str() {
            "seas" => Ok(Preset::SeaS),
            "seag" => Ok(Preset::SeaG),
            "hyperfast" => Ok(Preset::HyperFast),
            "hyperslow" => Ok(Preset::HyperSlow),
            _ => Err(DriftMemError::UnknownPreset(name.to_owned())),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Preset::SeaS => "sea_s",
            Preset::SeaG => "sea_g",
            Preset::HyperFast => "hyper_fast",
            Preset::HyperSlow => "hyper_slow",
        }
    }

    pub fn default_len(self) -> usize {
        match self {
            Preset::SeaS | Preset::SeaG => 100_000,
            Preset::HyperFast | Preset::HyperSlow => 50_000,
        }
    }

    pub fn dim(self) -> usize {
        match self {
            Preset::SeaS | Preset::SeaG => 3,
            Preset::HyperFast | Preset::HyperSlow => HYPERPLANE_DIM,
        }
    }

    pub fn noise_rate(self) -> f64 {
        match self {
            Preset::SeaS | Preset::HyperFast => 0.10,
            Preset::SeaG | Preset::HyperSlow => 0.05,
        }
    }

    pub fn drift_kind(self) -> DriftKind {
        match self {
            Preset::SeaS => DriftKind::Sudden,
            Preset::SeaG => DriftKind::Gradual,
            Preset::HyperFast | Preset::HyperSlow => DriftKind::Incremental,
        }
    }

    /// Change points at the quarters of an `n`-long run (SEA presets only).
    pub fn change_points(self, n: usize) -> Vec<u64> {
        match self {
            Preset::SeaS | Preset::SeaG => {
                let n = n as u64;
                vec![n / 4, n / 2, 3 * n / 4]
            }
            _ => Vec::new(),
        }
    }

    pub fn gradual_width(n: usize) -> u64 {
        (n as u64 / 50).max(1)
    }

    pub fn imbalance(self, n: usize) -> ImbalanceSchedule {
        match self {
            Preset::SeaS | Preset::HyperFast => ImbalanceSchedule::Static(10.0),
            Preset::SeaG => ImbalanceSchedule::PerConcept {
                ratios: vec![4.0, 5.0, 2.0, 10.0],
                change_points: self.change_points(n),
            },
            Preset::HyperSlow => ImbalanceSchedule::Ramp {
                start: 1.0,
                end: 100.0,
            },
        }
    }

    pub fn drift_magnitude(self) -> Option<f64> {
        match self {
            Preset::HyperFast => Some(HYPER_FAST_MAGNITUDE),
            Preset::HyperSlow => Some(HYPER_SLOW_MAGNITUDE),
            _ => None,
        }
    }

    pub fn generate(self, n: usize, seed: u64) -> Result<Vec<LabeledInstance>> {
        let imbalance = self.imbalance(n);
        match self {
            Preset::SeaS => sea_stream(
                &DriftSchedule::sudden(self.change_points(n))?,
                &imbalance,
                self.noise_rate(),
                n,
                seed,
            ),
            Preset::SeaG => sea_stream(
                &DriftSchedule::gradual(self.change_points(n), Self::gradual_width(n))?,
                &imbalance,
                self.noise_rate(),
                n,
                seed,
            ),
            Preset::HyperFast | Preset::HyperSlow => hyperplane_stream(
                self.drift_magnitude().unwrap_or_default(),
                &imbalance,
                self.noise_rate(),
                n,
                seed,
            ),
        }
    }

    pub fn drifts(self, n: usize) -> Vec<DriftMarker> {
        match self {
            Preset::SeaS | Preset::SeaG => self
                .change_points(n)
                .into_iter()
                .map(|position| DriftMarker::Point { position })
                .collect(),
            Preset::HyperFast | Preset::HyperSlow => vec![DriftMarker::Interval {
                start: 0,
                end: n as u64,
            }],
        }
    }

    pub fn metadata(self, n: usize, seed: u64) -> StreamMetadata {
        StreamMetadata {
            preset: self.name().to_owned(),
            n,
            seed,
            dim: self.dim(),
            noise_rate: self.noise_rate(),
            drift_kind: self.drift_kind(),
            change_points: self.change_points(n),
            drifts: self.drifts(n),
            imbalance: self.imbalance(n),
            drift_magnitude: self.drift_magnitude(),
        }
    }
}

/// A ground-truth drift: a change point or an interval of incremental drift.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum DriftMarker {
    Point { position: u64 },
    Interval { start: u64, end: u64 },
}

/// Injected drifts of a named dataset. CSV files have no known ground truth.
pub fn ground_truth_drifts(name: &str, n: usize) -> Result<Vec<DriftMarker>> {
    if name.to_ascii_lowercase().ends_with(".csv") {
        return Ok(Vec::new());
    }
    Ok(Preset::parse(name)?.drifts(n))
}

/// Sidecar description written next to a generated stream.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StreamMetadata {
    pub preset: String,
    pub n: usize,
    pub seed: u64,
    pub dim: usize,
    pub noise_rate: f64,
    pub drift_kind: DriftKind,
    pub change_points: Vec<u64>,
    pub drifts: Vec<DriftMarker>,
    pub imbalance: ImbalanceSchedule,
    pub drift_magnitude: Option<f64>,
}
