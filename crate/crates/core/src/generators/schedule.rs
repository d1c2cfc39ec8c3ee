use serde::{Deserialize, Serialize};

use crate::error::{DriftMemError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DriftKind {
    Sudden,
    Gradual,
    Incremental,
}

/// Where and how a generator switches concepts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriftSchedule {
    pub kind: DriftKind,
    pub change_points: Vec<u64>,
    /// Instances over which two concepts interleave (gradual drift only).
    pub gradual_width: u64,
}

impl DriftSchedule {
    pub fn none() -> Self {
        DriftSchedule {
            kind: DriftKind::Sudden,
            change_points: Vec::new(),
            gradual_width: 1,
        }
    }

    pub fn sudden(change_points: Vec<u64>) -> Result<Self> {
        let s = DriftSchedule {
            kind: DriftKind::Sudden,
            change_points,
            gradual_width: 1,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn gradual(change_points: Vec<u64>, width: u64) -> Result<Self> {
        let s = DriftSchedule {
            kind: DriftKind::Gradual,
            change_points,
            gradual_width: width,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.change_points.windows(2).any(|w| w[0] >= w[1]) {
            return Err(DriftMemError::InvalidArgument(
                "change points must be strictly increasing".into(),
            ));
        }
        if self.kind == DriftKind::Gradual && self.gradual_width == 0 {
            return Err(DriftMemError::InvalidArgument(
                "gradual drift needs a positive width".into(),
            ));
        }
        Ok(())
    }

    /// Index of the concept in force at `t` ignoring any transition blending.
    pub fn concept_index(&self, t: u64) -> usize {
        self.change_points.iter().take_while(|&&cp| cp <= t).count()
    }

    /// Probability that position `t` uses the newer concept of an ongoing
    /// gradual transition, with the transition's change point. `None` outside
    /// transitions.
    pub fn transition(&self, t: u64) -> Option<(usize, f64)> {
        if self.kind != DriftKind::Gradual {
            return None;
        }
        let w = self.gradual_width;
        self.change_points.iter().enumerate().find_map(|(i, &cp)| {
            (t >= cp && t < cp + w).then(|| (i + 1, (t - cp) as f64 / w as f64))
        })
    }
}

/// Class-ratio schedule; every `r` means a `1:r` minority:majority split.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImbalanceSchedule {
    Static(f64),
    PerConcept {
        ratios: Vec<f64>,
        change_points: Vec<u64>,
    },
    Ramp {
        start: f64,
        end: f64,
    },
}

impl ImbalanceSchedule {
    pub fn validate(&self) -> Result<()> {
        let bad = |r: f64| !(r.is_finite() && r >= 1.0);
        let ok = match self {
            ImbalanceSchedule::Static(r) => !bad(*r),
            ImbalanceSchedule::PerConcept { ratios, .. } => {
                !ratios.is_empty() && ratios.iter().all(|&r| !bad(r))
            }
            ImbalanceSchedule::Ramp { start, end } => !bad(*start) && !bad(*end),
        };
        if ok {
            Ok(())
        } else {
            Err(DriftMemError::InvalidArgument(
                "imbalance ratios must be finite and >= 1".into(),
            ))
        }
    }

    /// Ratio `r` at output position `t` of an `n`-long stream.
    pub fn ratio_at(&self, t: u64, n: u64) -> f64 {
        match self {
            ImbalanceSchedule::Static(r) => *r,
            ImbalanceSchedule::PerConcept {
                ratios,
                change_points,
            } => {
                let c = change_points.iter().take_while(|&&cp| cp <= t).count();
                ratios[c % ratios.len()]
            }
            ImbalanceSchedule::Ramp { start, end } => {
                let frac = if n > 1 { t as f64 / (n - 1) as f64 } else { 0.0 };
                start + (end - start) * frac
            }
        }
    }

    /// Probability of emitting a positive at position `t`.
    pub fn positive_probability(&self, t: u64, n: u64) -> f64 {
        1.0 / (1.0 + self.ratio_at(t, n))
    }
}
