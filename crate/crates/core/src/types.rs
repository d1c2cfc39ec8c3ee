use std::fmt;

use serde::{Deserialize, Serialize};

/// Binary class label. `Positive` is the minority class by convention.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    Positive,
    Negative,
}

impl Label {
    pub fn flipped(self) -> Label {
        match self {
            Label::Positive => Label::Negative,
            Label::Negative => Label::Positive,
        }
    }

    pub fn is_positive(self) -> bool {
        self == Label::Positive
    }

    /// `+1` for positive, `-1` for negative.
    pub fn signum(self) -> i8 {
        match self {
            Label::Positive => 1,
            Label::Negative => -1,
        }
    }

    pub fn from_signum(v: i64) -> Option<Label> {
        match v {
            1 => Some(Label::Positive),
            -1 => Some(Label::Negative),
            _ => None,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.signum())
    }
}

/// Identity of an instance inside the memories.
///
/// Stream instances have `synthetic == 0`. Oversampled instances and
/// compression centroids carry a non-zero `synthetic` serial, so two
/// instances with equal features (or equal arrival index) stay distinct.
#[derive(
    Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize,
)]
pub struct InstanceId {
    pub arrival: u64,
    pub synthetic: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabeledInstance {
    pub features: Vec<f64>,
    pub label: Label,
    pub arrival_index: u64,
    #[serde(default)]
    pub synthetic_id: u64,
}

impl LabeledInstance {
    pub fn new(features: Vec<f64>, label: Label, arrival_index: u64) -> Self {
        LabeledInstance {
            features,
            label,
            arrival_index,
            synthetic_id: 0,
        }
    }

    pub fn synthetic(features: Vec<f64>, label: Label, arrival_index: u64, serial: u64) -> Self {
        LabeledInstance {
            features,
            label,
            arrival_index,
            synthetic_id: serial,
        }
    }

    pub fn id(&self) -> InstanceId {
        InstanceId {
            arrival: self.arrival_index,
            synthetic: self.synthetic_id,
        }
    }

    pub fn dim(&self) -> usize {
        self.features.len()
    }

    pub fn is_synthetic(&self) -> bool {
        self.synthetic_id != 0
    }
}

/// Counts positive and negative labels in a slice of instances.
pub fn class_counts<'a, I>(instances: I) -> (usize, usize)
where
    I: IntoIterator<Item = &'a LabeledInstance>,
{
    instances
        .into_iter()
        .fold((0, 0), |(p, n), inst| match inst.label {
            Label::Positive => (p + 1, n),
            Label::Negative => (p, n + 1),
        })
}
