//! Borderline-SMOTE oversampling of the set released from short-term memory.

use log::debug;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::neighbors::k_nearest;
use crate::types::{class_counts, Label, LabeledInstance};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SmoteConfig {
    /// Minority neighbours considered as interpolation partners.
    pub k_interp: usize,
    /// Neighbours inspected to decide whether a minority point is in danger.
    pub m_danger: usize,
    pub seed: u64,
}

impl Default for SmoteConfig {
    fn default() -> Self {
        SmoteConfig {
            k_interp: 5,
            m_danger: 5,
            seed: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MinorityKind {
    Safe,
    Danger,
    Noise,
}

/// The less frequent label of `instances`; `None` when balanced.
pub fn minority_label(instances: &[LabeledInstance]) -> Option<Label> {
    let (p, n) = class_counts(instances);
    match p.cmp(&n) {
        std::cmp::Ordering::Less => Some(Label::Positive),
        std::cmp::Ordering::Greater => Some(Label::Negative),
        std::cmp::Ordering::Equal => None,
    }
}

/// Labels each `minority` instance of `set` by how many of its `m_danger`
/// nearest neighbours (within `set`, itself excluded) belong to the other
/// class: all of them is noise, at least half is danger, fewer is safe.
/// Returns `(index in set, kind)` pairs in set order.
pub fn classify_minority(
    set: &[LabeledInstance],
    minority: Label,
    m_danger: usize,
) -> Vec<(usize, MinorityKind)> {
    let minority_idx = set
        .iter()
        .enumerate()
        .filter(|(_, i)| i.label == minority)
        .map(|(idx, _)| idx);
    if set.len() <= 1 {
        return minority_idx.map(|i| (i, MinorityKind::Safe)).collect();
    }
    minority_idx
        .map(|i| {
            let p = &set[i];
            let nn = k_nearest(&p.features, &[set], m_danger, Some(p.id()));
            let m = nn.len();
            let others = nn.iter().filter(|n| set[n.index].label != minority).count();
            let kind = if m > 0 && others == m {
                MinorityKind::Noise
            } else if 2 * others >= m && m > 0 {
                MinorityKind::Danger
            } else {
                MinorityKind::Safe
            };
            (i, kind)
        })
        .collect()
}

/// Balances `set` by interpolating synthetic minority instances around
/// danger points, seeded from `config.seed`. See [`borderline_smote_with_rng`].
pub fn borderline_smote(
    set: &[LabeledInstance],
    config: &SmoteConfig,
    next_serial: &mut u64,
) -> Vec<LabeledInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    borderline_smote_with_rng(set, config, &mut rng, next_serial)
}

/// Returns `set` followed by `|majority| - |minority|` synthetic minority
/// instances. Each synthetic point is `p + u·(q - p)` with `p` a danger
/// anchor, `q` one of its `k_interp` nearest minority neighbours and
/// `u ~ U[0, 1)`. Without danger points, anchors fall back to non-noise
/// minority points, then to all minority points.
///
/// Synthetic instances get arrival indices after the newest real one and
/// consecutive serials taken from `next_serial`.
pub fn borderline_smote_with_rng<R: Rng>(
    set: &[LabeledInstance],
    config: &SmoteConfig,
    rng: &mut R,
    next_serial: &mut u64,
) -> Vec<LabeledInstance> {
    let mut out = set.to_vec();
    let (pos, neg) = class_counts(set);
    if pos == 0 || neg == 0 {
        if !set.is_empty() && pos == 0 {
            debug!("oversampling skipped: no minority instances in a set of {}", set.len());
        }
        return out;
    }
    let Some(minority) = minority_label(set) else {
        return out;
    };
    let needed = pos.abs_diff(neg);

    let kinds = classify_minority(set, minority, config.m_danger);
    let pick = |want: &dyn Fn(MinorityKind) -> bool| -> Vec<usize> {
        kinds.iter().filter(|(_, k)| want(*k)).map(|(i, _)| *i).collect()
    };
    let mut anchors = pick(&|k| k == MinorityKind::Danger);
    if anchors.is_empty() {
        anchors = pick(&|k| k != MinorityKind::Noise);
    }
    if anchors.is_empty() {
        anchors = pick(&|_| true);
    }

    let minority_set: Vec<LabeledInstance> =
        set.iter().filter(|i| i.label == minority).cloned().collect();
    let partners: Vec<Vec<usize>> = anchors
        .iter()
        .map(|&a| {
            let p = &set[a];
            k_nearest(&p.features, &[&minority_set], config.k_interp, Some(p.id())).indices()
        })
        .collect();

    let base_arrival = set.iter().map(|i| i.arrival_index).max().unwrap_or(0) + 1;
    for s in 0..needed {
        let which = rng.random_range(0..anchors.len());
        let p = &set[anchors[which]];
        let q = match partners[which].as_slice() {
            [] => p,
            list => &minority_set[list[rng.random_range(0..list.len())]],
        };
        let u: f64 = rng.random();
        let features = p
            .features
            .iter()
            .zip(&q.features)
            .map(|(a, b)| a + u * (b - a))
            .collect();
        let serial = *next_serial;
        *next_serial += 1;
        out.push(LabeledInstance::synthetic(
            features,
            minority,
            base_arrival + s as u64,
            serial,
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inst(f: &[f64], label: Label, t: u64) -> LabeledInstance {
        LabeledInstance::new(f.to_vec(), label, t)
    }

    #[test]
    fn classification_boundaries() {
        // minority at origin, five majority neighbours close by
        let mut set = vec![inst(&[0.0, 0.0], Label::Positive, 0)];
        for i in 0..5 {
            set.push(inst(&[1.0 + i as f64 * 0.1, 0.0], Label::Negative, i + 1));
        }
        assert_eq!(classify_minority(&set, Label::Positive, 5), vec![(0, MinorityKind::Noise)]);

        // 3 of 5 neighbours majority
        let mut set = vec![
            inst(&[0.0], Label::Positive, 0),
            inst(&[0.1], Label::Positive, 1),
            inst(&[0.2], Label::Positive, 2),
            inst(&[-0.1], Label::Negative, 3),
            inst(&[-0.2], Label::Negative, 4),
            inst(&[-0.3], Label::Negative, 5),
        ];
        set.push(inst(&[50.0], Label::Negative, 6));
        let kinds = classify_minority(&set, Label::Positive, 5);
        assert_eq!(kinds[0], (0, MinorityKind::Danger));

        let single = vec![inst(&[0.0], Label::Positive, 0)];
        assert_eq!(classify_minority(&single, Label::Positive, 5), vec![(0, MinorityKind::Safe)]);
    }

    #[test]
    fn balanced_set_is_untouched() {
        let set = vec![
            inst(&[0.0], Label::Positive, 0),
            inst(&[1.0], Label::Negative, 1),
        ];
        let mut serial = 1;
        assert_eq!(borderline_smote(&set, &SmoteConfig::default(), &mut serial), set);
        assert_eq!(serial, 1);
    }

    #[test]
    fn duplicated_minority_yields_copies() {
        let mut set = vec![
            inst(&[2.0, 2.0], Label::Positive, 0),
            inst(&[2.0, 2.0], Label::Positive, 1),
        ];
        for i in 0..8 {
            set.push(inst(&[2.5 + 0.1 * i as f64, 2.0], Label::Negative, 2 + i));
        }
        let mut serial = 1;
        let out = borderline_smote(&set, &SmoteConfig::default(), &mut serial);
        assert_eq!(out.len(), 16);
        assert_eq!(&out[..10], &set[..]);
        for s in &out[10..] {
            assert_eq!(s.features, vec![2.0, 2.0]);
            assert_eq!(s.label, Label::Positive);
            assert!(s.is_synthetic());
            assert!(s.arrival_index > 9);
        }
        assert_eq!(serial, 7);
    }

    #[test]
    fn synthetics_lie_on_segment() {
        let mut set = vec![
            inst(&[0.0, 0.0], Label::Positive, 0),
            inst(&[1.0, 0.0], Label::Positive, 1),
        ];
        for i in 0..10 {
            set.push(inst(&[0.5, 0.2 + 0.05 * i as f64], Label::Negative, 2 + i));
        }
        let mut serial = 1;
        let out = borderline_smote(&set, &SmoteConfig { seed: 3, ..Default::default() }, &mut serial);
        let (p, n) = class_counts(&out);
        assert_eq!(p, n);
        for s in &out[set.len()..] {
            assert_eq!(s.features[1], 0.0);
            assert!((0.0..=1.0).contains(&s.features[0]));
        }
    }

    #[test]
    fn negative_minority_is_oversampled() {
        let mut set: Vec<_> = (0..6).map(|i| inst(&[i as f64], Label::Positive, i)).collect();
        set.push(inst(&[2.5], Label::Negative, 6));
        set.push(inst(&[3.5], Label::Negative, 7));
        let mut serial = 1;
        let out = borderline_smote(&set, &SmoteConfig::default(), &mut serial);
        let (p, n) = class_counts(&out);
        assert_eq!((p, n), (6, 6));
        assert!(out[8..].iter().all(|s| s.label == Label::Negative));
    }

    #[test]
    fn one_class_set_is_returned_unchanged() {
        let set: Vec<_> = (0..4).map(|i| inst(&[i as f64], Label::Negative, i)).collect();
        let mut serial = 1;
        assert_eq!(borderline_smote(&set, &SmoteConfig::default(), &mut serial), set);
    }
}
