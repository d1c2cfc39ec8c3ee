//! Neighbourhood consistency: the distance threshold around the newest
//! instance, the inconsistent/consistent sets, the LTM ⇄ WM exchange and
//! working-memory noise removal.

use std::collections::HashSet;

use crate::buffer::MemoryBuffer;
use crate::classifiers::knn_predict_parts;
use crate::error::{DriftMemError, Result};
use crate::neighbors::k_nearest;
use crate::types::{class_counts, InstanceId, LabeledInstance};

/// Largest distance from `anchor` to a same-label instance among its `k`
/// nearest neighbours in `stm` (anchor itself excluded). `None` when none
/// of them shares the anchor's label.
pub fn distance_threshold(stm: &[LabeledInstance], anchor: &LabeledInstance, k: usize) -> Option<f64> {
    let nn = k_nearest(&anchor.features, &[stm], k, Some(anchor.id()));
    nn.iter()
        .filter(|n| stm[n.index].label == anchor.label)
        .map(|n| n.distance)
        .next_back()
}

fn neighborhood(
    memory: &[LabeledInstance],
    anchor: &LabeledInstance,
    theta: f64,
    k: usize,
    same_label: bool,
) -> Vec<InstanceId> {
    k_nearest(&anchor.features, &[memory], k, None)
        .iter()
        .filter(|n| n.distance <= theta && (memory[n.index].label == anchor.label) == same_label)
        .map(|n| n.id)
        .collect()
}

/// Instances of `ltm` among the anchor's `k` nearest neighbours, within
/// `theta`, whose label differs from the anchor's.
pub fn inconsistent_set(
    ltm: &[LabeledInstance],
    anchor: &LabeledInstance,
    theta: f64,
    k: usize,
) -> Vec<InstanceId> {
    neighborhood(ltm, anchor, theta, k, false)
}

/// Instances of `wm` among the anchor's `k` nearest neighbours, within
/// `theta`, sharing the anchor's label.
pub fn consistent_set(
    wm: &[LabeledInstance],
    anchor: &LabeledInstance,
    theta: f64,
    k: usize,
) -> Vec<InstanceId> {
    neighborhood(wm, anchor, theta, k, true)
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ExchangeReport {
    pub to_wm: Vec<LabeledInstance>,
    pub to_ltm: Vec<LabeledInstance>,
}

impl ExchangeReport {
    pub fn to_wm_counts(&self) -> (usize, usize) {
        class_counts(&self.to_wm)
    }

    pub fn to_ltm_counts(&self) -> (usize, usize) {
        class_counts(&self.to_ltm)
    }

    pub fn is_empty(&self) -> bool {
        self.to_wm.is_empty() && self.to_ltm.is_empty()
    }
}

/// `ltm' = (ltm \ is) ∪ cs`, `wm' = (wm \ cs) ∪ is`.
pub fn exchange(
    ltm: &mut MemoryBuffer,
    wm: &mut MemoryBuffer,
    is: &[InstanceId],
    cs: &[InstanceId],
) -> Result<ExchangeReport> {
    let distinct = |ids: &[InstanceId]| ids.iter().collect::<HashSet<_>>().len() == ids.len();
    if !distinct(is) || !distinct(cs) {
        return Err(DriftMemError::ContractViolation("duplicate ids in exchange sets".into()));
    }
    if !is.iter().all(|id| ltm.contains(*id)) || !cs.iter().all(|id| wm.contains(*id)) {
        return Err(DriftMemError::ContractViolation(
            "exchange sets must be drawn from their memories".into(),
        ));
    }
    let to_wm = ltm.remove_ids(is);
    let to_ltm = wm.remove_ids(cs);
    ltm.extend(to_ltm.iter().cloned())?;
    wm.extend(to_wm.iter().cloned())?;
    Ok(ExchangeReport { to_wm, to_ltm })
}

/// Drops every working-memory instance that the LTM's kNN already labels
/// correctly. Returns the removed instances; no-op with an empty LTM.
pub fn noise_removal(
    wm: &mut MemoryBuffer,
    ltm: &[LabeledInstance],
    k: usize,
    epsilon_dist: f64,
) -> Vec<LabeledInstance> {
    if ltm.is_empty() || wm.is_empty() {
        return Vec::new();
    }
    wm.extract(|inst| {
        knn_predict_parts(&[ltm], &inst.features, k, epsilon_dist)
            .map(|pred| pred == inst.label)
            .unwrap_or(false)
    })
}

/// Removes from `set` whatever each anchor in `reference` marks as
/// inconsistent, using thresholds computed within `reference`.
pub fn clean_against(set: &mut Vec<LabeledInstance>, reference: &[LabeledInstance], k: usize) -> Vec<LabeledInstance> {
    let mut removed = Vec::new();
    for anchor in reference {
        if set.is_empty() {
            break;
        }
        let Some(theta) = distance_threshold(reference, anchor, k) else {
            continue;
        };
        let ids: HashSet<InstanceId> = inconsistent_set(set, anchor, theta, k).into_iter().collect();
        if ids.is_empty() {
            continue;
        }
        let (gone, kept): (Vec<_>, Vec<_>) = set.drain(..).partition(|i| ids.contains(&i.id()));
        *set = kept;
        removed.extend(gone);
    }
    removed
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::Label;

    fn inst(f: &[f64], label: Label, t: u64) -> LabeledInstance {
        LabeledInstance::new(f.to_vec(), label, t)
    }

    #[test]
    fn threshold_all_consistent() {
        let anchor = inst(&[0.0], Label::Positive, 10);
        let mut stm: Vec<_> = (1..=5).map(|d| inst(&[d as f64], Label::Positive, d)).collect();
        stm.push(anchor.clone());
        assert_eq!(distance_threshold(&stm, &anchor, 5), Some(5.0));
    }

    #[test]
    fn threshold_mixed_neighbourhood() {
        let anchor = inst(&[0.0], Label::Positive, 10);
        let stm = vec![
            inst(&[1.0], Label::Positive, 0),
            inst(&[-2.0], Label::Positive, 1),
            inst(&[1.5], Label::Negative, 2),
            inst(&[-2.5], Label::Negative, 3),
            inst(&[3.0], Label::Negative, 4),
            inst(&[4.0], Label::Positive, 5),
            anchor.clone(),
        ];
        assert_eq!(distance_threshold(&stm, &anchor, 5), Some(2.0));
    }

    #[test]
    fn threshold_undefined_cases() {
        let anchor = inst(&[0.0], Label::Positive, 10);
        let stm: Vec<_> = (1..=5)
            .map(|d| inst(&[d as f64], Label::Negative, d))
            .chain([anchor.clone()])
            .collect();
        assert_eq!(distance_threshold(&stm, &anchor, 5), None);
        assert_eq!(distance_threshold(std::slice::from_ref(&anchor), &anchor, 5), None);
    }

    #[test]
    fn inconsistent_and_consistent_sets() {
        let anchor = inst(&[0.0], Label::Positive, 10);
        assert!(inconsistent_set(&[], &anchor, 1.0, 5).is_empty());
        assert!(consistent_set(&[], &anchor, 1.0, 5).is_empty());
        let ltm = vec![inst(&[0.5], Label::Negative, 1), inst(&[0.2], Label::Positive, 2)];
        assert_eq!(inconsistent_set(&ltm, &anchor, 1.0, 5), vec![ltm[0].id()]);
        assert_eq!(consistent_set(&ltm, &anchor, 1.0, 5), vec![ltm[1].id()]);
        assert!(inconsistent_set(&ltm, &anchor, 0.4, 5).is_empty());
    }

    #[test]
    fn exchange_identity_and_swap() {
        let mut ltm = MemoryBuffer::unbounded();
        let mut wm = MemoryBuffer::unbounded();
        for t in 0..6 {
            ltm.push(inst(&[t as f64], Label::Negative, t)).unwrap();
            wm.push(inst(&[t as f64 + 0.5], Label::Positive, 100 + t)).unwrap();
        }
        let before = (ltm.clone(), wm.clone());
        let r = exchange(&mut ltm, &mut wm, &[], &[]).unwrap();
        assert!(r.is_empty());
        assert_eq!((ltm.clone(), wm.clone()), before);

        let is: Vec<_> = ltm.iter().take(4).map(|i| i.id()).collect();
        let cs: Vec<_> = wm.iter().take(4).map(|i| i.id()).collect();
        let r = exchange(&mut ltm, &mut wm, &is, &cs).unwrap();
        assert_eq!((ltm.len(), wm.len()), (6, 6));
        assert_eq!(r.to_wm_counts(), (0, 4));
        assert_eq!(r.to_ltm_counts(), (4, 0));
        assert!(is.iter().all(|id| wm.contains(*id) && !ltm.contains(*id)));
        assert!(cs.iter().all(|id| ltm.contains(*id) && !wm.contains(*id)));

        assert!(exchange(&mut ltm, &mut wm, &is, &[]).is_err());
    }

    #[test]
    fn noise_removal_cases() {
        let mut wm = MemoryBuffer::unbounded();
        assert!(noise_removal(&mut wm, &[inst(&[0.0], Label::Positive, 0)], 5, 1e-12).is_empty());
        let ltm = vec![
            inst(&[0.0], Label::Positive, 0),
            inst(&[5.0], Label::Negative, 1),
            inst(&[5.1], Label::Negative, 2),
        ];
        wm.push(inst(&[0.0], Label::Positive, 7)).unwrap();
        wm.push(inst(&[5.0], Label::Positive, 8)).unwrap();
        let removed = noise_removal(&mut wm, &ltm, 5, 1e-12);
        assert_eq!(removed.len(), 1);
        assert_eq!(removed[0].arrival_index, 7);
        assert_eq!(wm.len(), 1);
        assert!(noise_removal(&mut wm, &[], 5, 1e-12).is_empty());
    }

    #[test]
    fn clean_against_drops_conflicts() {
        let reference = vec![inst(&[0.0], Label::Positive, 10), inst(&[0.1], Label::Positive, 11)];
        let mut set = vec![inst(&[0.05], Label::Negative, 1), inst(&[3.0], Label::Negative, 2)];
        let removed = clean_against(&mut set, &reference, 5);
        assert_eq!(removed.len(), 1);
        assert_eq!(set.len(), 1);
        assert_eq!(set[0].arrival_index, 2);
    }
}
