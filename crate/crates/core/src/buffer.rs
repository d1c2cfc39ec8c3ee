use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{DriftMemError, Result};
use crate::types::{class_counts, InstanceId, Label, LabeledInstance};

/// Imbalance ratio `r` of a `1:r` split: majority (negative) instances per
/// minority (positive) instance. `None` when there are no positives.
pub fn imbalance_ratio(count_pos: usize, count_neg: usize) -> Option<f64> {
    if count_pos == 0 {
        None
    } else {
        Some(count_neg as f64 / count_pos as f64)
    }
}

/// Insertion-ordered multiset of labeled instances with per-class counts.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MemoryBuffer {
    instances: Vec<LabeledInstance>,
    count_pos: usize,
    count_neg: usize,
    max_size: Option<usize>,
}

impl MemoryBuffer {
    pub fn new(max_size: Option<usize>) -> Self {
        MemoryBuffer {
            max_size,
            ..Default::default()
        }
    }

    pub fn unbounded() -> Self {
        Self::new(None)
    }

    pub fn with_capacity(max_size: usize) -> Self {
        Self::new(Some(max_size))
    }

    pub fn from_instances(instances: Vec<LabeledInstance>, max_size: Option<usize>) -> Result<Self> {
        let mut buffer = Self::new(max_size);
        buffer.extend(instances)?;
        Ok(buffer)
    }

    pub fn max_size(&self) -> Option<usize> {
        self.max_size
    }

    pub fn instances(&self) -> &[LabeledInstance] {
        &self.instances
    }

    pub fn iter(&self) -> std::slice::Iter<'_, LabeledInstance> {
        self.instances.iter()
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn count_pos(&self) -> usize {
        self.count_pos
    }

    pub fn count_neg(&self) -> usize {
        self.count_neg
    }

    pub fn count(&self, label: Label) -> usize {
        match label {
            Label::Positive => self.count_pos,
            Label::Negative => self.count_neg,
        }
    }

    pub fn imbalance_ratio(&self) -> Option<f64> {
        imbalance_ratio(self.count_pos, self.count_neg)
    }

    /// Whether the stored size exceeds `max_size`.
    pub fn over_capacity(&self) -> bool {
        self.max_size.is_some_and(|m| self.len() > m)
    }

    pub fn dim(&self) -> Option<usize> {
        self.instances.first().map(LabeledInstance::dim)
    }

    pub fn contains(&self, id: InstanceId) -> bool {
        self.instances.iter().any(|i| i.id() == id)
    }

    pub fn push(&mut self, instance: LabeledInstance) -> Result<()> {
        if let Some(d) = self.dim() {
            if instance.dim() != d {
                return Err(DriftMemError::DimensionMismatch {
                    expected: d,
                    actual: instance.dim(),
                });
            }
        }
        self.bump(instance.label, 1);
        self.instances.push(instance);
        Ok(())
    }

    pub fn extend<I: IntoIterator<Item = LabeledInstance>>(&mut self, instances: I) -> Result<()> {
        for inst in instances {
            self.push(inst)?;
        }
        Ok(())
    }

    pub fn pop_oldest(&mut self) -> Option<LabeledInstance> {
        if self.instances.is_empty() {
            return None;
        }
        let inst = self.instances.remove(0);
        self.bump(inst.label, -1);
        Some(inst)
    }

    /// Removes and returns the `n` oldest instances (all of them if fewer).
    pub fn drain_oldest(&mut self, n: usize) -> Vec<LabeledInstance> {
        let n = n.min(self.len());
        let drained: Vec<_> = self.instances.drain(..n).collect();
        self.recount();
        drained
    }

    /// Removes every instance whose id is in `ids`, returning them in buffer order.
    pub fn remove_ids(&mut self, ids: &[InstanceId]) -> Vec<LabeledInstance> {
        if ids.is_empty() {
            return Vec::new();
        }
        let wanted: HashSet<InstanceId> = ids.iter().copied().collect();
        self.extract(|inst| wanted.contains(&inst.id()))
    }

    /// Removes every instance matching `pred`, returning them in buffer order.
    pub fn extract<F: FnMut(&LabeledInstance) -> bool>(&mut self, mut pred: F) -> Vec<LabeledInstance> {
        let mut removed = Vec::new();
        let mut kept = Vec::with_capacity(self.instances.len());
        for inst in self.instances.drain(..) {
            if pred(&inst) {
                removed.push(inst);
            } else {
                kept.push(inst);
            }
        }
        self.instances = kept;
        self.recount();
        removed
    }

    pub fn take_all(&mut self) -> Vec<LabeledInstance> {
        self.count_pos = 0;
        self.count_neg = 0;
        std::mem::take(&mut self.instances)
    }

    pub fn clear(&mut self) {
        self.take_all();
    }

    /// Recomputes the class counts from the stored labels.
    pub fn recount(&mut self) {
        let (p, n) = class_counts(&self.instances);
        self.count_pos = p;
        self.count_neg = n;
    }

    fn bump(&mut self, label: Label, delta: isize) {
        let slot = match label {
            Label::Positive => &mut self.count_pos,
            Label::Negative => &mut self.count_neg,
        };
        *slot = slot.checked_add_signed(delta).expect("class count underflow");
    }
}

impl<'a> IntoIterator for &'a MemoryBuffer {
    type Item = &'a LabeledInstance;
    type IntoIter = std::slice::Iter<'a, LabeledInstance>;

    fn into_iter(self) -> Self::IntoIter {
        self.instances.iter()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn inst(label: Label, t: u64) -> LabeledInstance {
        LabeledInstance::new(vec![t as f64, 0.0], label, t)
    }

    #[test]
    fn imbalance_ratio_cases() {
        assert_eq!(imbalance_ratio(10, 10), Some(1.0));
        let r = imbalance_ratio(100, 217).unwrap();
        assert!((r - 2.17).abs() < 1e-12);
        assert_eq!(imbalance_ratio(0, 5), None);
    }

    #[test]
    fn push_rejects_dimension_change() {
        let mut b = MemoryBuffer::unbounded();
        b.push(inst(Label::Positive, 0)).unwrap();
        let err = b.push(LabeledInstance::new(vec![1.0], Label::Negative, 1));
        assert!(matches!(err, Err(DriftMemError::DimensionMismatch { expected: 2, actual: 1 })));
    }

    #[test]
    fn drain_oldest_keeps_order() {
        let mut b = MemoryBuffer::unbounded();
        for t in 0..10 {
            b.push(inst(if t % 3 == 0 { Label::Positive } else { Label::Negative }, t))
                .unwrap();
        }
        let old = b.drain_oldest(4);
        assert_eq!(old.iter().map(|i| i.arrival_index).collect::<Vec<_>>(), vec![0, 1, 2, 3]);
        assert_eq!(b.len(), 6);
        assert_eq!(b.count_pos() + b.count_neg(), 6);
        assert_eq!(b.instances()[0].arrival_index, 4);
    }

    proptest! {
        #[test]
        fn counts_match_recount(ops in prop::collection::vec((any::<bool>(), 0u8..4), 1..200)) {
            let mut b = MemoryBuffer::unbounded();
            let mut t = 0u64;
            let (mut pos, mut neg) = (0usize, 0usize);
            for (positive, op) in ops {
                match op {
                    0 | 1 => {
                        let label = if positive { Label::Positive } else { Label::Negative };
                        b.push(inst(label, t)).unwrap();
                        t += 1;
                        if positive { pos += 1 } else { neg += 1 }
                    }
                    2 => {
                        if let Some(i) = b.pop_oldest() {
                            if i.label.is_positive() { pos -= 1 } else { neg -= 1 }
                        }
                    }
                    _ => {
                        let ids: Vec<_> = b.iter().filter(|i| i.arrival_index % 2 == 0).map(|i| i.id()).collect();
                        for i in b.remove_ids(&ids) {
                            if i.label.is_positive() { pos -= 1 } else { neg -= 1 }
                        }
                    }
                }
                let (rp, rn) = class_counts(b.instances());
                prop_assert_eq!((b.count_pos(), b.count_neg()), (rp, rn));
                prop_assert_eq!((rp, rn), (pos, neg));
                prop_assert_eq!(b.imbalance_ratio(), imbalance_ratio(rp, rn));
            }
        }
    }
}
