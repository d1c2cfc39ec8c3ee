//! Exact nearest-neighbour search over memories.
//!
//! Searches are linear scans. Neighbours are ordered by distance, then by
//! arrival index (older first), then by synthetic serial, so results are
//! deterministic whatever the storage order.

use std::cmp::Ordering;

use crate::buffer::MemoryBuffer;
use crate::error::{DriftMemError, Result};
use crate::types::{InstanceId, LabeledInstance};

pub fn euclidean_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(DriftMemError::DimensionMismatch {
            expected: a.len(),
            actual: b.len(),
        });
    }
    Ok(distance_unchecked(a, b))
}

#[inline]
pub(crate) fn distance_unchecked(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Neighbor {
    /// Position in the searched sequence (concatenated, for multi-part searches).
    pub index: usize,
    pub distance: f64,
    pub id: InstanceId,
}

impl Neighbor {
    fn order(&self, other: &Self) -> Ordering {
        self.distance
            .total_cmp(&other.distance)
            .then_with(|| self.id.cmp(&other.id))
    }
}

/// Neighbours sorted ascending by distance, at most `k` long.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct NeighborList {
    pub entries: Vec<Neighbor>,
}

impl NeighborList {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Neighbor> {
        self.entries.iter()
    }

    pub fn indices(&self) -> Vec<usize> {
        self.entries.iter().map(|n| n.index).collect()
    }

    pub fn max_distance(&self) -> Option<f64> {
        self.entries.last().map(|n| n.distance)
    }
}

/// The `k` nearest instances to `query` in `buffer`.
pub fn knn_search(query: &[f64], buffer: &MemoryBuffer, k: usize) -> Result<NeighborList> {
    if buffer.is_empty() {
        return Err(DriftMemError::EmptyMemory);
    }
    if k == 0 {
        return Err(DriftMemError::InvalidArgument("k must be positive".into()));
    }
    check_dim(query, buffer.instances())?;
    Ok(k_nearest(query, &[buffer.instances()], k, None))
}

pub(crate) fn check_dim(query: &[f64], instances: &[LabeledInstance]) -> Result<()> {
    match instances.first() {
        Some(first) if first.dim() != query.len() => Err(DriftMemError::DimensionMismatch {
            expected: first.dim(),
            actual: query.len(),
        }),
        _ => Ok(()),
    }
}

/// The `k` nearest instances over the concatenation of `parts`, skipping the
/// instance with id `exclude`. Returns an empty list when nothing is stored.
pub fn k_nearest(
    query: &[f64],
    parts: &[&[LabeledInstance]],
    k: usize,
    exclude: Option<InstanceId>,
) -> NeighborList {
    if k == 0 {
        return NeighborList::default();
    }
    // sorted insertion into a list of at most k entries
    let mut best: Vec<Neighbor> = Vec::with_capacity(k + 1);
    let mut offset = 0;
    for part in parts {
        for (i, inst) in part.iter().enumerate() {
            let distance = distance_unchecked(query, &inst.features);
            if best.len() == k && distance > best[k - 1].distance {
                continue;
            }
            let id = inst.id();
            if Some(id) == exclude {
                continue;
            }
            let cand = Neighbor {
                index: offset + i,
                distance,
                id,
            };
            if best.len() == k && cand.order(&best[k - 1]) != Ordering::Less {
                continue;
            }
            let pos = best.partition_point(|n| n.order(&cand) == Ordering::Less);
            best.insert(pos, cand);
            best.truncate(k);
        }
        offset += part.len();
    }
    NeighborList { entries: best }
}

/// Resolves a neighbour index from a multi-part search back to its instance.
pub(crate) fn resolve<'a>(parts: &[&'a [LabeledInstance]], mut index: usize) -> &'a LabeledInstance {
    for part in parts {
        if index < part.len() {
            return &part[index];
        }
        index -= part.len();
    }
    panic!("neighbor index out of range")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::Label;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn naive(a: &[f64], b: &[f64]) -> f64 {
        let mut s = 0.0;
        for i in 0..a.len() {
            let d = a[i] - b[i];
            s += d * d;
        }
        s.sqrt()
    }

    #[test]
    fn distance_cases() {
        assert_eq!(euclidean_distance(&[0.0, 0.0], &[0.0, 0.0]).unwrap(), 0.0);
        assert_eq!(euclidean_distance(&[0.0, 0.0], &[3.0, 4.0]).unwrap(), 5.0);
        assert!(euclidean_distance(&[0.0], &[1.0, 2.0]).is_err());

        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let a: Vec<f64> = (0..5).map(|_| rng.random_range(-10.0..10.0)).collect();
            let b: Vec<f64> = (0..5).map(|_| rng.random_range(-10.0..10.0)).collect();
            let d = euclidean_distance(&a, &b).unwrap();
            assert!((d - naive(&a, &b)).abs() < 1e-12);
            assert_eq!(d, euclidean_distance(&b, &a).unwrap());
        }
    }

    fn random_buffer(rng: &mut ChaCha8Rng, n: usize) -> MemoryBuffer {
        let mut b = MemoryBuffer::unbounded();
        for t in 0..n {
            let label = if rng.random_bool(0.3) { Label::Positive } else { Label::Negative };
            // coarse grid so distance ties occur
            let f = vec![rng.random_range(0..4) as f64, rng.random_range(0..4) as f64];
            b.push(LabeledInstance::new(f, label, t as u64)).unwrap();
        }
        b
    }

    #[test]
    fn knn_matches_full_sort() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let buf = random_buffer(&mut rng, 10);
            let q = vec![rng.random_range(0.0..4.0), rng.random_range(0.0..4.0)];
            let got = knn_search(&q, &buf, 5).unwrap();
            let mut all: Vec<(f64, u64, usize)> = buf
                .iter()
                .enumerate()
                .map(|(i, inst)| (naive(&q, &inst.features), inst.arrival_index, i))
                .collect();
            all.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
            let want: Vec<usize> = all.iter().take(5).map(|x| x.2).collect();
            assert_eq!(got.indices(), want);
        }
    }

    #[test]
    fn knn_exact_match_and_exhaustion() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let buf = random_buffer(&mut rng, 6);
        let q = buf.instances()[3].features.clone();
        let nn = knn_search(&q, &buf, 1).unwrap();
        assert_eq!(nn.entries[0].distance, 0.0);
        let all = knn_search(&q, &buf, 50).unwrap();
        assert_eq!(all.len(), 6);
        assert!(all.entries.windows(2).all(|w| w[0].distance <= w[1].distance));
        assert!(matches!(
            knn_search(&q, &MemoryBuffer::unbounded(), 3),
            Err(DriftMemError::EmptyMemory)
        ));
    }

    #[test]
    fn ties_prefer_older_arrivals() {
        let mut b = MemoryBuffer::unbounded();
        for t in [7u64, 3, 5] {
            b.push(LabeledInstance::new(vec![1.0], Label::Negative, t)).unwrap();
        }
        let nn = knn_search(&[0.0], &b, 2).unwrap();
        let arrivals: Vec<u64> = nn.iter().map(|n| n.id.arrival).collect();
        assert_eq!(arrivals, vec![3, 5]);
    }

    #[test]
    fn multi_part_search_and_exclusion() {
        let a = vec![LabeledInstance::new(vec![0.0], Label::Positive, 0)];
        let b = vec![
            LabeledInstance::new(vec![1.0], Label::Negative, 1),
            LabeledInstance::new(vec![2.0], Label::Negative, 2),
        ];
        let parts: [&[LabeledInstance]; 2] = [&a, &b];
        let nn = k_nearest(&[0.0], &parts, 2, Some(a[0].id()));
        assert_eq!(nn.indices(), vec![1, 2]);
        assert_eq!(resolve(&parts, 2).arrival_index, 2);
    }
}
