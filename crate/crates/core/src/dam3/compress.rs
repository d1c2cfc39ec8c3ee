//! Class-wise K-Means++ compression of over-full memories.

use rand::Rng;

use crate::buffer::MemoryBuffer;
use crate::error::Result;
use crate::neighbors::distance_unchecked;
use crate::types::{Label, LabeledInstance};

pub const KMEANS_MAX_ITER: usize = 25;

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// K-Means++ seeding followed by Lloyd iterations. Returns `k` centres.
pub fn kmeans_pp<R: Rng>(points: &[Vec<f64>], k: usize, rng: &mut R, max_iter: usize) -> Vec<Vec<f64>> {
    assert!(k > 0 && k <= points.len(), "k must lie in 1..=n");
    let n = points.len();
    let mut centers: Vec<Vec<f64>> = Vec::with_capacity(k);
    centers.push(points[rng.random_range(0..n)].clone());
    let mut d2: Vec<f64> = points.iter().map(|p| sq_dist(p, &centers[0])).collect();
    while centers.len() < k {
        let total: f64 = d2.iter().sum();
        let idx = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut chosen = n - 1;
            for (i, w) in d2.iter().enumerate() {
                if target < *w {
                    chosen = i;
                    break;
                }
                target -= w;
            }
            chosen
        } else {
            rng.random_range(0..n)
        };
        let c = points[idx].clone();
        for (d, p) in d2.iter_mut().zip(points) {
            *d = d.min(sq_dist(p, &c));
        }
        centers.push(c);
    }

    let dim = points[0].len();
    let mut assign = vec![usize::MAX; n];
    for _ in 0..max_iter {
        let mut changed = false;
        for (i, p) in points.iter().enumerate() {
            let mut best = 0;
            let mut best_d = f64::INFINITY;
            for (j, c) in centers.iter().enumerate() {
                let d = sq_dist(p, c);
                if d < best_d {
                    best_d = d;
                    best = j;
                }
            }
            if assign[i] != best {
                assign[i] = best;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (p, &a) in points.iter().zip(&assign) {
            counts[a] += 1;
            for (s, v) in sums[a].iter_mut().zip(p) {
                *s += v;
            }
        }
        for j in 0..k {
            if counts[j] > 0 {
                centers[j] = sums[j].iter().map(|s| s / counts[j] as f64).collect();
            }
        }
    }
    centers
}

/// Sum over points of the distance to the nearest centre.
pub fn within_cluster_distance(points: &[Vec<f64>], centers: &[Vec<f64>]) -> f64 {
    points
        .iter()
        .map(|p| {
            centers
                .iter()
                .map(|c| distance_unchecked(p, c))
                .fold(f64::INFINITY, f64::min)
        })
        .sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CompressionReport {
    pub before: usize,
    pub after: usize,
    pub rounds: u32,
}

/// While `buffer` exceeds `max_size`, replaces each class by
/// `ceil(count / 2)` K-Means++ centroids. Classes with a single instance
/// are kept. Centroids get arrival index 0 and fresh serials.
pub fn compress<R: Rng>(
    buffer: &mut MemoryBuffer,
    max_size: usize,
    rng: &mut R,
    next_serial: &mut u64,
) -> Result<Option<CompressionReport>> {
    let before = buffer.len();
    let mut rounds = 0;
    while buffer.len() > max_size {
        let size = buffer.len();
        let all = buffer.take_all();
        let mut out = Vec::with_capacity(size / 2 + 2);
        for label in [Label::Positive, Label::Negative] {
            let class: Vec<LabeledInstance> = all.iter().filter(|i| i.label == label).cloned().collect();
            if class.len() <= 1 {
                out.extend(class);
                continue;
            }
            let points: Vec<Vec<f64>> = class.into_iter().map(|i| i.features).collect();
            let k = points.len().div_ceil(2);
            for c in kmeans_pp(&points, k, rng, KMEANS_MAX_ITER) {
                let serial = *next_serial;
                *next_serial += 1;
                out.push(LabeledInstance::synthetic(c, label, 0, serial));
            }
        }
        buffer.extend(out)?;
        rounds += 1;
        if buffer.len() >= size {
            break;
        }
    }
    Ok((rounds > 0).then_some(CompressionReport {
        before,
        after: buffer.len(),
        rounds,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::seq::index::sample;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn under_capacity_is_identity() {
        let mut b = MemoryBuffer::unbounded();
        for t in 0..5 {
            b.push(LabeledInstance::new(vec![t as f64], Label::Negative, t)).unwrap();
        }
        let copy = b.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut serial = 1;
        assert_eq!(compress(&mut b, 5, &mut rng, &mut serial).unwrap(), None);
        assert_eq!(b, copy);
    }

    #[test]
    fn identical_pair_collapses() {
        let mut b = MemoryBuffer::unbounded();
        b.push(LabeledInstance::new(vec![1.5, 2.5], Label::Positive, 0)).unwrap();
        b.push(LabeledInstance::new(vec![1.5, 2.5], Label::Positive, 1)).unwrap();
        b.push(LabeledInstance::new(vec![9.0, 9.0], Label::Negative, 2)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut serial = 1;
        let r = compress(&mut b, 2, &mut rng, &mut serial).unwrap().unwrap();
        assert_eq!(r.after, 2);
        let pos: Vec<_> = b.iter().filter(|i| i.label == Label::Positive).collect();
        assert_eq!(pos.len(), 1);
        assert_eq!(pos[0].features, vec![1.5, 2.5]);
        assert!(pos[0].is_synthetic());
        // single-instance class kept as is
        assert!(b.iter().any(|i| i.arrival_index == 2 && !i.is_synthetic()));
    }

    #[test]
    fn halves_each_class() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut b = MemoryBuffer::unbounded();
        for t in 0..31 {
            b.push(LabeledInstance::new(vec![rng.random(), rng.random()], Label::Positive, t)).unwrap();
        }
        for t in 31..100 {
            b.push(LabeledInstance::new(vec![rng.random(), rng.random()], Label::Negative, t)).unwrap();
        }
        let mut serial = 1;
        compress(&mut b, 99, &mut rng, &mut serial).unwrap().unwrap();
        assert_eq!((b.count_pos(), b.count_neg()), (16, 35));
    }

    #[test]
    fn beats_random_subset_centroids() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let points: Vec<Vec<f64>> = (0..100)
            .map(|_| vec![rng.random_range(0.0..10.0), rng.random_range(0.0..10.0)])
            .collect();
        let centers = kmeans_pp(&points, 50, &mut rng, KMEANS_MAX_ITER);
        assert_eq!(centers.len(), 50);
        let ours = within_cluster_distance(&points, &centers);
        for _ in 0..20 {
            let subset: Vec<Vec<f64>> = sample(&mut rng, 100, 50).iter().map(|i| points[i].clone()).collect();
            assert!(ours <= within_cluster_distance(&points, &subset));
        }
    }
}
