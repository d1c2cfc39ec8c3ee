use crate::error::{DriftMemError, Result};
use crate::neighbors::{check_dim, k_nearest, resolve};
use crate::types::{Label, LabeledInstance};

/// Distance floor used in the inverse-distance vote.
pub const DEFAULT_EPSILON_DIST: f64 = 1e-12;

/// Inverse-distance vote over `(label, distance)` pairs. Ties go to `Positive`.
pub fn weighted_vote<I>(neighbors: I, epsilon_dist: f64) -> Label
where
    I: IntoIterator<Item = (Label, f64)>,
{
    let (mut pos, mut neg) = (0.0f64, 0.0f64);
    for (label, d) in neighbors {
        let w = 1.0 / d.max(epsilon_dist);
        match label {
            Label::Positive => pos += w,
            Label::Negative => neg += w,
        }
    }
    if pos >= neg {
        Label::Positive
    } else {
        Label::Negative
    }
}

pub fn knn_predict(memory: &[LabeledInstance], x: &[f64], k: usize) -> Result<Label> {
    knn_predict_parts(&[memory], x, k, DEFAULT_EPSILON_DIST)
}

/// Weighted kNN over the union of several memories.
pub fn knn_predict_parts(
    parts: &[&[LabeledInstance]],
    x: &[f64],
    k: usize,
    epsilon_dist: f64,
) -> Result<Label> {
    let first = parts.iter().find(|p| !p.is_empty()).ok_or(DriftMemError::EmptyMemory)?;
    check_dim(x, first)?;
    let nn = k_nearest(x, parts, k, None);
    Ok(weighted_vote(
        nn.iter().map(|n| (resolve(parts, n.index).label, n.distance)),
        epsilon_dist,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn inst(f: Vec<f64>, label: Label, t: u64) -> LabeledInstance {
        LabeledInstance::new(f, label, t)
    }

    #[test]
    fn single_positive_memory() {
        let mem = vec![inst(vec![0.0, 0.0], Label::Positive, 0)];
        assert_eq!(knn_predict(&mem, &[100.0, -3.0], 5).unwrap(), Label::Positive);
        assert!(matches!(knn_predict(&[], &[0.0], 1), Err(DriftMemError::EmptyMemory)));
    }

    #[test]
    fn duplicate_neighbor_dominates() {
        let mut mem: Vec<_> = (0..4)
            .map(|i| inst(vec![10.0 + i as f64, 0.0], Label::Positive, i))
            .collect();
        mem.push(inst(vec![1.0, 1.0], Label::Negative, 4));
        assert_eq!(knn_predict(&mem, &[1.0, 1.0], 5).unwrap(), Label::Negative);
    }

    #[test]
    fn vote_ties_favor_positive() {
        assert_eq!(
            weighted_vote([(Label::Negative, 1.0), (Label::Positive, 1.0)], 1e-12),
            Label::Positive
        );
    }

    #[test]
    fn matches_bruteforce_vote() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mem: Vec<_> = (0..20)
            .map(|t| {
                let label = if rng.random_bool(0.4) { Label::Positive } else { Label::Negative };
                inst(vec![rng.random(), rng.random()], label, t)
            })
            .collect();
        for _ in 0..1000 {
            let q = [rng.random::<f64>(), rng.random::<f64>()];
            let mut all: Vec<(f64, u64, Label)> = mem
                .iter()
                .map(|m| {
                    let d = ((m.features[0] - q[0]).powi(2) + (m.features[1] - q[1]).powi(2)).sqrt();
                    (d, m.arrival_index, m.label)
                })
                .collect();
            all.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
            let (mut p, mut n) = (0.0, 0.0);
            for (d, _, l) in all.iter().take(5) {
                if *l == Label::Positive {
                    p += 1.0 / d.max(1e-12)
                } else {
                    n += 1.0 / d.max(1e-12)
                }
            }
            let want = if p >= n { Label::Positive } else { Label::Negative };
            assert_eq!(knn_predict(&mem, &q, 5).unwrap(), want);
        }
    }

    #[test]
    fn permutation_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut mem: Vec<_> = (0..30)
            .map(|t| {
                let label = if rng.random_bool(0.5) { Label::Positive } else { Label::Negative };
                inst(vec![rng.random_range(0..3) as f64], label, t)
            })
            .collect();
        let queries: Vec<f64> = (0..50).map(|_| rng.random_range(-1.0..4.0)).collect();
        let before: Vec<_> = queries.iter().map(|q| knn_predict(&mem, &[*q], 5).unwrap()).collect();
        mem.reverse();
        mem.swap(3, 17);
        let after: Vec<_> = queries.iter().map(|q| knn_predict(&mem, &[*q], 5).unwrap()).collect();
        assert_eq!(before, after);
    }
}
