//! Randomised comparisons against brute-force reimplementations.

use std::collections::BTreeSet;

use driftmem::buffer::MemoryBuffer;
use driftmem::classifiers::{knn_predict, FullBayesModel, GaussianClassStats};
use driftmem::dam3::{consistent_set, inconsistent_set, noise_removal, NoiseFilter};
use driftmem::drift::ks_statistic;
use driftmem::sampling::{classify_minority, MinorityKind};
use driftmem::{InstanceId, Label, LabeledInstance};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_set(rng: &mut ChaCha8Rng, n: usize, d: usize, p_pos: f64, start: u64) -> Vec<LabeledInstance> {
    (0..n)
        .map(|i| {
            // coarse grid so exact distance ties happen regularly
            let f = (0..d).map(|_| rng.random_range(0..8) as f64 * 0.5).collect();
            let l = if rng.random_bool(p_pos) { Label::Positive } else { Label::Negative };
            LabeledInstance::new(f, l, start + i as u64)
        })
        .collect()
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// Full sort by (distance, arrival, serial), first k.
fn sorted_neighbors<'a>(set: &'a [LabeledInstance], q: &[f64], k: usize, skip: Option<InstanceId>) -> Vec<(&'a LabeledInstance, f64)> {
    let mut all: Vec<_> = set
        .iter()
        .filter(|i| Some(i.id()) != skip)
        .map(|i| (i, dist(&i.features, q)))
        .collect();
    all.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.id().cmp(&b.0.id())));
    all.truncate(k);
    all
}

fn brute_vote(set: &[LabeledInstance], q: &[f64], k: usize) -> Label {
    let (mut p, mut n) = (0.0, 0.0);
    for (i, d) in sorted_neighbors(set, q, k, None) {
        let w = 1.0 / d.max(1e-12);
        if i.label == Label::Positive {
            p += w
        } else {
            n += w
        }
    }
    if p >= n {
        Label::Positive
    } else {
        Label::Negative
    }
}

#[test]
fn knn_matches_bruteforce() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for case in 0..1000 {
        let n = rng.random_range(1..60);
        let set = random_set(&mut rng, n, 3, 0.4, 0);
        let q: Vec<f64> = (0..3).map(|_| rng.random_range(0..8) as f64 * 0.5).collect();
        let k = rng.random_range(1..8);
        assert_eq!(knn_predict(&set, &q, k).unwrap(), brute_vote(&set, &q, k), "case {case}");
    }
}

fn brute_ks(a: &[f64], b: &[f64]) -> f64 {
    let ecdf = |s: &[f64], x: f64| s.iter().filter(|&&v| v <= x).count() as f64 / s.len() as f64;
    a.iter()
        .chain(b)
        .map(|&x| (ecdf(a, x) - ecdf(b, x)).abs())
        .fold(0.0, f64::max)
}

#[test]
fn ks_matches_ecdf_scan() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..1000 {
        let n = rng.random_range(1..60);
        let m = rng.random_range(1..60);
        // few distinct values to exercise ties
        let a: Vec<f64> = (0..n).map(|_| rng.random_range(0..12) as f64 / 11.0).collect();
        let b: Vec<f64> = (0..m).map(|_| rng.random_range(0..12) as f64 / 11.0).collect();
        let d = ks_statistic(&a, &b).unwrap();
        assert!((d - brute_ks(&a, &b)).abs() <= 1e-12);
    }
}

#[test]
fn minority_kinds_match_bruteforce() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..1000 {
        let n = rng.random_range(2..50);
        let set = random_set(&mut rng, n, 2, 0.3, 0);
        let m = rng.random_range(1..8);
        let got = classify_minority(&set, Label::Positive, m);
        let want: Vec<(usize, MinorityKind)> = set
            .iter()
            .enumerate()
            .filter(|(_, i)| i.label == Label::Positive)
            .map(|(idx, p)| {
                let nn = sorted_neighbors(&set, &p.features, m, Some(p.id()));
                let others = nn.iter().filter(|(i, _)| i.label != Label::Positive).count();
                let kind = if others == nn.len() {
                    MinorityKind::Noise
                } else if 2 * others >= nn.len() {
                    MinorityKind::Danger
                } else {
                    MinorityKind::Safe
                };
                (idx, kind)
            })
            .collect();
        assert_eq!(got, want);
    }
}

fn brute_neighborhood(mem: &[LabeledInstance], anchor: &LabeledInstance, theta: f64, k: usize, same: bool) -> BTreeSet<InstanceId> {
    sorted_neighbors(mem, &anchor.features, k, None)
        .into_iter()
        .filter(|(i, d)| *d <= theta && (i.label == anchor.label) == same)
        .map(|(i, _)| i.id())
        .collect()
}

#[test]
fn cleaning_sets_match_bruteforce() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for _ in 0..1000 {
        let n = rng.random_range(0..50);
        let mem = random_set(&mut rng, n, 2, 0.5, 0);
        let anchor = random_set(&mut rng, 1, 2, 0.5, 1000).remove(0);
        let theta = rng.random_range(0.0..3.0);
        let k = rng.random_range(1..8);
        let is: BTreeSet<_> = inconsistent_set(&mem, &anchor, theta, k).into_iter().collect();
        let cs: BTreeSet<_> = consistent_set(&mem, &anchor, theta, k).into_iter().collect();
        assert_eq!(is, brute_neighborhood(&mem, &anchor, theta, k, false));
        assert_eq!(cs, brute_neighborhood(&mem, &anchor, theta, k, true));
    }
}

#[test]
fn noise_removal_matches_predict_and_compare() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    for _ in 0..1000 {
        let nl = rng.random_range(0..40);
        let nw = rng.random_range(0..30);
        let ltm = random_set(&mut rng, nl, 2, 0.5, 0);
        let wm_set = random_set(&mut rng, nw, 2, 0.5, 100);
        let k = rng.random_range(1..7);
        let want: BTreeSet<InstanceId> = if ltm.is_empty() {
            BTreeSet::new()
        } else {
            wm_set
                .iter()
                .filter(|x| brute_vote(&ltm, &x.features, k) == x.label)
                .map(|x| x.id())
                .collect()
        };
        let mut wm = MemoryBuffer::from_instances(wm_set, None).unwrap();
        let got: BTreeSet<_> = noise_removal(&mut wm, &ltm, k, 1e-12).iter().map(|i| i.id()).collect();
        assert_eq!(got, want);
        assert_eq!(wm.len() + got.len(), nw);
    }
}

/// The cached filter must agree with a full pass after every kind of change.
#[test]
fn incremental_noise_filter_matches_full_pass() {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    for _ in 0..100 {
        let mut serial = 10_000u64;
        let mut ltm = MemoryBuffer::from_instances(random_set(&mut rng, 20, 2, 0.5, 0), None).unwrap();
        let mut wm_a = MemoryBuffer::from_instances(random_set(&mut rng, 15, 2, 0.5, 500), None).unwrap();
        let mut wm_b = wm_a.clone();
        let mut filter = NoiseFilter::new();
        for _ in 0..30 {
            match rng.random_range(0..5) {
                0 if !ltm.is_empty() => {
                    let id = ltm.instances()[rng.random_range(0..ltm.len())].id();
                    let gone = ltm.remove_ids(&[id]);
                    filter.ltm_removed(&gone);
                }
                1 => {
                    let cnt = rng.random_range(1..4);
                    let mut new = random_set(&mut rng, cnt, 2, 0.5, 0);
                    for i in &mut new {
                        serial += 1;
                        i.synthetic_id = serial;
                    }
                    filter.ltm_added(&new);
                    ltm.extend(new).unwrap();
                }
                2 => {
                    let mut new = random_set(&mut rng, 2, 2, 0.5, 0);
                    for i in &mut new {
                        serial += 1;
                        i.synthetic_id = serial;
                    }
                    wm_a.extend(new.clone()).unwrap();
                    wm_b.extend(new).unwrap();
                }
                3 => {
                    filter.invalidate();
                }
                _ => {}
            }
            let k = 3;
            let a: Vec<_> = filter.run(&mut wm_a, ltm.instances(), k, 1e-12).iter().map(|i| i.id()).collect();
            let b: Vec<_> = noise_removal(&mut wm_b, ltm.instances(), k, 1e-12).iter().map(|i| i.id()).collect();
            assert_eq!(a, b);
            assert_eq!(wm_a, wm_b);
        }
    }
}

/// Closed-form 2-D Gaussian log density with explicit 2x2 inverse.
fn closed_form_log_density(points: &[[f64; 2]], x: [f64; 2]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p[0]).sum::<f64>() / n;
    let my = points.iter().map(|p| p[1]).sum::<f64>() / n;
    let (mut a, mut b, mut c) = (0.0, 0.0, 0.0);
    for p in points {
        a += (p[0] - mx) * (p[0] - mx);
        b += (p[0] - mx) * (p[1] - my);
        c += (p[1] - my) * (p[1] - my);
    }
    let (a, b, c) = (a / (n - 1.0), b / (n - 1.0), c / (n - 1.0));
    let ridge = (1e-6 * (a + c) / 2.0).max(1e-9);
    let (a, c) = (a + ridge, c + ridge);
    let det = a * c - b * b;
    let (dx, dy) = (x[0] - mx, x[1] - my);
    let q = (c * dx * dx - 2.0 * b * dx * dy + a * dy * dy) / det;
    -0.5 * (q + det.ln() + 2.0 * (2.0 * std::f64::consts::PI).ln())
}

#[test]
fn gaussian_density_matches_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..1000 {
        let n = rng.random_range(3..30);
        let pts: Vec<[f64; 2]> = (0..n)
            .map(|_| {
                let u: f64 = rng.random_range(-2.0..2.0);
                [u + rng.random_range(-1.0..1.0), 0.5 * u + rng.random_range(-1.0..1.0)]
            })
            .collect();
        let mut stats = GaussianClassStats::new(2);
        for p in &pts {
            stats.update(p);
        }
        let x = [rng.random_range(-4.0..4.0), rng.random_range(-4.0..4.0)];
        let got = stats.log_density(&x).unwrap();
        let want = closed_form_log_density(&pts, x);
        assert!((got - want).abs() <= 1e-9 * want.abs().max(1.0), "{got} vs {want}");
    }
}

#[test]
fn bayes_prediction_is_argmax_of_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(18);
    for _ in 0..300 {
        let mut model = FullBayesModel::new();
        let mut pos = vec![];
        let mut neg = vec![];
        for t in 0..rng.random_range(6..40) {
            let p: [f64; 2] = [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)];
            let l = if rng.random_bool(0.4) { Label::Positive } else { Label::Negative };
            let shifted = if l == Label::Positive { [p[0] + 1.0, p[1]] } else { p };
            if l == Label::Positive { pos.push(shifted) } else { neg.push(shifted) }
            model.update(&LabeledInstance::new(shifted.to_vec(), l, t)).unwrap();
        }
        if pos.len() < 2 || neg.len() < 2 {
            continue;
        }
        let total = (pos.len() + neg.len()) as f64;
        let x = [rng.random_range(-3.0..4.0), rng.random_range(-3.0..3.0)];
        let sp = (pos.len() as f64 / total).ln() + closed_form_log_density(&pos, x);
        let sn = (neg.len() as f64 / total).ln() + closed_form_log_density(&neg, x);
        if (sp - sn).abs() < 1e-7 {
            continue;
        }
        let want = if sp > sn { Label::Positive } else { Label::Negative };
        assert_eq!(model.predict(&x).unwrap(), want);
    }
}
