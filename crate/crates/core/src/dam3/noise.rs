//! Incremental working-memory noise removal.
//!
//! Gives the same result as [`noise_removal`](super::noise_removal) run
//! after every change, but caches each WM instance's LTM neighbourhood and
//! only re-votes instances whose neighbourhood changed. A WM instance that
//! survived a pass keeps surviving until its neighbourhood changes.

use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};

use crate::buffer::MemoryBuffer;
use crate::classifiers::weighted_vote;
use crate::neighbors::k_nearest;
use crate::types::{InstanceId, Label, LabeledInstance};

#[derive(Clone, Copy, Debug)]
struct Cached {
    distance: f64,
    id: InstanceId,
    label: Label,
}

impl Cached {
    fn order(&self, other: &Self) -> Ordering {
        self.distance
            .total_cmp(&other.distance)
            .then_with(|| self.id.cmp(&other.id))
    }
}

/// Neighbourhood cache plus the LTM changes seen since the last pass.
#[derive(Clone, Debug)]
pub struct NoiseFilter {
    neighborhoods: HashMap<InstanceId, Vec<Cached>>,
    removed: HashSet<InstanceId>,
    added: HashSet<InstanceId>,
    stale: bool,
}

impl Default for NoiseFilter {
    fn default() -> Self {
        NoiseFilter {
            neighborhoods: HashMap::new(),
            removed: HashSet::new(),
            added: HashSet::new(),
            stale: true,
        }
    }
}

// A cache: any two filters give identical results on identical memories.
impl PartialEq for NoiseFilter {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

impl NoiseFilter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn ltm_removed<'a>(&mut self, gone: impl IntoIterator<Item = &'a LabeledInstance>) {
        for i in gone {
            let id = i.id();
            self.added.remove(&id);
            self.removed.insert(id);
        }
    }

    pub fn ltm_added<'a>(&mut self, new: impl IntoIterator<Item = &'a LabeledInstance>) {
        self.added.extend(new.into_iter().map(|i| i.id()));
    }

    /// Forces a full recomputation on the next pass.
    pub fn invalidate(&mut self) {
        self.stale = true;
    }

    fn full(ltm: &[LabeledInstance], x: &LabeledInstance, k: usize) -> Vec<Cached> {
        k_nearest(&x.features, &[ltm], k, None)
            .iter()
            .map(|n| Cached {
                distance: n.distance,
                id: n.id,
                label: ltm[n.index].label,
            })
            .collect()
    }

    /// Removes every WM instance that the LTM's kNN labels correctly.
    pub fn run(
        &mut self,
        wm: &mut MemoryBuffer,
        ltm: &[LabeledInstance],
        k: usize,
        epsilon_dist: f64,
    ) -> Vec<LabeledInstance> {
        if ltm.is_empty() {
            self.neighborhoods.clear();
            self.removed.clear();
            self.added.clear();
            self.stale = true;
            return Vec::new();
        }
        let stale = std::mem::take(&mut self.stale);
        let removed = std::mem::take(&mut self.removed);
        let added_ids = std::mem::take(&mut self.added);
        let added: Vec<&LabeledInstance> = if added_ids.is_empty() || stale {
            Vec::new()
        } else {
            ltm.iter().filter(|i| added_ids.contains(&i.id())).collect()
        };

        let mut old = std::mem::take(&mut self.neighborhoods);
        let mut to_check = HashSet::new();
        for x in wm.iter() {
            let id = x.id();
            let cached = if stale { None } else { old.remove(&id) };
            let nn = match cached {
                Some(nn) if !nn.iter().any(|c| removed.contains(&c.id)) => {
                    let mut nn = nn;
                    let mut changed = false;
                    for a in &added {
                        let cand = Cached {
                            distance: crate::neighbors::distance_unchecked(&x.features, &a.features),
                            id: a.id(),
                            label: a.label,
                        };
                        if nn.len() == k && cand.order(&nn[k - 1]) != Ordering::Less {
                            continue;
                        }
                        if nn.iter().any(|c| c.id == cand.id) {
                            continue;
                        }
                        let pos = nn.partition_point(|c| c.order(&cand) == Ordering::Less);
                        nn.insert(pos, cand);
                        nn.truncate(k);
                        changed = true;
                    }
                    if changed {
                        to_check.insert(id);
                    }
                    nn
                }
                _ => {
                    to_check.insert(id);
                    Self::full(ltm, x, k)
                }
            };
            self.neighborhoods.insert(id, nn);
        }

        let neighborhoods = &self.neighborhoods;
        let gone = wm.extract(|x| {
            let id = x.id();
            to_check.contains(&id)
                && weighted_vote(neighborhoods[&id].iter().map(|c| (c.label, c.distance)), epsilon_dist) == x.label
        });
        for g in &gone {
            self.neighborhoods.remove(&g.id());
        }
        gone
    }
}
