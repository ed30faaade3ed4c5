use std::collections::VecDeque;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::graph::Graph;
use crate::error::NetError;
use crate::model::HypothesisId;

/// One node group per hypothesis. Groups are sorted and may overlap.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct HypothesisClass {
    pub groups: Vec<Vec<u32>>,
}

impl HypothesisClass {
    pub fn new(groups: Vec<Vec<u32>>) -> HypothesisClass {
        let groups = groups
            .into_iter()
            .map(|mut g| {
                g.sort_unstable();
                g.dedup();
                g
            })
            .collect();
        HypothesisClass { groups }
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    pub fn group(&self, h: HypothesisId) -> &[u32] {
        &self.groups[h.index()]
    }

    pub fn extend(&mut self, other: HypothesisClass) {
        self.groups.extend(other.groups);
    }
}

/// Independent generator for stream `stream` of `seed`.
pub(crate) fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Splits the nodes into `k` disjoint nonempty clusters by multi-source BFS
/// from seeded random seed nodes.
///
/// When `k` is at least the number of connected components, every component
/// receives one seed before the rest are drawn, so regions never need to
/// cross components. Components without a seed join the smallest region.
pub fn partition_clusters(g: &Graph, k: usize, seed: u64) -> Result<HypothesisClass, NetError> {
    let n = g.node_count();
    if k == 0 || k > n {
        return Err(NetError::Parameter(format!("cluster count {k} must be in 1..={n}")));
    }
    let mut rng = rng_for(seed, 0);
    let components = g.components();
    let mut seeds: Vec<u32> = Vec::with_capacity(k);
    if k >= components.len() {
        let mut taken = vec![false; n];
        for comp in &components {
            let s = *comp.choose(&mut rng).expect("components are nonempty");
            taken[s as usize] = true;
            seeds.push(s);
        }
        let mut rest: Vec<u32> = (0..n as u32).filter(|v| !taken[*v as usize]).collect();
        rest.shuffle(&mut rng);
        seeds.extend(rest.into_iter().take(k - components.len()));
    } else {
        let mut all: Vec<u32> = (0..n as u32).collect();
        all.shuffle(&mut rng);
        seeds.extend(all.into_iter().take(k));
    }

    let mut owner = vec![usize::MAX; n];
    let mut queue = VecDeque::new();
    for (i, &s) in seeds.iter().enumerate() {
        owner[s as usize] = i;
        queue.push_back(s);
    }
    while let Some(u) = queue.pop_front() {
        for &v in g.neighbors(u) {
            if owner[v as usize] == usize::MAX {
                owner[v as usize] = owner[u as usize];
                queue.push_back(v);
            }
        }
    }
    let mut clusters = vec![Vec::new(); k];
    for (v, &o) in owner.iter().enumerate() {
        if o != usize::MAX {
            clusters[o].push(v as u32);
        }
    }
    for comp in components.iter().filter(|c| owner[c[0] as usize] == usize::MAX) {
        let smallest = (0..k).min_by_key(|i| (clusters[*i].len(), *i)).expect("k >= 1");
        clusters[smallest].extend(comp);
        clusters[smallest].sort_unstable();
    }
    Ok(HypothesisClass::new(clusters))
}

pub const DEFAULT_CLUSTER_SIZES: [usize; 4] = [10, 20, 30, 40];

/// Union of partitions into each of `sizes` clusters.
pub fn gen_clusters_class(g: &Graph, sizes: &[usize], seed: u64) -> Result<HypothesisClass, NetError> {
    if sizes.is_empty() {
        return Err(NetError::Parameter("cluster size list is empty".into()));
    }
    let mut out = HypothesisClass::default();
    for (i, &k) in sizes.iter().enumerate() {
        out.extend(partition_clusters(g, k, rng_for(seed, i as u64 + 1).gen())?);
    }
    Ok(out)
}

/// Appends `m` copies of the target group, each missing one random member.
pub fn gen_noisy_variants(
    base: &HypothesisClass,
    target: HypothesisId,
    m: usize,
    seed: u64,
) -> Result<HypothesisClass, NetError> {
    let group = base
        .groups
        .get(target.index())
        .ok_or_else(|| NetError::Parameter(format!("target {target} is not in the class")))?;
    if group.len() < 2 {
        return Err(NetError::Parameter(format!(
            "target group {target} has {} member(s); variants need at least 2",
            group.len()
        )));
    }
    let mut rng = rng_for(seed, 2);
    let mut out = base.clone();
    for _ in 0..m {
        let drop = rng.gen_range(0..group.len());
        out.groups
            .push(group.iter().enumerate().filter(|(i, _)| *i != drop).map(|(_, v)| *v).collect());
    }
    Ok(out)
}

/// `count` balls of the given radius around uniformly drawn centers.
pub fn gen_balls(g: &Graph, count: usize, radius: usize, seed: u64) -> Result<HypothesisClass, NetError> {
    if g.node_count() == 0 {
        return Err(NetError::Parameter("graph has no nodes".into()));
    }
    let mut rng = rng_for(seed, 3);
    let groups = (0..count)
        .map(|_| g.ball(rng.gen_range(0..g.node_count() as u32), radius))
        .collect();
    Ok(HypothesisClass::new(groups))
}

/// Partition into `k` clusters, then add each cluster's neighbors.
pub fn gen_expanded_clusters(g: &Graph, k: usize, seed: u64) -> Result<HypothesisClass, NetError> {
    let base = partition_clusters(g, k, seed)?;
    let groups = base
        .groups
        .into_iter()
        .map(|c| {
            let mut out = c.clone();
            for v in c {
                out.extend_from_slice(g.neighbors(v));
            }
            out
        })
        .collect();
    Ok(HypothesisClass::new(groups))
}
