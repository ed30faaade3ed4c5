//! Data-carrying objective constructions. Each keeps its serialized
//! parameters next to a derived index used for evaluation.

use std::collections::HashMap;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};

use crate::error::ObjectiveError;
use crate::instance::{HypSet, Instance};
use crate::model::{HypothesisId, Pair, PairSet, QueryId};

/// Per-pair weights, either shared by all hypotheses (one table) or one
/// table per hypothesis.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(from = "PairTablesSpec", into = "PairTablesSpec")]
pub struct PairTables {
    tables: Vec<HashMap<Pair, u64>>,
}

#[derive(Clone, Serialize, Deserialize)]
struct PairTablesSpec {
    tables: Vec<Vec<(u32, u32, u64)>>,
}

impl PairTables {
    pub fn new(tables: Vec<Vec<(Pair, u64)>>) -> Self {
        PairTables {
            tables: tables
                .into_iter()
                .map(|t| {
                    let mut m = HashMap::new();
                    for (p, w) in t {
                        *m.entry(p).or_insert(0) += w;
                    }
                    m
                })
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.tables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tables.is_empty()
    }

    pub fn weight(&self, h: HypothesisId, p: Pair) -> u64 {
        let t = if self.tables.len() == 1 {
            &self.tables[0]
        } else {
            &self.tables[h.index()]
        };
        t.get(&p).copied().unwrap_or(0)
    }

    pub(crate) fn pairs(&self) -> impl Iterator<Item = Pair> + '_ {
        self.tables.iter().flat_map(|t| t.keys().copied())
    }
}

impl From<PairTablesSpec> for PairTables {
    fn from(spec: PairTablesSpec) -> Self {
        PairTables::new(
            spec.tables
                .into_iter()
                .map(|t| t.into_iter().map(|(q, r, w)| (Pair::from((q, r)), w)).collect())
                .collect(),
        )
    }
}

impl From<PairTables> for PairTablesSpec {
    fn from(t: PairTables) -> Self {
        PairTablesSpec {
            tables: t
                .tables
                .iter()
                .map(|m| {
                    let mut rows: Vec<_> = m
                        .iter()
                        .map(|(p, w)| (p.query.0, p.response.0, *w))
                        .collect();
                    rows.sort_unstable();
                    rows
                })
                .collect(),
        }
    }
}

/// Parameters of the approximate-learning objective: the data set `X`,
/// each hypothesis's labels on it, and the mistake budget κ.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApproxLearningParams {
    /// `predictions[h][x]` is the label hypothesis `h` assigns to point `x`.
    pub predictions: Vec<Vec<u32>>,
    pub kappa: u64,
    /// Hypothesis whose labels define agreement. `None` means each `F_h`
    /// measures agreement with `h` itself.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<u32>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "ApproxLearningParams", into = "ApproxLearningParams")]
pub struct ApproxLearning {
    params: ApproxLearningParams,
    /// `|X| − κ`.
    margin: u64,
    /// `agree[t * |H| + h'] = min(|X| − κ, #{x : h'(x) = t(x)})`.
    agree: Vec<u64>,
}

impl ApproxLearning {
    pub fn hypotheses(&self) -> usize {
        self.params.predictions.len()
    }

    pub fn target(&self) -> Option<HypothesisId> {
        self.params.target.map(HypothesisId)
    }

    pub fn params(&self) -> &ApproxLearningParams {
        &self.params
    }

    fn capped_agreement(&self, target: HypothesisId, other: HypothesisId) -> u64 {
        self.agree[target.index() * self.hypotheses() + other.index()]
    }

    pub(crate) fn value(&self, num_hypotheses: usize, vs: &HypSet, h: HypothesisId) -> u64 {
        let t = self.target().unwrap_or(h);
        let eliminated = (num_hypotheses - vs.len()) as u64;
        eliminated * self.margin
            + vs.iter()
                .map(|other| self.capped_agreement(t, other))
                .sum::<u64>()
    }

    pub(crate) fn gain(&self, vs: &HypSet, consistent: &HypSet, h: HypothesisId) -> u64 {
        let t = self.target().unwrap_or(h);
        vs.difference(consistent)
            .map(|other| self.margin - self.capped_agreement(t, other))
            .sum()
    }
}

impl TryFrom<ApproxLearningParams> for ApproxLearning {
    type Error = ObjectiveError;

    fn try_from(params: ApproxLearningParams) -> Result<Self, Self::Error> {
        let points = params.predictions.first().map_or(0, Vec::len);
        if let Some(bad) = params.predictions.iter().find(|row| row.len() != points) {
            return Err(ObjectiveError::WrongQueryCount {
                expected: points,
                got: bad.len(),
            });
        }
        if params.kappa > points as u64 {
            return Err(ObjectiveError::KappaTooLarge {
                kappa: params.kappa,
                points,
            });
        }
        let margin = points as u64 - params.kappa;
        let n = params.predictions.len();
        let mut agree = Vec::with_capacity(n * n);
        for t in &params.predictions {
            for other in &params.predictions {
                let same = t.iter().zip(other).filter(|(a, b)| a == b).count() as u64;
                agree.push(same.min(margin));
            }
        }
        Ok(ApproxLearning {
            params,
            margin,
            agree,
        })
    }
}

impl From<ApproxLearning> for ApproxLearningParams {
    fn from(a: ApproxLearning) -> Self {
        a.params
    }
}

/// Items covered by each query, and per hypothesis the items that count
/// plus a constant offset. Coverage ignores responses.
#[derive(Clone, Debug)]
pub struct CoverageIndex {
    items: usize,
    cover: Vec<Vec<u32>>,
    targets: Vec<FixedBitSet>,
    offsets: Vec<u64>,
}

impl CoverageIndex {
    fn new(items: usize, cover: Vec<Vec<u32>>, targets: Vec<FixedBitSet>, offsets: Vec<u64>) -> Self {
        CoverageIndex {
            items,
            cover,
            targets,
            offsets,
        }
    }

    pub fn covered_by(&self, s: &PairSet) -> FixedBitSet {
        let mut covered = FixedBitSet::with_capacity(self.items);
        for q in s.queries() {
            if let Some(items) = self.cover.get(q.index()) {
                for &i in items {
                    covered.insert(i as usize);
                }
            }
        }
        covered
    }

    pub fn value(&self, h: HypothesisId, covered: &FixedBitSet) -> u64 {
        self.targets[h.index()].intersection_count(covered) as u64 + self.offsets[h.index()]
    }

    pub fn gain(&self, h: HypothesisId, q: QueryId, covered: &FixedBitSet) -> u64 {
        let target = &self.targets[h.index()];
        self.cover[q.index()]
            .iter()
            .filter(|&&i| target.contains(i as usize) && !covered.contains(i as usize))
            .count() as u64
    }

    pub fn covers(&self, q: QueryId) -> &[u32] {
        &self.cover[q.index()]
    }

    pub(crate) fn check_shape(&self, inst: &Instance) -> Result<(), ObjectiveError> {
        if self.cover.len() != inst.num_queries() {
            return Err(ObjectiveError::WrongQueryCount {
                expected: inst.num_queries(),
                got: self.cover.len(),
            });
        }
        if self.targets.len() != inst.num_hypotheses() {
            return Err(ObjectiveError::WrongHypothesisCount {
                expected: inst.num_hypotheses(),
                got: self.targets.len(),
            });
        }
        Ok(())
    }
}

/// Serialized dominating-set objective: an undirected graph, one node group
/// per hypothesis, and the node each query sends an ad to.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DominatingSpec {
    pub nodes: u32,
    pub edges: Vec<(u32, u32)>,
    pub groups: Vec<Vec<u32>>,
    /// Node targeted by each query; identity when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub query_node: Option<Vec<u32>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "DominatingSpec", into = "DominatingSpec")]
pub struct Dominating {
    spec: DominatingSpec,
    index: CoverageIndex,
}

impl Dominating {
    pub fn spec(&self) -> &DominatingSpec {
        &self.spec
    }

    pub fn index(&self) -> &CoverageIndex {
        &self.index
    }
}

impl TryFrom<DominatingSpec> for Dominating {
    type Error = ObjectiveError;

    fn try_from(spec: DominatingSpec) -> Result<Self, Self::Error> {
        let n = spec.nodes;
        let check = |v: u32| {
            if v < n {
                Ok(v)
            } else {
                Err(ObjectiveError::NodeOutOfRange { node: v, nodes: n })
            }
        };
        let mut closed: Vec<Vec<u32>> = (0..n).map(|v| vec![v]).collect();
        for &(u, v) in &spec.edges {
            check(u)?;
            check(v)?;
            if u != v {
                closed[u as usize].push(v);
                closed[v as usize].push(u);
            }
        }
        for nb in &mut closed {
            nb.sort_unstable();
            nb.dedup();
        }
        let cover = match &spec.query_node {
            Some(map) => map
                .iter()
                .map(|&v| check(v).map(|v| closed[v as usize].clone()))
                .collect::<Result<Vec<_>, _>>()?,
            None => closed,
        };
        let mut targets = Vec::with_capacity(spec.groups.len());
        let mut offsets = Vec::with_capacity(spec.groups.len());
        for (i, group) in spec.groups.iter().enumerate() {
            let mut set = FixedBitSet::with_capacity(n as usize);
            for &v in group {
                set.insert(check(v)? as usize);
            }
            if set.is_clear() {
                return Err(ObjectiveError::EmptyGroup(i));
            }
            offsets.push(u64::from(n) - set.count_ones(..) as u64);
            targets.push(set);
        }
        Ok(Dominating {
            index: CoverageIndex::new(n as usize, cover, targets, offsets),
            spec,
        })
    }
}

impl From<Dominating> for DominatingSpec {
    fn from(d: Dominating) -> Self {
        d.spec
    }
}

/// Serialized set-cover objective: the items each query covers and, per
/// hypothesis, the items it requires.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SetCoverSpec {
    pub items: u32,
    pub sets: Vec<Vec<u32>>,
    pub targets: Vec<Vec<u32>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "SetCoverSpec", into = "SetCoverSpec")]
pub struct SetCover {
    spec: SetCoverSpec,
    index: CoverageIndex,
}

impl SetCover {
    pub fn spec(&self) -> &SetCoverSpec {
        &self.spec
    }

    pub fn index(&self) -> &CoverageIndex {
        &self.index
    }
}

impl TryFrom<SetCoverSpec> for SetCover {
    type Error = ObjectiveError;

    fn try_from(spec: SetCoverSpec) -> Result<Self, Self::Error> {
        let n = spec.items;
        let in_range = |v: &u32| {
            if *v < n {
                Ok(*v)
            } else {
                Err(ObjectiveError::NodeOutOfRange { node: *v, nodes: n })
            }
        };
        let cover = spec
            .sets
            .iter()
            .map(|s| s.iter().map(in_range).collect::<Result<Vec<_>, _>>())
            .collect::<Result<Vec<_>, _>>()?;
        let mut targets = Vec::with_capacity(spec.targets.len());
        for t in &spec.targets {
            let mut set = FixedBitSet::with_capacity(n as usize);
            for v in t {
                set.insert(in_range(v)? as usize);
            }
            targets.push(set);
        }
        let offsets = vec![0; targets.len()];
        Ok(SetCover {
            index: CoverageIndex::new(n as usize, cover, targets, offsets),
            spec,
        })
    }
}

impl From<SetCover> for SetCoverSpec {
    fn from(c: SetCover) -> Self {
        c.spec
    }
}
