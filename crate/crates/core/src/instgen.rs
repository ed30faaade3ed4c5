//! Constructed instances: the naive-greedy and identification
//! counterexamples, the threshold line, set-cover reductions and the
//! four-cluster cartoon.

use std::collections::BTreeSet;
use std::sync::Arc;

use crate::error::GenError;
use crate::instance::{Instance, ResponseSet};
use crate::model::{Cost, Pair, ResponseId};
use crate::netapp::{build_dominating_instance, Graph, HypothesisClass};
use crate::objectives::{Objective, SetCover, SetCoverSpec};

fn param(msg: impl Into<String>) -> GenError {
    GenError::Parameter(msg.into())
}

fn check_costs(costs: &[Cost]) -> Result<(), GenError> {
    match costs.iter().find(|c| !c.is_positive()) {
        Some(c) => Err(param(format!("cost {c} is not positive"))),
        None => Ok(()),
    }
}

fn names(prefix: char, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}{i}")).collect()
}

fn build(
    hyps: usize,
    responses: usize,
    costs: Vec<Cost>,
    valid: Vec<Vec<ResponseSet>>,
    alpha: u64,
    objective: Objective,
) -> Result<Instance, GenError> {
    let q = costs.len();
    Instance::from_parts(hyps, responses, costs, valid, alpha, objective)
        .map(|inst| inst.with_names(names('q', q), names('h', hyps)))
        .map_err(|e| param(e.to_string()))
}

fn single_response(queries: usize, hyps: usize) -> Vec<Vec<ResponseSet>> {
    vec![vec![ResponseSet::single(ResponseId(0)); hyps]; queries]
}

/// Two hypotheses, `α + 2` queries, one response. `h1` needs the cheap `q1`
/// and `h2` the cheap `q2`; every other query is expensive and worth 1 to
/// both.
pub fn gen_naive_greedy_counterexample(alpha: u64, cheap: Cost, expensive: Cost) -> Result<Instance, GenError> {
    if alpha < 2 {
        return Err(param(format!("alpha must be at least 2, got {alpha}")));
    }
    check_costs(&[cheap, expensive])?;
    if expensive <= cheap {
        return Err(param("expensive cost must exceed the cheap cost"));
    }
    let n_q = alpha as usize + 2;
    let table = |own: u32| -> Vec<(Pair, u64)> {
        std::iter::once((Pair::from((own, 0)), alpha))
            .chain((2..n_q as u32).map(|q| (Pair::from((q, 0)), 1)))
            .collect()
    };
    let mut costs = vec![cheap, cheap];
    costs.extend(std::iter::repeat_n(expensive, n_q - 2));
    build(2, 1, costs, single_response(n_q, 2), alpha, Objective::modular(vec![table(0), table(1)]))
}

/// `n` hypotheses and `n + 1` queries: `q_i` answers 1 only for `h_i`, and
/// the cheap `q_{n+1}` alone satisfies every hypothesis.
pub fn gen_identify_hard_instance(n: usize, cheap: Cost, expensive: Cost) -> Result<Instance, GenError> {
    if n < 2 {
        return Err(param(format!("need at least 2 hypotheses, got {n}")));
    }
    check_costs(&[cheap, expensive])?;
    let valid = (0..=n)
        .map(|i| {
            (0..n)
                .map(|j| ResponseSet::single(ResponseId(u32::from(i == j))))
                .collect()
        })
        .collect();
    let mut costs = vec![expensive; n];
    costs.push(cheap);
    let objective = Objective::modular(vec![vec![(Pair::from((n as u32, 0)), 1)]]);
    build(n, 2, costs, valid, 1, objective)
}

/// `2^k` hypotheses on a line; `q_i` answers 1 exactly for `h_j` with
/// `i ≤ j`. Elimination-count objective with `α = |H| − 1`, so the goal is
/// identifying the target.
pub fn gen_threshold_line(k: u32) -> Result<Instance, GenError> {
    if !(1..=10).contains(&k) {
        return Err(param(format!("k must be in 1..=10, got {k}")));
    }
    let n = 1usize << k;
    let valid = (0..n)
        .map(|i| (0..n).map(|j| ResponseSet::single(ResponseId(u32::from(i <= j)))).collect())
        .collect();
    build(n, 2, vec![Cost::integer(1); n], valid, n as u64 - 1, Objective::ElimCount)
}

fn compact_items(sets: &[Vec<u32>], costs: &[Cost]) -> Result<(u32, Vec<Vec<u32>>), GenError> {
    if sets.len() != costs.len() {
        return Err(param(format!("{} sets but {} costs", sets.len(), costs.len())));
    }
    check_costs(costs)?;
    if let Some(i) = sets.iter().position(Vec::is_empty) {
        return Err(param(format!("set {i} is empty")));
    }
    let items: BTreeSet<u32> = sets.iter().flatten().copied().collect();
    if items.is_empty() {
        return Err(param("the ground set is empty"));
    }
    let index = |v: &u32| items.iter().position(|x| x == v).expect("item collected above") as u32;
    let sets = sets.iter().map(|s| s.iter().map(index).collect()).collect();
    Ok((items.len() as u32, sets))
}

fn set_cover_instance(items: u32, sets: Vec<Vec<u32>>, targets: Vec<Vec<u32>>, costs: &[Cost], alpha: u64) -> Result<Instance, GenError> {
    let hyps = targets.len();
    let spec = SetCoverSpec { items, sets, targets };
    let cover = SetCover::try_from(spec).map_err(|e| param(e.to_string()))?;
    build(
        hyps,
        1,
        costs.to_vec(),
        single_response(costs.len(), hyps),
        alpha,
        Objective::SetCover(Arc::new(cover)),
    )
}

/// Set cover as a single hypothesis whose objective counts covered items,
/// with `α` the number of items.
pub fn reduce_set_cover_single_h(sets: &[Vec<u32>], costs: &[Cost]) -> Result<Instance, GenError> {
    let (n, sets) = compact_items(sets, costs)?;
    set_cover_instance(n, sets, vec![(0..n).collect()], costs, u64::from(n))
}

/// Set cover as one hypothesis per item, each satisfied once its item is
/// covered (`α = 1`).
pub fn reduce_set_cover_multi_h(sets: &[Vec<u32>], costs: &[Cost]) -> Result<Instance, GenError> {
    let (n, sets) = compact_items(sets, costs)?;
    set_cover_instance(n, sets, (0..n).map(|i| vec![i]).collect(), costs, 1)
}

pub const CARTOON_NODES: [&str; 15] = [
    "a1", "a2", "a3", "b1", "b2", "b3", "c1", "c2", "c3", "d1", "d2", "d3", "v", "x", "w",
];

/// Fifteen users in four overlapping groups A, B, C, D. `v` belongs to A
/// and B only, `x` is the hub of B and `w` the hub of D.
pub fn gen_cartoon() -> (Graph, HypothesisClass, Instance) {
    let id = |name: &str| CARTOON_NODES.iter().position(|n| *n == name).expect("cartoon node") as u32;
    let edges = [
        ("a1", "a2"),
        ("a1", "a3"),
        ("a1", "v"),
        ("x", "v"),
        ("x", "b1"),
        ("x", "b2"),
        ("x", "b3"),
        ("c1", "c2"),
        ("c1", "c3"),
        ("w", "d1"),
        ("w", "d2"),
        ("w", "d3"),
    ];
    let g = Graph::from_edges(CARTOON_NODES.len(), edges.iter().map(|(u, v)| (id(u), id(v))));
    let groups = [
        vec!["a1", "a2", "a3", "v"],
        vec!["b1", "b2", "b3", "v"],
        vec!["c1", "c2", "c3"],
        vec!["d1", "d2", "d3"],
    ];
    let hc = HypothesisClass::new(groups.iter().map(|g| g.iter().map(|n| id(n)).collect()).collect());
    let inst = build_dominating_instance(&g, &hc, None)
        .expect("cartoon is well formed")
        .with_names(
            CARTOON_NODES.iter().map(|s| s.to_string()).collect(),
            ["A", "B", "C", "D"].iter().map(|s| s.to_string()).collect(),
        );
    (g, hc, inst)
}
