#![allow(dead_code)]

use isc::instance::{HypSet, Instance, ResponseSet};
use isc::model::{Cost, HypothesisId, Pair, PairSet, ResponseId};
use isc::objectives::Objective;
use rand::Rng;

/// Shape bounds for [`random_instance`].
#[derive(Clone, Copy, Debug)]
pub struct Shape {
    pub max_hypotheses: usize,
    pub max_responses: usize,
    pub max_queries: usize,
    /// Upper bound on `|Q|·|R|`.
    pub max_pairs: usize,
    pub max_alpha: u64,
}

fn random_tables(rng: &mut impl Rng, hyps: usize, queries: usize, responses: usize, max_w: u64) -> Vec<Vec<(Pair, u64)>> {
    (0..hyps)
        .map(|_| {
            let mut t = Vec::new();
            for q in 0..queries as u32 {
                for r in 0..responses as u32 {
                    let w = rng.gen_range(0..=max_w);
                    if w > 0 {
                        t.push((Pair::from((q, r)), w));
                    }
                }
            }
            t
        })
        .collect()
}

/// A random integral monotone submodular objective built from modular,
/// max-coverage, elimination-count, truncation and sum pieces.
pub fn random_objective(rng: &mut impl Rng, hyps: usize, queries: usize, responses: usize) -> Objective {
    let modular = |rng: &mut _| Objective::modular(random_tables(rng, hyps, queries, responses, 2));
    let maxcov = |rng: &mut _| Objective::max_coverage(random_tables(rng, hyps, queries, responses, 3));
    match rng.gen_range(0..6) {
        0 => modular(rng),
        1 => maxcov(rng),
        2 => Objective::sum(vec![modular(rng), maxcov(rng)]),
        3 => {
            let cap = rng.gen_range(1..=4);
            Objective::sum(vec![modular(rng), maxcov(rng)]).truncated(cap).unwrap()
        }
        4 => Objective::ElimCount,
        _ => Objective::sum(vec![Objective::ElimCount, modular(rng)]),
    }
}

pub fn random_instance(rng: &mut impl Rng, shape: Shape) -> Instance {
    let hyps = rng.gen_range(1..=shape.max_hypotheses);
    let responses = rng.gen_range(1..=shape.max_responses);
    let max_q = shape.max_queries.min(shape.max_pairs / responses).max(1);
    let queries = rng.gen_range(1..=max_q);
    let valid = (0..queries)
        .map(|_| {
            (0..hyps)
                .map(|_| loop {
                    let mut rs = ResponseSet::EMPTY;
                    for r in 0..responses as u32 {
                        if rng.gen_bool(0.6) {
                            rs.insert(ResponseId(r));
                        }
                    }
                    if !rs.is_empty() {
                        break rs;
                    }
                })
                .collect()
        })
        .collect();
    let costs = (0..queries)
        .map(|_| Cost::new(rng.gen_range(1..=6), rng.gen_range(1..=2)).unwrap())
        .collect();
    let alpha = rng.gen_range(1..=shape.max_alpha);
    let objective = random_objective(rng, hyps, queries, responses);
    Instance::from_parts(hyps, responses, costs, valid, alpha, objective).unwrap()
}

/// Every pair of the instance's full `Q × R` ground set.
pub fn all_pairs(inst: &Instance) -> Vec<Pair> {
    inst.queries()
        .flat_map(|q| (0..inst.num_responses() as u32).map(move |r| Pair::new(q, r)))
        .collect()
}

pub fn subset(ground: &[Pair], mask: usize) -> PairSet {
    (0..ground.len())
        .filter(|i| mask >> i & 1 == 1)
        .map(|i| ground[i])
        .collect()
}

/// Version space computed directly from the valid-response table.
pub fn direct_version_space(inst: &Instance, s: &PairSet) -> Vec<HypothesisId> {
    inst.hypotheses()
        .filter(|&h| s.iter().all(|p| inst.valid_responses(p.query, h).contains(p.response)))
        .collect()
}

pub fn as_vec(vs: &HypSet) -> Vec<HypothesisId> {
    vs.iter().collect()
}
