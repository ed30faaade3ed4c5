//! Exact worst-case quantities by exhaustive enumeration.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::error::{PolicyError, SizeError, VerifyError};
use crate::instance::{Instance, ResponseSet};
use crate::model::{Cost, CostBound, Pair, PairSet, QueryId, ResponseId};
use crate::objectives::{f_bar_satisfied, Composite};
use crate::policies::greedy_policy;
use crate::run::{Decision, Policy, Transcript};

/// Size limits for the brute-force searches.
#[derive(Clone, Copy, Debug)]
pub struct SearchLimits {
    /// Largest `|Q|` for GCC table enumeration.
    pub gcc_queries: usize,
    /// Largest per-query response range for GCC table enumeration.
    pub gcc_responses: usize,
    /// Largest number of query subsets enumerated.
    pub subsets: usize,
    /// Largest number of answer assignments per target and subset.
    pub assignments: usize,
    /// Largest number of memoized game states.
    pub states: usize,
}

impl Default for SearchLimits {
    fn default() -> Self {
        SearchLimits {
            gcc_queries: 8,
            gcc_responses: 3,
            subsets: 1 << 16,
            assignments: 1 << 12,
            states: 1 << 22,
        }
    }
}

fn too_large(what: &'static str, actual: usize, limit: usize) -> SizeError {
    SizeError::TooLarge { what, actual, limit }
}

/// Query subsets as bitmasks, cheapest first (ties by mask).
fn subsets_by_cost(inst: &Instance, limits: &SearchLimits) -> Result<Vec<(Cost, u32)>, SizeError> {
    let n = inst.num_queries();
    if n >= 32 || 1usize << n > limits.subsets {
        return Err(too_large("query subsets", 1usize.checked_shl(n as u32).unwrap_or(usize::MAX), limits.subsets));
    }
    let mut out: Vec<(Cost, u32)> = (0..1u32 << n)
        .map(|m| {
            let c = (0..n).filter(|i| m >> i & 1 == 1).map(|i| inst.cost(QueryId(i as u32))).sum();
            (c, m)
        })
        .collect();
    out.sort();
    Ok(out)
}

/// Responses `T` may give to `q`: those valid for some hypothesis.
fn table_range(inst: &Instance, q: QueryId) -> Vec<ResponseId> {
    let rs = inst.all_responses_for(q);
    if rs.is_empty() {
        (0..inst.num_responses() as u32).map(ResponseId).collect()
    } else {
        rs.iter().collect()
    }
}

/// General Cover Cost: the worst case over answer tables `T` of the cheapest
/// query set whose answers under `T` satisfy the composite threshold.
pub fn brute_gcc(inst: &Instance) -> Result<CostBound, SizeError> {
    brute_gcc_with(inst, &SearchLimits::default())
}

pub fn brute_gcc_with(inst: &Instance, limits: &SearchLimits) -> Result<CostBound, SizeError> {
    let n = inst.num_queries();
    if n > limits.gcc_queries {
        return Err(too_large("queries for GCC", n, limits.gcc_queries));
    }
    let ranges: Vec<Vec<ResponseId>> = inst.queries().map(|q| table_range(inst, q)).collect();
    if let Some(widest) = ranges.iter().map(Vec::len).max().filter(|w| *w > limits.gcc_responses) {
        return Err(too_large("responses per query for GCC", widest, limits.gcc_responses));
    }
    let subsets = subsets_by_cost(inst, limits)?;
    let tables: usize = ranges.iter().map(Vec::len).product();
    let gcc = (0..tables)
        .into_par_iter()
        .map(|mut code| {
            let table: Vec<ResponseId> = ranges
                .iter()
                .map(|range| {
                    let r = range[code % range.len()];
                    code /= range.len();
                    r
                })
                .collect();
            subsets
                .iter()
                .find(|(_, m)| {
                    let s: PairSet = (0..n)
                        .filter(|i| m >> i & 1 == 1)
                        .map(|i| Pair::new(QueryId(i as u32), table[i]))
                        .collect();
                    f_bar_satisfied(inst, &s)
                })
                .map_or(CostBound::Infinite, |(c, _)| CostBound::Finite(*c))
        })
        .max()
        .unwrap_or(CostBound::Finite(Cost::zero()));
    Ok(gcc)
}

/// Cheapest query set that satisfies the threshold for every target and
/// every answer assignment consistent with it.
pub fn brute_optimal_nonadaptive_cost(inst: &Instance) -> Result<CostBound, SizeError> {
    brute_optimal_nonadaptive_cost_with(inst, &SearchLimits::default())
}

pub fn brute_optimal_nonadaptive_cost_with(inst: &Instance, limits: &SearchLimits) -> Result<CostBound, SizeError> {
    let n = inst.num_queries();
    let subsets = subsets_by_cost(inst, limits)?;
    let widest = inst
        .hypotheses()
        .map(|h| inst.queries().map(|q| inst.valid_responses(q, h).len()).product::<usize>())
        .max()
        .unwrap_or(1);
    if widest > limits.assignments {
        return Err(too_large("answer assignments", widest, limits.assignments));
    }
    let guarantees = |mask: u32| {
        inst.hypotheses().all(|h| {
            let options: Vec<Vec<Pair>> = (0..n)
                .filter(|i| mask >> i & 1 == 1)
                .map(|i| {
                    let q = QueryId(i as u32);
                    inst.valid_responses(q, h).iter().map(|r| Pair::new(q, r)).collect()
                })
                .collect();
            let count: usize = options.iter().map(Vec::len).product();
            (0..count).all(|mut code| {
                let s: PairSet = options
                    .iter()
                    .map(|o| {
                        let p = o[code % o.len()];
                        code /= o.len();
                        p
                    })
                    .collect();
                f_bar_satisfied(inst, &s)
            })
        })
    };
    Ok(subsets
        .par_iter()
        .position_first(|(_, m)| guarantees(*m))
        .map_or(CostBound::Infinite, |i| CostBound::Finite(subsets[i].0)))
}

#[derive(Clone, Copy, Debug)]
enum Outcome {
    Exact(CostBound),
    /// The value exceeds the recorded budget.
    Above(CostBound),
}

struct Minimax<'a> {
    inst: &'a Instance,
    memo: HashMap<PairSet, Outcome>,
    limit: usize,
}

fn minus(budget: CostBound, c: Cost) -> Option<CostBound> {
    match budget {
        CostBound::Infinite => Some(CostBound::Infinite),
        CostBound::Finite(b) => b.checked_sub(c).map(CostBound::Finite),
    }
}

impl Minimax<'_> {
    /// Exact game value at `s` when it is at most `budget`, else `Above`.
    fn solve(&mut self, s: &PairSet, budget: CostBound) -> Result<Outcome, SizeError> {
        match self.memo.get(s) {
            Some(Outcome::Exact(v)) => return Ok(if *v <= budget { Outcome::Exact(*v) } else { Outcome::Above(budget) }),
            Some(Outcome::Above(b)) if *b >= budget => return Ok(Outcome::Above(budget)),
            _ => {}
        }
        if self.memo.len() >= self.limit {
            return Err(too_large("game states", self.memo.len() + 1, self.limit));
        }
        let inst = self.inst;
        let comp = Composite::new(inst, s);
        if comp.satisfied() {
            let out = Outcome::Exact(CostBound::Finite(Cost::zero()));
            self.memo.insert(s.clone(), out);
            return Ok(out);
        }
        let vs = comp.version_space().clone();
        let mut moves: Vec<(QueryId, u64)> = inst
            .queries()
            .filter(|q| !s.asked(*q))
            .map(|q| (q, comp.worst_case_gain(q)))
            .collect();
        // Promising moves first tighten the bound sooner.
        moves.sort_by(|(qa, ga), (qb, gb)| {
            let (ca, cb) = (inst.cost(*qa).ratio(), inst.cost(*qb).ratio());
            (num_rational::Ratio::from_integer(*gb as i64) * ca)
                .cmp(&(num_rational::Ratio::from_integer(*ga as i64) * cb))
                .then(qa.cmp(qb))
        });
        drop(comp);

        let mut best = CostBound::Infinite;
        let mut best_known = false;
        for (q, _) in moves {
            let cap = budget.min(best);
            let Some(child_budget) = minus(cap, inst.cost(q)) else {
                continue;
            };
            let mut worst = CostBound::Finite(Cost::zero());
            let mut fits = true;
            for r in inst.responses_for(q, &vs).iter() {
                match self.solve(&s.with(Pair::new(q, r)), child_budget)? {
                    Outcome::Exact(v) => worst = worst.max(v),
                    Outcome::Above(_) => {
                        fits = false;
                        break;
                    }
                }
            }
            if fits {
                let total = worst.plus(inst.cost(q));
                if total < best || !best_known {
                    best = total;
                    best_known = true;
                }
            }
        }
        let out = if best_known && best <= budget {
            Outcome::Exact(best)
        } else if budget == CostBound::Infinite {
            Outcome::Exact(CostBound::Infinite)
        } else {
            Outcome::Above(budget)
        };
        self.memo.insert(s.clone(), out);
        Ok(out)
    }
}

/// Optimal adaptive worst-case cost `C*`: the minimax value of the game in
/// which the solver picks unasked queries and the adversary answers with
/// any response consistent with the version space.
pub fn brute_optimal_adaptive_cost(inst: &Instance) -> Result<CostBound, VerifyError> {
    brute_optimal_adaptive_cost_with(inst, &SearchLimits::default())
}

pub fn brute_optimal_adaptive_cost_with(inst: &Instance, limits: &SearchLimits) -> Result<CostBound, VerifyError> {
    let start = match policy_worst_case_cost(inst, &mut greedy_policy(inst), limits) {
        Ok(c) => c,
        Err(VerifyError::Policy(PolicyError::Infeasible(_))) => CostBound::Infinite,
        Err(e) => return Err(e),
    };
    let mut search = Minimax {
        inst,
        memo: HashMap::new(),
        limit: limits.states,
    };
    match search.solve(&PairSet::new(), start)? {
        Outcome::Exact(v) => Ok(v),
        Outcome::Above(_) => unreachable!("greedy's worst case is an achievable upper bound"),
    }
}

/// Worst-case cost of `policy` over every response sequence consistent with
/// some hypothesis.
pub fn policy_worst_case_cost(
    inst: &Instance,
    policy: &mut dyn Policy,
    limits: &SearchLimits,
) -> Result<CostBound, VerifyError> {
    explore_policy(inst, policy, limits, &mut |_, _, _| {})
}

/// Like [`policy_worst_case_cost`], calling `visit(s, transcript, q)` before
/// every question the policy asks.
pub fn explore_policy(
    inst: &Instance,
    policy: &mut dyn Policy,
    limits: &SearchLimits,
    visit: &mut dyn FnMut(&PairSet, &Transcript, QueryId),
) -> Result<CostBound, VerifyError> {
    let mut nodes = 0usize;
    explore(inst, policy, limits, visit, &PairSet::new(), &mut Transcript::new(), &mut nodes)
}

fn explore(
    inst: &Instance,
    policy: &mut dyn Policy,
    limits: &SearchLimits,
    visit: &mut dyn FnMut(&PairSet, &Transcript, QueryId),
    s: &PairSet,
    t: &mut Transcript,
    nodes: &mut usize,
) -> Result<CostBound, VerifyError> {
    *nodes += 1;
    if *nodes > limits.states {
        return Err(too_large("policy tree nodes", *nodes, limits.states).into());
    }
    let q = match policy.next(inst, s, t)? {
        Decision::Stop => return Ok(CostBound::Finite(Cost::zero())),
        Decision::Ask(q) => q,
    };
    if q.index() >= inst.num_queries() {
        return Err(crate::error::RunError::Protocol(format!("{} asked unknown query {q}", policy.name())).into());
    }
    if t.len() > inst.num_queries() * inst.num_responses().max(1) {
        return Err(crate::error::RunError::NonTermination {
            steps: t.len(),
            reason: format!("{} keeps asking without progress", policy.name()),
        }
        .into());
    }
    visit(s, t, q);
    let responses: ResponseSet = inst.responses_for(q, &inst.version_space_of(s));
    let mut worst = CostBound::Finite(Cost::zero());
    for r in responses.iter() {
        let saved = t.total_cost;
        t.push(inst, q, r);
        let sub = explore(inst, policy, limits, visit, &s.with(Pair::new(q, r)), t, nodes);
        t.steps.pop();
        t.total_cost = saved;
        worst = worst.max(sub?);
    }
    Ok(worst.plus(inst.cost(q)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instgen::{
        gen_cartoon, gen_identify_hard_instance, gen_naive_greedy_counterexample, gen_threshold_line,
        reduce_set_cover_multi_h, reduce_set_cover_single_h,
    };
    use crate::policies::{learn_then_cover_policy, naive_greedy_policy};

    fn fin(n: i64) -> CostBound {
        CostBound::Finite(Cost::integer(n))
    }

    fn set_cover_sets() -> Vec<Vec<u32>> {
        vec![vec![1, 2], vec![2, 3], vec![3]]
    }

    #[test]
    fn gcc_examples() {
        let single = reduce_set_cover_single_h(&set_cover_sets(), &[Cost::integer(1); 3]).unwrap();
        assert_eq!(brute_gcc(&single).unwrap(), fin(2));
        let thm5 = gen_naive_greedy_counterexample(3, Cost::integer(1), Cost::integer(10)).unwrap();
        assert_eq!(brute_gcc(&thm5).unwrap(), fin(2));
        let thm6 = gen_identify_hard_instance(5, Cost::integer(1), Cost::integer(10)).unwrap();
        assert_eq!(brute_gcc(&thm6).unwrap(), fin(1));
    }

    #[test]
    fn gcc_rejects_large_instances() {
        let line = gen_threshold_line(4).unwrap();
        assert!(brute_gcc(&line).is_err());
    }

    #[test]
    fn adaptive_examples() {
        let (_, _, cartoon) = gen_cartoon();
        assert_eq!(brute_optimal_adaptive_cost(&cartoon).unwrap(), fin(3));
        assert_eq!(brute_optimal_adaptive_cost(&gen_threshold_line(3).unwrap()).unwrap(), fin(3));
        let single = reduce_set_cover_single_h(&set_cover_sets(), &[Cost::integer(1); 3]).unwrap();
        assert_eq!(brute_optimal_adaptive_cost(&single).unwrap(), fin(2));
    }

    #[test]
    fn nonadaptive_examples() {
        let (_, _, cartoon) = gen_cartoon();
        assert_eq!(brute_optimal_nonadaptive_cost(&cartoon).unwrap(), fin(4));
        assert_eq!(brute_optimal_nonadaptive_cost(&gen_threshold_line(3).unwrap()).unwrap(), fin(7));
        assert_eq!(brute_optimal_nonadaptive_cost(&gen_threshold_line(1).unwrap()).unwrap(), fin(1));
        assert_eq!(brute_optimal_adaptive_cost(&gen_threshold_line(1).unwrap()).unwrap(), fin(1));
    }

    #[test]
    fn single_response_adaptivity_is_useless() {
        for inst in [
            reduce_set_cover_single_h(&set_cover_sets(), &[Cost::integer(1); 3]).unwrap(),
            reduce_set_cover_multi_h(&set_cover_sets(), &[Cost::integer(1); 3]).unwrap(),
            gen_naive_greedy_counterexample(3, Cost::integer(1), Cost::integer(10)).unwrap(),
        ] {
            assert_eq!(
                brute_optimal_adaptive_cost(&inst).unwrap(),
                brute_optimal_nonadaptive_cost(&inst).unwrap()
            );
        }
    }

    #[test]
    fn infeasible_instance_has_infinite_costs() {
        let inst = reduce_set_cover_single_h(&set_cover_sets(), &[Cost::integer(1); 3])
            .unwrap()
            .with_alpha(4);
        assert_eq!(brute_gcc(&inst).unwrap(), CostBound::Infinite);
        assert_eq!(brute_optimal_adaptive_cost(&inst).unwrap(), CostBound::Infinite);
        assert_eq!(brute_optimal_nonadaptive_cost(&inst).unwrap(), CostBound::Infinite);
    }

    #[test]
    fn policy_worst_cases() {
        let thm6 = gen_identify_hard_instance(5, Cost::integer(1), Cost::integer(10)).unwrap();
        let limits = SearchLimits::default();
        assert_eq!(policy_worst_case_cost(&thm6, &mut greedy_policy(&thm6), &limits).unwrap(), fin(1));
        assert_eq!(
            policy_worst_case_cost(&thm6, &mut learn_then_cover_policy(&thm6), &limits).unwrap(),
            fin(41)
        );
        let thm5 = gen_naive_greedy_counterexample(3, Cost::integer(1), Cost::integer(10)).unwrap();
        assert_eq!(
            policy_worst_case_cost(&thm5, &mut naive_greedy_policy(&thm5), &limits).unwrap(),
            fin(30)
        );
    }

    #[test]
    fn state_limit_is_a_size_error() {
        let line = gen_threshold_line(3).unwrap();
        let limits = SearchLimits { states: 4, ..SearchLimits::default() };
        assert!(matches!(
            brute_optimal_adaptive_cost_with(&line, &limits),
            Err(VerifyError::Size(_))
        ));
    }
}
