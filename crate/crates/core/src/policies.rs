//! Worst Case Greedy and the three baseline strategies.
//!
//! All policies stop as soon as the composite objective reaches its
//! threshold, and break ties by the smallest query id. Score ratios
//! `gain / cost` are compared exactly.

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;

use crate::error::{ModelError, PolicyError};
use crate::instance::{HypSet, Instance};
use crate::model::{Cost, HypothesisId, Pair, PairSet, QueryId, ResponseId};
use crate::objectives::{f_bar_scaled, Composite};
use crate::run::{Decision, Policy, Transcript};

fn ratio(gain: u64, cost: Cost) -> Ratio<i64> {
    Ratio::from_integer(gain as i64) / cost.ratio()
}

/// Index of the best `(query, score)` by `score / cost`, ties to the
/// earliest entry. Only scores accepted by `keep` are considered.
fn argmax_ratio(
    inst: &Instance,
    scored: impl Iterator<Item = (QueryId, u64)>,
    keep: impl Fn(u64) -> bool,
) -> Option<(QueryId, u64)> {
    let mut best: Option<(QueryId, u64, Ratio<i64>)> = None;
    for (q, g) in scored.filter(|(_, g)| keep(*g)) {
        let r = ratio(g, inst.cost(q));
        if best.as_ref().is_none_or(|(_, _, b)| r > *b) {
            best = Some((q, g, r));
        }
    }
    best.map(|(q, g, _)| (q, g))
}

/// Scaled worst-case gain of asking `q` at `s`, and its cost.
pub fn worst_case_gain(inst: &Instance, s: &PairSet, q: QueryId) -> Result<(u64, Cost), ModelError> {
    if q.index() >= inst.num_queries() {
        return Err(ModelError::UnknownQuery(q));
    }
    Ok((Composite::new(inst, s).worst_case_gain(q), inst.cost(q)))
}

/// Algorithm 1: ask the query maximizing worst-case composite gain per unit
/// cost until the composite objective reaches `α·|H|`.
#[derive(Clone, Debug, Default)]
pub struct GreedyPolicy;

pub fn greedy_policy(_inst: &Instance) -> GreedyPolicy {
    GreedyPolicy
}

impl GreedyPolicy {
    /// The query greedy asks at `s` with its scaled worst-case gain, or
    /// `None` when the stopping rule already holds.
    pub fn select(inst: &Instance, s: &PairSet) -> Result<Option<(QueryId, u64)>, PolicyError> {
        let c = Composite::new(inst, s);
        if c.satisfied() {
            return Ok(None);
        }
        argmax_ratio(inst, inst.queries().map(|q| (q, c.worst_case_gain(q))), |g| g > 0)
            .map(Some)
            .ok_or_else(|| {
                PolicyError::Infeasible(format!(
                    "no query has positive worst-case gain at value {} < {}",
                    c.value(),
                    inst.scaled_threshold()
                ))
            })
    }
}

impl Policy for GreedyPolicy {
    fn name(&self) -> &str {
        "greedy"
    }

    fn next(&mut self, inst: &Instance, s: &PairSet, _: &Transcript) -> Result<Decision, PolicyError> {
        Ok(match GreedyPolicy::select(inst, s)? {
            Some((q, _)) => Decision::Ask(q),
            None => Decision::Stop,
        })
    }
}

/// Maximizes the worst-case gain of `F_h` itself over unasked queries.
#[derive(Clone, Debug, Default)]
pub struct NaiveGreedyPolicy;

pub fn naive_greedy_policy(_inst: &Instance) -> NaiveGreedyPolicy {
    NaiveGreedyPolicy
}

impl Policy for NaiveGreedyPolicy {
    fn name(&self) -> &str {
        "naive-greedy"
    }

    fn next(&mut self, inst: &Instance, s: &PairSet, t: &Transcript) -> Result<Decision, PolicyError> {
        let c = Composite::new(inst, s);
        if c.satisfied() {
            return Ok(Decision::Stop);
        }
        let vs = c.version_space();
        let scored = inst.queries().filter(|q| !t.asked(*q)).map(|q| {
            let worst = vs
                .iter()
                .flat_map(|h| {
                    inst.valid_responses(q, h)
                        .iter()
                        .map(move |r| (h, Pair::new(q, r)))
                })
                .map(|(h, p)| c.raw_gain(h, p))
                .min()
                .unwrap_or(0);
            (q, worst)
        });
        argmax_ratio(inst, scored, |_| true)
            .map(|(q, _)| Decision::Ask(q))
            .ok_or_else(|| PolicyError::Infeasible("every query asked without reaching alpha".into()))
    }
}

/// Identify the target by greedy worst-case elimination, then cover it with
/// classical greedy set cover.
#[derive(Clone, Debug, Default)]
pub struct LearnThenCoverPolicy;

pub fn learn_then_cover_policy(_inst: &Instance) -> LearnThenCoverPolicy {
    LearnThenCoverPolicy
}

impl LearnThenCoverPolicy {
    /// Worst-case number of hypotheses `q` eliminates from `vs`.
    fn worst_elimination(inst: &Instance, vs: &HypSet, q: QueryId) -> u64 {
        inst.responses_for(q, vs)
            .iter()
            .map(|r| vs.difference_count(inst.consistent_with(Pair::new(q, r))) as u64)
            .min()
            .unwrap_or(0)
    }

    /// Truncated gain for each surviving hypothesis under its own worst
    /// valid response, summed.
    fn cover_score(inst: &Instance, c: &Composite<'_>, q: QueryId) -> u64 {
        let alpha = inst.alpha();
        c.version_space()
            .iter()
            .map(|h| {
                let f = c.raw(h);
                inst.valid_responses(q, h)
                    .iter()
                    .map(|r| (f + c.raw_gain(h, Pair::new(q, r))).min(alpha) - f.min(alpha))
                    .min()
                    .unwrap_or(0)
            })
            .sum()
    }
}

impl Policy for LearnThenCoverPolicy {
    fn name(&self) -> &str {
        "learn-then-cover"
    }

    fn next(&mut self, inst: &Instance, s: &PairSet, _: &Transcript) -> Result<Decision, PolicyError> {
        let c = Composite::new(inst, s);
        let vs = c.version_space();
        if vs.is_empty() {
            return Err(PolicyError::EmptyVersionSpace);
        }
        if c.satisfied() {
            return Ok(Decision::Stop);
        }
        if vs.len() > 1 {
            let learn = inst
                .queries()
                .map(|q| (q, Self::worst_elimination(inst, vs, q)));
            if let Some((q, _)) = argmax_ratio(inst, learn, |g| g > 0) {
                return Ok(Decision::Ask(q));
            }
        }
        let cover = inst.queries().map(|q| (q, Self::cover_score(inst, &c, q)));
        argmax_ratio(inst, cover, |g| g > 0)
            .map(|(q, _)| Decision::Ask(q))
            .ok_or_else(|| PolicyError::Infeasible("no query improves coverage of the survivors".into()))
    }
}

/// Non-adaptive baseline: a fixed query plan computed up front and asked in
/// full, whatever the answers.
#[derive(Clone, Debug)]
pub struct CoverAllPolicy {
    plan: Vec<QueryId>,
}

/// Upper bound on consistent answer assignments enumerated per target when
/// planning for response-dependent objectives.
const MAX_ASSIGNMENTS: usize = 4096;

pub fn cover_all_policy(inst: &Instance) -> Result<CoverAllPolicy, PolicyError> {
    let plan = if inst.objective().response_independent() {
        plan_response_independent(inst)?
    } else {
        plan_over_scenarios(inst)?
    };
    Ok(CoverAllPolicy { plan })
}

impl CoverAllPolicy {
    pub fn plan(&self) -> &[QueryId] {
        &self.plan
    }
}

impl Policy for CoverAllPolicy {
    fn name(&self) -> &str {
        "cover-all"
    }

    fn next(&mut self, _inst: &Instance, _s: &PairSet, t: &Transcript) -> Result<Decision, PolicyError> {
        Ok(self.plan.iter().find(|q| !t.asked(**q)).map_or(Decision::Stop, |q| Decision::Ask(*q)))
    }
}

/// Classical greedy on `G(Q̂) = Σ_h min(α, F_h(Q̂))` when responses do not
/// affect the objectives.
fn plan_response_independent(inst: &Instance) -> Result<Vec<QueryId>, PolicyError> {
    let alpha = inst.alpha();
    let goal = inst.scaled_threshold();
    let everyone = HypSet::full(inst.num_hypotheses());
    let probe = |q: QueryId| Pair::new(q, inst.all_responses_for(q).iter().next().unwrap_or(ResponseId(0)));
    let mut chosen = PairSet::new();
    let mut plan = Vec::new();
    loop {
        let prep = inst.objective().prepare(inst, &chosen, &everyone);
        let values: Vec<u64> = inst.hypotheses().map(|h| prep.value(h)).collect();
        let total: u64 = values.iter().map(|v| (*v).min(alpha)).sum();
        if total >= goal {
            return Ok(plan);
        }
        let scored = inst.queries().filter(|q| !chosen.asked(*q)).map(|q| {
            let p = probe(q);
            let g = inst
                .hypotheses()
                .map(|h| {
                    let v = values[h.index()];
                    (v + prep.gain(h, p)).min(alpha) - v.min(alpha)
                })
                .sum();
            (q, g)
        });
        let Some((q, _)) = argmax_ratio(inst, scored, |g| g > 0) else {
            return Err(PolicyError::Infeasible(
                "cover-all: the union of all groups cannot be covered".into(),
            ));
        };
        drop(prep);
        chosen.insert(probe(q));
        plan.push(q);
    }
}

/// Greedy on the composite value summed over every (target, consistent
/// answer assignment) scenario, each scenario scored by its worst
/// assignment.
fn plan_over_scenarios(inst: &Instance) -> Result<Vec<QueryId>, PolicyError> {
    let goal = inst.scaled_threshold() * inst.num_hypotheses() as u64;
    let mut plan: Vec<QueryId> = Vec::new();
    let mut current = scenario_value(inst, &plan)?;
    while current < goal {
        let mut scored = Vec::new();
        let candidates: Vec<QueryId> = inst.queries().filter(|q| !plan.contains(q)).collect();
        for q in candidates {
            plan.push(q);
            let v = scenario_value(inst, &plan)?;
            plan.pop();
            scored.push((q, v.saturating_sub(current)));
        }
        let Some((q, g)) = argmax_ratio(inst, scored.into_iter(), |g| g > 0) else {
            return Err(PolicyError::Infeasible(
                "cover-all: no fixed query set satisfies every scenario".into(),
            ));
        };
        plan.push(q);
        current += g;
    }
    Ok(plan)
}

fn scenario_value(inst: &Instance, plan: &[QueryId]) -> Result<u64, PolicyError> {
    let mut total = 0;
    for target in inst.hypotheses() {
        total += worst_assignment_value(inst, plan, target)?;
    }
    Ok(total)
}

fn worst_assignment_value(
    inst: &Instance,
    plan: &[QueryId],
    target: HypothesisId,
) -> Result<u64, PolicyError> {
    let options: Vec<Vec<Pair>> = plan
        .iter()
        .map(|&q| {
            inst.valid_responses(q, target)
                .iter()
                .map(|r| Pair::new(q, r))
                .collect()
        })
        .collect();
    let count = options
        .iter()
        .try_fold(1usize, |acc, o| acc.checked_mul(o.len()))
        .filter(|n| *n <= MAX_ASSIGNMENTS)
        .ok_or_else(|| PolicyError::Limit(format!("more than {MAX_ASSIGNMENTS} answer assignments")))?;
    let mut worst = u64::MAX;
    for mut code in 0..count {
        let s: PairSet = options
            .iter()
            .map(|o| {
                let p = o[code % o.len()];
                code /= o.len();
                p
            })
            .collect();
        worst = worst.min(f_bar_scaled(inst, &s).value);
    }
    Ok(worst)
}

/// Names accepted on the command line and in configs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PolicyKind {
    Greedy,
    NaiveGreedy,
    LearnThenCover,
    CoverAll,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 4] = [
        PolicyKind::Greedy,
        PolicyKind::NaiveGreedy,
        PolicyKind::LearnThenCover,
        PolicyKind::CoverAll,
    ];

    pub fn build(self, inst: &Instance) -> Result<Box<dyn Policy + Send>, PolicyError> {
        Ok(match self {
            PolicyKind::Greedy => Box::new(greedy_policy(inst)),
            PolicyKind::NaiveGreedy => Box::new(naive_greedy_policy(inst)),
            PolicyKind::LearnThenCover => Box::new(learn_then_cover_policy(inst)),
            PolicyKind::CoverAll => Box::new(cover_all_policy(inst)?),
        })
    }

    pub fn as_str(self) -> &'static str {
        match self {
            PolicyKind::Greedy => "greedy",
            PolicyKind::NaiveGreedy => "naive-greedy",
            PolicyKind::LearnThenCover => "learn-then-cover",
            PolicyKind::CoverAll => "cover-all",
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PolicyKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PolicyKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| format!("unknown policy {s:?} (expected greedy, naive-greedy, learn-then-cover or cover-all)"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::ResponseSet;
    use crate::instgen::{
        gen_cartoon, gen_identify_hard_instance, gen_naive_greedy_counterexample, gen_threshold_line,
    };
    use crate::objectives::Objective;
    use crate::oracles::adversarial_oracle;
    use crate::run::run_policy;

    fn thm5() -> Instance {
        gen_naive_greedy_counterexample(3, Cost::integer(1), Cost::integer(10)).unwrap()
    }

    fn run(inst: &Instance, kind: PolicyKind, target: u32) -> Transcript {
        let mut p = kind.build(inst).unwrap();
        let mut o = adversarial_oracle(inst, HypothesisId(target)).unwrap();
        run_policy(inst, p.as_mut(), &mut o, 1000).unwrap()
    }

    fn queries(t: &Transcript) -> Vec<u32> {
        t.steps.iter().map(|s| s.query.0).collect()
    }

    #[test]
    fn worst_case_gains_on_modular_counterexample() {
        let inst = thm5();
        let s = PairSet::new();
        assert_eq!(worst_case_gain(&inst, &s, QueryId(0)).unwrap(), (3, Cost::integer(1)));
        assert_eq!(worst_case_gain(&inst, &s, QueryId(2)).unwrap(), (2, Cost::integer(10)));
        assert!(worst_case_gain(&inst, &s, QueryId(9)).is_err());
    }

    #[test]
    fn worst_case_gain_of_answered_query_is_zero() {
        let inst = thm5();
        let s: PairSet = [Pair::from((2, 0))].into_iter().collect();
        assert_eq!(worst_case_gain(&inst, &s, QueryId(2)).unwrap().0, 0);
    }

    #[test]
    fn greedy_and_naive_on_modular_counterexample() {
        let inst = thm5();
        for target in 0..2 {
            let g = run(&inst, PolicyKind::Greedy, target);
            assert_eq!(queries(&g), vec![0, 1]);
            assert_eq!(g.total_cost, Cost::integer(2));
            let n = run(&inst, PolicyKind::NaiveGreedy, target);
            assert_eq!(queries(&n), vec![2, 3, 4]);
            assert_eq!(n.total_cost, Cost::integer(30));
        }
    }

    #[test]
    fn greedy_binary_searches_the_threshold_line() {
        let inst = gen_threshold_line(3).unwrap();
        for target in 0..8 {
            assert_eq!(run(&inst, PolicyKind::Greedy, target).len(), 3, "target h{target}");
        }
        assert_eq!(queries(&run(&inst, PolicyKind::Greedy, 0)), vec![4, 2, 1]);
    }

    #[test]
    fn greedy_asks_only_the_cheap_cover_query() {
        let inst = gen_identify_hard_instance(5, Cost::integer(1), Cost::integer(10)).unwrap();
        for target in 0..5 {
            let t = run(&inst, PolicyKind::Greedy, target);
            assert_eq!(queries(&t), vec![5]);
            assert_eq!(t.total_cost, Cost::integer(1));
        }
    }

    #[test]
    fn learn_then_cover_pays_for_identification() {
        let inst = gen_identify_hard_instance(5, Cost::integer(1), Cost::integer(10)).unwrap();
        let worst = (0..5)
            .map(|t| run(&inst, PolicyKind::LearnThenCover, t).total_cost)
            .max()
            .unwrap();
        assert_eq!(worst, Cost::integer(41));
        assert_eq!(queries(&run(&inst, PolicyKind::LearnThenCover, 4)), vec![0, 1, 2, 3, 5]);
    }

    #[test]
    fn learn_then_cover_on_threshold_line_only_learns() {
        let inst = gen_threshold_line(3).unwrap();
        for target in 0..8 {
            assert_eq!(run(&inst, PolicyKind::LearnThenCover, target).len(), 3);
        }
    }

    fn single_cover_instance() -> Instance {
        // Items {0,1,2}; sets {0,1}, {1,2}, {2}; unit costs.
        crate::instgen::reduce_set_cover_single_h(
            &[vec![0, 1], vec![1, 2], vec![2]],
            &[Cost::integer(1); 3],
        )
        .unwrap()
    }

    #[test]
    fn single_hypothesis_policies_agree_with_set_cover_greedy() {
        let inst = single_cover_instance();
        let g = queries(&run(&inst, PolicyKind::Greedy, 0));
        assert_eq!(g, vec![0, 1]);
        assert_eq!(queries(&run(&inst, PolicyKind::NaiveGreedy, 0)), g);
        assert_eq!(queries(&run(&inst, PolicyKind::LearnThenCover, 0)), g);
    }

    #[test]
    fn naive_matches_greedy_when_gains_coincide() {
        // One hypothesis, one response, two queries of weight 2 and 1, alpha 3.
        let table = vec![(Pair::from((0, 0)), 2), (Pair::from((1, 0)), 1)];
        let inst = Instance::from_parts(
            1,
            1,
            vec![Cost::integer(1); 2],
            vec![vec![ResponseSet::single(ResponseId(0))]; 2],
            3,
            Objective::modular(vec![table]),
        )
        .unwrap();
        assert_eq!(
            queries(&run(&inst, PolicyKind::NaiveGreedy, 0)),
            queries(&run(&inst, PolicyKind::Greedy, 0))
        );
    }

    #[test]
    fn cover_all_plans() {
        let (_, _, cartoon) = gen_cartoon();
        let plan = cover_all_policy(&cartoon).unwrap();
        let mut names: Vec<String> = plan.plan().iter().map(|q| cartoon.query_name(*q)).collect();
        names.sort();
        assert_eq!(names, vec!["a1", "c1", "w", "x"]);

        let line = gen_threshold_line(3).unwrap();
        let mut plan: Vec<u32> = cover_all_policy(&line).unwrap().plan().iter().map(|q| q.0).collect();
        plan.sort();
        assert_eq!(plan, (1..8).collect::<Vec<_>>());
    }

    #[test]
    fn cover_all_worst_target_runs_the_whole_line_plan() {
        let inst = gen_threshold_line(3).unwrap();
        let worst = (0..8)
            .map(|t| run(&inst, PolicyKind::CoverAll, t).len())
            .max()
            .unwrap();
        assert_eq!(worst, 7);
    }

    #[test]
    fn infeasible_instance_is_reported() {
        // alpha 5 is out of reach for a unit-weight modular objective on two queries.
        let table = vec![(Pair::from((0, 0)), 1), (Pair::from((1, 0)), 1)];
        let inst = Instance::from_parts(
            1,
            1,
            vec![Cost::integer(1); 2],
            vec![vec![ResponseSet::single(ResponseId(0))]; 2],
            5,
            Objective::modular(vec![table]),
        )
        .unwrap();
        for kind in PolicyKind::ALL {
            let built = kind.build(&inst);
            let Ok(mut p) = built else {
                assert_eq!(kind, PolicyKind::CoverAll);
                continue;
            };
            let mut o = adversarial_oracle(&inst, HypothesisId(0)).unwrap();
            let err = run_policy(&inst, p.as_mut(), &mut o, 100).unwrap_err();
            assert!(matches!(err, crate::error::RunError::NonTermination { .. }), "{kind}: {err}");
        }
    }

    #[test]
    fn policy_names_round_trip() {
        for k in PolicyKind::ALL {
            assert_eq!(k.as_str().parse::<PolicyKind>().unwrap(), k);
        }
        assert!("best".parse::<PolicyKind>().is_err());
    }
}
