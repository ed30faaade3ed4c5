//! End-to-end acceptance checks. Runs without the libtest harness and prints
//! one PASS/FAIL line per criterion; exits nonzero if any criterion fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use common::{all_pairs, direct_version_space, random_instance, subset, Shape};
use isc::experiment::{run_experiment, ExperimentConfig};
use isc::instgen::{
    gen_cartoon, gen_identify_hard_instance, gen_naive_greedy_counterexample, gen_threshold_line,
    reduce_set_cover_multi_h, reduce_set_cover_single_h,
};
use isc::model::{Cost, CostBound, HypothesisId, PairSet};
use isc::netapp::sbm_graph;
use isc::objectives::{f_bar_satisfied, f_bar_scaled};
use isc::oracles::adversarial_oracle;
use isc::policies::{greedy_policy, learn_then_cover_policy, PolicyKind};
use isc::run::run_policy;
use isc::verify::{
    adversarial_cost, audit_bounds, brute_gcc, brute_optimal_adaptive_cost, brute_optimal_nonadaptive_cost,
    check_submodular_monotone, policy_worst_case_cost, SearchLimits, DEFAULT_GROUND_LIMIT,
};
use isc::{Instance, Transcript};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Outcome = Result<(), String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn fin(n: i64) -> CostBound {
    CostBound::Finite(Cost::integer(n))
}

fn within(start: Instant, limit: Duration) -> Outcome {
    let took = start.elapsed();
    ensure!(took <= limit, "took {took:?}, limit {limit:?}");
    Ok(())
}

const SUBMOD_INSTANCES: usize = 200;
const SUBMOD_SEED: u64 = 0x5eed_0001;
const SUBMOD_SHAPE: Shape = Shape {
    max_hypotheses: 4,
    max_responses: 2,
    max_queries: 8,
    max_pairs: 8,
    max_alpha: 4,
};

fn submod_instances() -> Vec<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(SUBMOD_SEED);
    (0..SUBMOD_INSTANCES).map(|_| random_instance(&mut rng, SUBMOD_SHAPE)).collect()
}

fn composite_submodular() -> Outcome {
    let start = Instant::now();
    for (i, inst) in submod_instances().iter().enumerate() {
        let ground = all_pairs(inst);
        ensure!(ground.len() <= 8, "instance {i} has {} pairs", ground.len());
        for h in inst.hypotheses() {
            let f = inst.objective().bind(inst, h);
            check_submodular_monotone(&f, &ground, DEFAULT_GROUND_LIMIT)
                .map_err(|e| format!("instance {i}: generated F_{h} is not monotone submodular: {e}"))?;
        }
        let composite = |s: &PairSet| f_bar_scaled(inst, s).value as i64;
        check_submodular_monotone(&composite, &ground, DEFAULT_GROUND_LIMIT)
            .map_err(|e| format!("instance {i}: composite objective: {e}"))?;
    }
    within(start, Duration::from_secs(60))
}

fn threshold_equivalence() -> Outcome {
    let start = Instant::now();
    for (i, inst) in submod_instances().iter().enumerate() {
        let ground = all_pairs(inst);
        for mask in 0..1usize << ground.len() {
            let s = subset(&ground, mask);
            let direct = direct_version_space(inst, &s)
                .into_iter()
                .all(|h| inst.objective().eval(inst, h, &s) >= inst.alpha());
            ensure!(f_bar_satisfied(inst, &s) == direct, "instance {i}, set {s}: disagreement");
        }
    }
    within(start, Duration::from_secs(60))
}

const AUDIT_INSTANCES: usize = 50;
const AUDIT_SEED: u64 = 0x5eed_0003;
const AUDIT_SHAPE: Shape = Shape {
    max_hypotheses: 4,
    max_responses: 2,
    max_queries: 6,
    max_pairs: 12,
    max_alpha: 3,
};

fn bound_audit() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(AUDIT_SEED);
    let mut audited = 0;
    let mut attempts = 0;
    let mut steps = 0;
    while audited < AUDIT_INSTANCES {
        attempts += 1;
        ensure!(attempts <= 20 * AUDIT_INSTANCES, "only {audited} feasible instances in {attempts} draws");
        let inst = random_instance(&mut rng, AUDIT_SHAPE);
        if !brute_optimal_adaptive_cost(&inst).map_err(|e| e.to_string())?.is_finite() {
            continue;
        }
        let r = audit_bounds(&inst).map_err(|e| e.to_string())?;
        ensure!(r.checks.gcc_le_optimal_adaptive, "GCC {} > C* {}", r.gcc, r.optimal_adaptive_cost);
        ensure!(r.checks.greedy_le_bound, "greedy {} above bound {:?}", r.greedy_cost, r.bound_value);
        ensure!(
            r.checks.greedy_worst_case_le_bound,
            "greedy worst case {} above bound {:?}",
            r.greedy_worst_case_cost,
            r.bound_value
        );
        ensure!(r.checks.per_step_progress, "per-step progress inequality violated");
        ensure!(r.progress_steps_checked > 0 || r.greedy_cost == Cost::zero(), "no greedy steps audited");
        steps += r.progress_steps_checked;
        audited += 1;
    }
    println!("    {audited} instances from {attempts} draws, {steps} greedy states checked");
    within(start, Duration::from_secs(300))
}

fn worst_adversarial(inst: &Instance, kind: PolicyKind) -> Result<Cost, String> {
    adversarial_cost(inst, kind).map(|(c, _)| c).map_err(|e| e.to_string())
}

fn naive_greedy_gap() -> Outcome {
    let inst = gen_naive_greedy_counterexample(3, Cost::integer(1), Cost::integer(10)).map_err(|e| e.to_string())?;
    let greedy = worst_adversarial(&inst, PolicyKind::Greedy)?;
    let naive = worst_adversarial(&inst, PolicyKind::NaiveGreedy)?;
    let gcc = brute_gcc(&inst).map_err(|e| e.to_string())?;
    ensure!(greedy == Cost::integer(2), "greedy cost {greedy}");
    ensure!(naive == Cost::integer(30), "naive greedy cost {naive}");
    ensure!(gcc == fin(2), "GCC {gcc}");
    Ok(())
}

fn identification_gap() -> Outcome {
    let inst = gen_identify_hard_instance(5, Cost::integer(1), Cost::integer(10)).map_err(|e| e.to_string())?;
    let limits = SearchLimits::default();
    let greedy = worst_adversarial(&inst, PolicyKind::Greedy)?;
    let greedy_tree = policy_worst_case_cost(&inst, &mut greedy_policy(&inst), &limits).map_err(|e| e.to_string())?;
    let ltc = policy_worst_case_cost(&inst, &mut learn_then_cover_policy(&inst), &limits).map_err(|e| e.to_string())?;
    let ltc_adv = worst_adversarial(&inst, PolicyKind::LearnThenCover)?;
    let c_star = brute_optimal_adaptive_cost(&inst).map_err(|e| e.to_string())?;
    ensure!(greedy == Cost::integer(1) && greedy_tree == fin(1), "greedy cost {greedy} / {greedy_tree}");
    ensure!(ltc == fin(41) && ltc_adv == Cost::integer(41), "learn-then-cover cost {ltc} / {ltc_adv}");
    ensure!(c_star == fin(1), "C* {c_star}");
    Ok(())
}

fn adaptivity_gap() -> Outcome {
    let start = Instant::now();
    let mut last_ratio = 0.0;
    for k in [2u32, 3, 4] {
        let inst = gen_threshold_line(k).map_err(|e| e.to_string())?;
        let greedy = worst_adversarial(&inst, PolicyKind::Greedy)?;
        let greedy_tree = policy_worst_case_cost(&inst, &mut greedy_policy(&inst), &SearchLimits::default())
            .map_err(|e| e.to_string())?;
        let nonadaptive = brute_optimal_nonadaptive_cost(&inst).map_err(|e| e.to_string())?;
        let expected = (1i64 << k) - 1;
        ensure!(greedy == Cost::integer(k as i64), "k={k}: greedy cost {greedy}");
        ensure!(greedy_tree == fin(k as i64), "k={k}: greedy worst case {greedy_tree}");
        ensure!(nonadaptive == fin(expected), "k={k}: non-adaptive cost {nonadaptive}");
        let ratio = expected as f64 / k as f64;
        ensure!(ratio > last_ratio, "k={k}: ratio {ratio} does not grow");
        last_ratio = ratio;
    }
    within(start, Duration::from_secs(60))
}

fn cartoon() -> Outcome {
    let (_, _, inst) = gen_cartoon();
    let adaptive = brute_optimal_adaptive_cost(&inst).map_err(|e| e.to_string())?;
    let nonadaptive = brute_optimal_nonadaptive_cost(&inst).map_err(|e| e.to_string())?;
    let greedy = worst_adversarial(&inst, PolicyKind::Greedy)?;
    ensure!(adaptive == fin(3), "C* {adaptive}");
    ensure!(nonadaptive == fin(4), "non-adaptive cost {nonadaptive}");
    ensure!(greedy <= Cost::integer(3), "greedy cost {greedy}");
    Ok(())
}

/// Classical greedy set cover: most newly covered items per unit cost,
/// ties to the lower index.
fn classical_greedy(sets: &[Vec<u32>], costs: &[Cost]) -> Vec<usize> {
    let mut covered: Vec<u32> = Vec::new();
    let universe: usize = {
        let mut all: Vec<u32> = sets.concat();
        all.sort();
        all.dedup();
        all.len()
    };
    let mut picks = Vec::new();
    while covered.len() < universe {
        let score = |i: usize| {
            let new = sets[i].iter().filter(|x| !covered.contains(x)).count() as i64;
            num_rational::Ratio::from_integer(new) / costs[i].ratio()
        };
        let best = (0..sets.len()).fold(0, |b, i| if score(i) > score(b) { i } else { b });
        picks.push(best);
        covered.extend(sets[best].iter().filter(|x| !covered.contains(x)).copied().collect::<Vec<_>>());
    }
    picks
}

fn set_cover_reductions() -> Outcome {
    let sets = vec![vec![1, 2], vec![2, 3], vec![3]];
    let costs = vec![Cost::integer(1); 3];
    let single = reduce_set_cover_single_h(&sets, &costs).map_err(|e| e.to_string())?;
    let multi = reduce_set_cover_multi_h(&sets, &costs).map_err(|e| e.to_string())?;
    for (name, inst) in [("single", &single), ("multi", &multi)] {
        let c = brute_optimal_adaptive_cost(inst).map_err(|e| e.to_string())?;
        ensure!(c == fin(2), "{name}: C* {c}");
    }
    let weighted = [Cost::integer(2), Cost::integer(1), Cost::new(1, 2).unwrap()];
    for costs in [costs.clone(), weighted.to_vec()] {
        let inst = reduce_set_cover_single_h(&sets, &costs).map_err(|e| e.to_string())?;
        let mut oracle = adversarial_oracle(&inst, HypothesisId(0)).map_err(|e| e.to_string())?;
        let t: Transcript = run_policy(&inst, &mut greedy_policy(&inst), &mut oracle, 10).map_err(|e| e.to_string())?;
        let picks: Vec<usize> = t.steps.iter().map(|s| s.query.index()).collect();
        ensure!(picks == classical_greedy(&sets, &costs), "greedy picked {picks:?}");
    }
    Ok(())
}

fn experiment_config(trials: usize) -> ExperimentConfig {
    ExperimentConfig {
        dataset: "sbm-2x100".into(),
        class: "noisy-clusters:20:50".parse().expect("valid class spec"),
        policies: vec![PolicyKind::Greedy, PolicyKind::LearnThenCover, PolicyKind::CoverAll],
        trials,
        seed: 7,
    }
}

fn experiment_graph() -> isc::netapp::Graph {
    sbm_graph(&[100, 100], 0.1, 0.01, 11).expect("valid probabilities")
}

fn experiment_ordering() -> Outcome {
    let start = Instant::now();
    let res = run_experiment(&experiment_graph(), &experiment_config(100)).map_err(|e| e.to_string())?;
    let s = res.summaries();
    let (greedy, ltc, cover_all) = (s[0].mean, s[1].mean, s[2].mean);
    ensure!(greedy <= ltc, "mean greedy {greedy} > learn-then-cover {ltc}");
    ensure!(greedy <= cover_all, "mean greedy {greedy} > cover-all {cover_all}");
    let t = res.t_test(0, 1).ok_or("t-test unavailable")?;
    ensure!(t.t < 0.0 && t.significant, "greedy vs learn-then-cover t = {} (critical {})", t.t, t.critical);
    println!("    means: greedy {greedy:.2}, learn-then-cover {ltc:.2}, cover-all {cover_all:.2}; t = {:.2}", t.t);
    within(start, Duration::from_secs(600))
}

fn determinism() -> Outcome {
    let (_, _, inst) = gen_cartoon();
    let transcript = |seed: u64| -> Result<String, String> {
        let mut oracle = isc::oracles::random_consistent_oracle(&inst, HypothesisId(2), seed).map_err(|e| e.to_string())?;
        let t = run_policy(&inst, &mut greedy_policy(&inst), &mut oracle, 100).map_err(|e| e.to_string())?;
        serde_json::to_string(&t).map_err(|e| e.to_string())
    };
    ensure!(transcript(3)? == transcript(3)?, "transcripts differ");
    let g = experiment_graph();
    let csv = || -> Result<String, String> {
        run_experiment(&g, &experiment_config(10))
            .and_then(|r| r.to_csv())
            .map_err(|e| e.to_string())
    };
    ensure!(csv()? == csv()?, "experiment CSV differs between runs");
    Ok(())
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("composite objective is monotone submodular", composite_submodular),
        ("stopping rule matches the direct threshold check", threshold_equivalence),
        ("bound audit on random feasible instances", bound_audit),
        ("naive greedy counterexample costs", naive_greedy_gap),
        ("identification counterexample costs", identification_gap),
        ("threshold-line adaptivity gap", adaptivity_gap),
        ("four-group cartoon costs", cartoon),
        ("set-cover reductions", set_cover_reductions),
        ("experiment policy ordering", experiment_ordering),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(()) => println!("criterion {:>2} PASS  {name} ({secs:.2}s)", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name} ({secs:.2}s): {why}", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}
