use num_rational::Ratio;
use serde::Serialize;

use super::brute::{
    brute_gcc_with, brute_optimal_adaptive_cost_with, brute_optimal_nonadaptive_cost_with, explore_policy,
    policy_worst_case_cost, SearchLimits,
};
use crate::error::VerifyError;
use crate::instance::Instance;
use crate::model::{Cost, CostBound, HypothesisId};
use crate::objectives::Composite;
use crate::oracles::adversarial_oracle;
use crate::policies::{greedy_policy, PolicyKind};
use crate::run::run_policy;

#[derive(Clone, Debug, Serialize)]
pub struct BaselineCost {
    pub policy: String,
    /// Worst case over all consistent response sequences.
    pub worst_case_cost: Option<CostBound>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Copy, Debug, Serialize, PartialEq, Eq)]
pub struct BoundChecks {
    pub gcc_le_optimal_adaptive: bool,
    pub greedy_le_bound: bool,
    pub greedy_worst_case_le_bound: bool,
    pub optimal_adaptive_le_nonadaptive: bool,
    pub per_step_progress: bool,
}

impl BoundChecks {
    pub fn all(&self) -> bool {
        self.gcc_le_optimal_adaptive
            && self.greedy_le_bound
            && self.greedy_worst_case_le_bound
            && self.optimal_adaptive_le_nonadaptive
            && self.per_step_progress
    }
}

/// Greedy's cost next to the exact brute-force quantities that bound it.
#[derive(Clone, Debug, Serialize)]
pub struct BoundReport {
    /// Largest greedy cost against the adversarial oracle over all targets.
    pub greedy_cost: Cost,
    /// Greedy's cost over every consistent response sequence.
    pub greedy_worst_case_cost: CostBound,
    pub gcc: CostBound,
    pub optimal_adaptive_cost: CostBound,
    pub optimal_nonadaptive_cost: CostBound,
    /// `1 + ln(α·|H|)`.
    pub log_factor: f64,
    /// `gcc · (1 + ln(α·|H|))`; absent when GCC is infinite.
    pub bound_value: Option<f64>,
    pub baselines: Vec<BaselineCost>,
    pub progress_steps_checked: usize,
    pub checks: BoundChecks,
}

impl BoundReport {
    pub fn passed(&self) -> bool {
        self.checks.all()
    }
}

fn within_bound(cost: CostBound, gcc: CostBound, log_factor: f64) -> bool {
    match (cost, gcc) {
        (_, CostBound::Infinite) => true,
        (CostBound::Infinite, _) => false,
        (CostBound::Finite(c), CostBound::Finite(g)) => c <= g || c.to_f64() <= g.to_f64() * log_factor,
    }
}

pub fn audit_bounds(inst: &Instance) -> Result<BoundReport, VerifyError> {
    audit_bounds_with(inst, &SearchLimits::default())
}

pub fn audit_bounds_with(inst: &Instance, limits: &SearchLimits) -> Result<BoundReport, VerifyError> {
    let gcc = brute_gcc_with(inst, limits)?;
    let adaptive = brute_optimal_adaptive_cost_with(inst, limits)?;
    let nonadaptive = brute_optimal_nonadaptive_cost_with(inst, limits)?;

    let mut greedy_cost = Cost::zero();
    for h in inst.hypotheses() {
        let mut oracle = adversarial_oracle(inst, h).expect("hypothesis in range");
        let t = run_policy(inst, &mut greedy_policy(inst), &mut oracle, step_limit(inst))?;
        greedy_cost = greedy_cost.max(t.total_cost);
    }

    let threshold = inst.scaled_threshold();
    let mut steps = 0usize;
    let mut progress_ok = true;
    let greedy_worst = explore_policy(inst, &mut greedy_policy(inst), limits, &mut |s, _, q| {
        steps += 1;
        if let CostBound::Finite(g) = gcc {
            let comp = Composite::new(inst, s);
            let gain = Ratio::from_integer(comp.worst_case_gain(q) as i64);
            let need = Ratio::from_integer((threshold - comp.value()) as i64);
            if gain * g.ratio() < inst.cost(q).ratio() * need {
                progress_ok = false;
            }
        }
    })?;

    let log_factor = 1.0 + ((inst.alpha() * inst.num_hypotheses() as u64) as f64).ln();
    let baselines = [PolicyKind::NaiveGreedy, PolicyKind::LearnThenCover, PolicyKind::CoverAll]
        .into_iter()
        .map(|kind| {
            let outcome = kind
                .build(inst)
                .map_err(VerifyError::from)
                .and_then(|mut p| policy_worst_case_cost(inst, p.as_mut(), limits));
            match outcome {
                Ok(c) => BaselineCost {
                    policy: kind.to_string(),
                    worst_case_cost: Some(c),
                    error: None,
                },
                Err(e) => BaselineCost {
                    policy: kind.to_string(),
                    worst_case_cost: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();

    let checks = BoundChecks {
        gcc_le_optimal_adaptive: gcc <= adaptive,
        greedy_le_bound: within_bound(greedy_cost.into(), gcc, log_factor),
        greedy_worst_case_le_bound: within_bound(greedy_worst, gcc, log_factor),
        optimal_adaptive_le_nonadaptive: adaptive <= nonadaptive,
        per_step_progress: progress_ok,
    };
    Ok(BoundReport {
        greedy_cost,
        greedy_worst_case_cost: greedy_worst,
        gcc,
        optimal_adaptive_cost: adaptive,
        optimal_nonadaptive_cost: nonadaptive,
        log_factor,
        bound_value: gcc.finite().map(|g| g.to_f64() * log_factor),
        baselines,
        progress_steps_checked: steps,
        checks,
    })
}

/// Generous step limit for policies that never repeat a query.
pub(crate) fn step_limit(inst: &Instance) -> usize {
    inst.num_queries() * inst.num_responses().max(1) + 1
}

/// Largest cost of `kind` against the adversarial oracle over all targets.
pub fn adversarial_cost(inst: &Instance, kind: PolicyKind) -> Result<(Cost, HypothesisId), VerifyError> {
    let mut worst = (Cost::zero(), HypothesisId(0));
    for h in inst.hypotheses() {
        let mut p = kind.build(inst)?;
        let mut oracle = adversarial_oracle(inst, h).expect("hypothesis in range");
        let t = run_policy(inst, p.as_mut(), &mut oracle, step_limit(inst))?;
        if t.total_cost > worst.0 {
            worst = (t.total_cost, h);
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instgen::{gen_identify_hard_instance, gen_naive_greedy_counterexample, gen_threshold_line};

    fn fin(n: i64) -> CostBound {
        CostBound::Finite(Cost::integer(n))
    }

    #[test]
    fn modular_counterexample_report() {
        let inst = gen_naive_greedy_counterexample(3, Cost::integer(1), Cost::integer(10)).unwrap();
        let r = audit_bounds(&inst).unwrap();
        assert!(r.passed(), "{r:?}");
        assert_eq!(r.greedy_cost, Cost::integer(2));
        assert_eq!(r.gcc, fin(2));
        assert!((r.bound_value.unwrap() - 2.0 * (1.0 + 6f64.ln())).abs() < 1e-12);
        assert_eq!(r.baselines[0].worst_case_cost, Some(fin(30)));
    }

    #[test]
    fn identification_gap_report() {
        let inst = gen_identify_hard_instance(5, Cost::integer(1), Cost::integer(10)).unwrap();
        let r = audit_bounds(&inst).unwrap();
        assert!(r.passed(), "{r:?}");
        assert_eq!(r.greedy_cost, Cost::integer(1));
        assert_eq!(r.gcc, fin(1));
        assert_eq!(r.optimal_adaptive_cost, fin(1));
        let ltc = r.baselines[1].worst_case_cost.unwrap().finite().unwrap();
        assert_eq!(ltc, Cost::integer(41));
        assert!(ltc.to_f64() > r.log_factor);
    }

    #[test]
    fn threshold_line_report() {
        let inst = gen_threshold_line(2).unwrap();
        let r = audit_bounds(&inst).unwrap();
        assert!(r.passed(), "{r:?}");
        assert_eq!(r.greedy_cost, Cost::integer(2));
        assert!(r.progress_steps_checked >= 3);
    }

    #[test]
    fn adversarial_cost_reports_worst_target() {
        let inst = gen_identify_hard_instance(5, Cost::integer(1), Cost::integer(10)).unwrap();
        let (c, h) = adversarial_cost(&inst, PolicyKind::LearnThenCover).unwrap();
        assert_eq!(c, Cost::integer(41));
        assert_eq!(h, HypothesisId(3));
    }
}
