//! Brute-force ground truth and bound audits for small instances.

mod audit;
mod brute;
pub mod checker;

pub use audit::{adversarial_cost, audit_bounds, audit_bounds_with, BaselineCost, BoundChecks, BoundReport};
pub use brute::{
    brute_gcc, brute_gcc_with, brute_optimal_adaptive_cost, brute_optimal_adaptive_cost_with,
    brute_optimal_nonadaptive_cost, brute_optimal_nonadaptive_cost_with, explore_policy, policy_worst_case_cost,
    SearchLimits,
};
pub use checker::{check_submodular_monotone, CheckError, Shifted, Witness, DEFAULT_GROUND_LIMIT};
