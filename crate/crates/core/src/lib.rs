//! Interactive submodular set cover.
//!
//! A hidden hypothesis `h*` from a finite class `H` fixes which answers each
//! query may receive. Asking queries costs money; the goal is to reach
//! `F_{h*}(S) ≥ α` for the submodular objective of the true hypothesis while
//! only ever learning about `h*` through the answers. [`policies`] holds the
//! worst-case greedy policy and the baselines, [`oracles`] the responders,
//! and [`verify`] brute-force checks of the resulting cost bounds on small
//! instances.

pub mod error;
pub mod experiment;
pub mod instance;
pub mod instgen;
pub mod model;
pub mod netapp;
pub mod objectives;
pub mod oracles;
pub mod policies;
pub mod run;
pub mod verify;

pub use error::{
    ExperimentError, GenError, InstanceError, ModelError, NetError, ObjectiveError, PolicyError, RunError, SizeError,
    VerifyError,
};
pub use instance::{validate_instance, version_space, HypSet, Instance, ResponseSet, ValidateOptions, Violation};
pub use model::{Cost, CostBound, HypothesisId, Pair, PairSet, QueryId, ResponseId};
pub use objectives::{f_bar_satisfied, f_bar_scaled, Objective, ScaledCompositeValue};
pub use run::{run_policy, Decision, Oracle, Policy, Step, Transcript};
