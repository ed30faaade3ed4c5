//! Transcripts and the policy-versus-oracle loop.

use serde::Serialize;

use crate::error::{PolicyError, RunError};
use crate::instance::Instance;
use crate::model::{Cost, Pair, PairSet, QueryId, ResponseId};
use crate::objectives::f_bar_satisfied;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Step {
    pub query: QueryId,
    pub response: ResponseId,
}

/// Questions asked and answers received, in order, with the accumulated
/// cost. Repeated questions are charged each time.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Transcript {
    pub steps: Vec<Step>,
    pub total_cost: Cost,
}

impl Transcript {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, inst: &Instance, query: QueryId, response: ResponseId) {
        self.steps.push(Step { query, response });
        self.total_cost += inst.cost(query);
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn asked(&self, q: QueryId) -> bool {
        self.steps.iter().any(|s| s.query == q)
    }

    pub fn pairs(&self) -> PairSet {
        self.steps
            .iter()
            .map(|s| Pair::new(s.query, s.response))
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Decision {
    Ask(QueryId),
    Stop,
}

/// A question-asking strategy.
///
/// Decisions must be a function of the arguments; any state a policy keeps
/// is a cache. The exhaustive worst-case verifiers rely on this to explore
/// response branches with a single policy value.
pub trait Policy {
    fn name(&self) -> &str;

    fn next(
        &mut self,
        inst: &Instance,
        s: &PairSet,
        transcript: &Transcript,
    ) -> Result<Decision, PolicyError>;
}

/// A responder. Consistent oracles only return responses in `q(h*)`.
pub trait Oracle {
    fn respond(&mut self, inst: &Instance, q: QueryId, s: &PairSet) -> ResponseId;
}

/// Asks `policy` for questions and answers them with `oracle` until the
/// policy stops.
pub fn run_policy(
    inst: &Instance,
    policy: &mut dyn Policy,
    oracle: &mut dyn Oracle,
    step_limit: usize,
) -> Result<Transcript, RunError> {
    if step_limit == 0 {
        return Err(RunError::ZeroStepLimit);
    }
    let mut s = PairSet::new();
    let mut transcript = Transcript::new();
    loop {
        let decision = policy.next(inst, &s, &transcript).map_err(|e| match e {
            PolicyError::EmptyVersionSpace => RunError::InconsistentOracle,
            other => RunError::NonTermination {
                steps: transcript.len(),
                reason: other.to_string(),
            },
        })?;
        let q = match decision {
            Decision::Stop => return Ok(transcript),
            Decision::Ask(q) => q,
        };
        if q.index() >= inst.num_queries() {
            return Err(RunError::Protocol(format!(
                "{} asked unknown query {q}",
                policy.name()
            )));
        }
        if transcript.len() >= step_limit {
            return Err(RunError::NonTermination {
                steps: transcript.len(),
                reason: format!("step limit {step_limit} reached"),
            });
        }
        let r = oracle.respond(inst, q, &s);
        if r.index() >= inst.num_responses() {
            return Err(RunError::Protocol(format!("oracle returned unknown response {r}")));
        }
        s.insert(Pair::new(q, r));
        transcript.push(inst, q, r);
    }
}

/// Whether the transcript's pairs satisfy the stopping rule.
pub fn transcript_satisfied(inst: &Instance, t: &Transcript) -> bool {
    f_bar_satisfied(inst, &t.pairs())
}
