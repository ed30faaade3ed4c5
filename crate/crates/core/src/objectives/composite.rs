//! The composite objective, kept in `|H|`-scaled integer form:
//!
//! ```text
//! value(S) = Σ_{h ∈ V(S)} min(α, F_h(S)) + α·|H ∖ V(S)|
//! ```
//!
//! so that `F̄_α(S) = value(S) / |H|` and the stopping rule `F̄_α ≥ α` is
//! `value = α·|H|`.

use serde::Serialize;

use super::Prepared;
use crate::instance::{HypSet, Instance};
use crate::model::{HypothesisId, Pair, PairSet, QueryId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ScaledCompositeValue {
    pub value: u64,
    pub threshold: u64,
}

impl ScaledCompositeValue {
    pub fn satisfied(&self) -> bool {
        self.value >= self.threshold
    }
}

pub fn f_bar_scaled(inst: &Instance, s: &PairSet) -> ScaledCompositeValue {
    let c = Composite::new(inst, s);
    ScaledCompositeValue {
        value: c.value(),
        threshold: inst.scaled_threshold(),
    }
}

/// True iff every hypothesis left in the version space has `F_h ≥ α`.
pub fn f_bar_satisfied(inst: &Instance, s: &PairSet) -> bool {
    f_bar_scaled(inst, s).satisfied()
}

/// The composite objective evaluated at one pair set, with the per-
/// hypothesis values needed to score single-pair extensions.
pub struct Composite<'a> {
    inst: &'a Instance,
    vs: HypSet,
    prepared: Prepared<'a>,
    /// `F_h(S)` for each hypothesis in the version space (0 elsewhere).
    raw: Vec<u64>,
    value: u64,
}

impl<'a> Composite<'a> {
    pub fn new(inst: &'a Instance, s: &'a PairSet) -> Self {
        let vs = inst.version_space_of(s);
        let mut prepared = inst.objective().prepare(inst, s, &vs);
        prepared.warm(&vs);
        let alpha = inst.alpha();
        let mut raw = vec![0; inst.num_hypotheses()];
        let mut value = alpha * (inst.num_hypotheses() - vs.len()) as u64;
        for h in vs.iter() {
            let f = prepared.value(h);
            raw[h.index()] = f;
            value += f.min(alpha);
        }
        Composite {
            inst,
            vs,
            prepared,
            raw,
            value,
        }
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn satisfied(&self) -> bool {
        self.value >= self.inst.scaled_threshold()
    }

    pub fn version_space(&self) -> &HypSet {
        &self.vs
    }

    /// `F_h(S)` for `h` in the version space.
    pub fn raw(&self, h: HypothesisId) -> u64 {
        self.raw[h.index()]
    }

    /// `F_h(S ∪ {p}) − F_h(S)`.
    pub fn raw_gain(&self, h: HypothesisId, p: Pair) -> u64 {
        self.prepared.gain(h, p)
    }

    /// `value(S ∪ {p}) − value(S)`.
    pub fn pair_gain(&self, p: Pair) -> u64 {
        let alpha = self.inst.alpha();
        let consistent = self.inst.consistent_with(p);
        self.vs
            .iter()
            .map(|h| {
                let before = self.raw[h.index()].min(alpha);
                if consistent.contains(h) {
                    (self.raw[h.index()] + self.prepared.gain(h, p)).min(alpha) - before
                } else {
                    alpha - before
                }
            })
            .sum()
    }

    /// Worst-case scaled gain of asking `q`: the minimum of
    /// [`pair_gain`](Self::pair_gain) over responses valid for some
    /// hypothesis in the version space. Zero when the version space is empty.
    pub fn worst_case_gain(&self, q: QueryId) -> u64 {
        self.inst
            .responses_for(q, &self.vs)
            .iter()
            .map(|r| self.pair_gain(Pair::new(q, r)))
            .min()
            .unwrap_or(0)
    }
}
