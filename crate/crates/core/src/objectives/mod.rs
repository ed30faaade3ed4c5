//! Integer-valued monotone submodular objectives over question-response
//! pairs, their combinators, and the composite objective.
//!
//! An [`Objective`] describes the whole family `{F_h : h ∈ H}`: evaluation
//! always names the hypothesis. Families that do not depend on `h` (such as
//! [`Objective::ElimCount`]) simply ignore it. The serialized form is the
//! `"objective"` field of the instance JSON, tagged by `"kind"`.

mod composite;
mod tables;

use std::collections::HashMap;
use std::sync::Arc;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};

use crate::error::ObjectiveError;
use crate::instance::{HypSet, Instance};
use crate::model::{HypothesisId, Pair, PairSet};

pub use composite::{f_bar_satisfied, f_bar_scaled, Composite, ScaledCompositeValue};
pub use tables::{
    ApproxLearning, ApproxLearningParams, CoverageIndex, Dominating, DominatingSpec, PairTables,
    SetCover, SetCoverSpec,
};

/// A set function over question-response pairs. Values are signed so the
/// checker can report non-monotone functions.
pub trait SetFunction {
    fn value(&self, s: &PairSet) -> i64;
}

impl<F: Fn(&PairSet) -> i64> SetFunction for F {
    fn value(&self, s: &PairSet) -> i64 {
        self(s)
    }
}

/// `f(s ∪ {p}) − f(s)`.
pub fn gain(f: &impl SetFunction, s: &PairSet, p: Pair) -> i64 {
    if s.contains(&p) {
        return 0;
    }
    f.value(&s.with(p)) - f.value(s)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Objective {
    /// `|H ∖ V(s)|`, the number of eliminated hypotheses.
    ElimCount,
    /// The κ-mistakes approximate learning objective.
    ApproxLearning(ApproxLearning),
    /// Sum of per-pair weights.
    ModularTable(PairTables),
    /// Maximum per-pair weight over the set (0 on the empty set).
    MaxCoverage(PairTables),
    /// Group members dominated by asked nodes, plus `|V ∖ V_h|`.
    DominatingSet(Arc<Dominating>),
    /// Items of hypothesis `h` covered by the asked sets.
    SetCover(Arc<SetCover>),
    /// `min(F, cap)`.
    Truncated { cap: u64, inner: Box<Objective> },
    /// `Σ_i F_i`.
    Sum { parts: Vec<Objective> },
}

impl Objective {
    /// A modular objective. One table is shared by all hypotheses; otherwise
    /// supply one table per hypothesis.
    pub fn modular(tables: Vec<Vec<(Pair, u64)>>) -> Objective {
        Objective::ModularTable(PairTables::new(tables))
    }

    pub fn max_coverage(tables: Vec<Vec<(Pair, u64)>>) -> Objective {
        Objective::MaxCoverage(PairTables::new(tables))
    }

    pub fn approx_learning(params: ApproxLearningParams) -> Result<Objective, ObjectiveError> {
        Ok(Objective::ApproxLearning(ApproxLearning::try_from(params)?))
    }

    pub fn truncated(self, cap: u64) -> Result<Objective, ObjectiveError> {
        if cap == 0 {
            return Err(ObjectiveError::ZeroCap);
        }
        Ok(Objective::Truncated {
            cap,
            inner: Box::new(self),
        })
    }

    pub fn sum(parts: Vec<Objective>) -> Objective {
        Objective::Sum { parts }
    }

    /// `F_h(s)`.
    pub fn eval(&self, inst: &Instance, h: HypothesisId, s: &PairSet) -> u64 {
        let vs = inst.version_space_of(s);
        self.prepare(inst, s, &vs).value(h)
    }

    /// `F_h` as a standalone set function.
    pub fn bind<'a>(&'a self, inst: &'a Instance, h: HypothesisId) -> BoundObjective<'a> {
        BoundObjective {
            objective: self,
            inst,
            hypothesis: h,
        }
    }

    /// True when `F_h(s)` depends only on which queries were asked.
    pub fn response_independent(&self) -> bool {
        match self {
            Objective::DominatingSet(_) | Objective::SetCover(_) => true,
            Objective::ElimCount
            | Objective::ApproxLearning(_)
            | Objective::ModularTable(_)
            | Objective::MaxCoverage(_) => false,
            Objective::Truncated { inner, .. } => inner.response_independent(),
            Objective::Sum { parts } => parts.iter().all(Objective::response_independent),
        }
    }

    pub(crate) fn check_shape(&self, inst: &Instance) -> Result<(), ObjectiveError> {
        let hyps = inst.num_hypotheses();
        let per_h = |got: usize| {
            if got == hyps {
                Ok(())
            } else {
                Err(ObjectiveError::WrongHypothesisCount {
                    expected: hyps,
                    got,
                })
            }
        };
        match self {
            Objective::ElimCount => Ok(()),
            Objective::ApproxLearning(a) => {
                per_h(a.hypotheses())?;
                if let Some(t) = a.target() {
                    if t.index() >= hyps {
                        return Err(ObjectiveError::WrongHypothesisCount {
                            expected: hyps,
                            got: t.index() + 1,
                        });
                    }
                }
                Ok(())
            }
            Objective::ModularTable(t) | Objective::MaxCoverage(t) => {
                if t.len() != 1 {
                    per_h(t.len())?;
                }
                match t.pairs().find(|p| !inst.knows(*p)) {
                    Some(p) => Err(ObjectiveError::PairOutOfRange(p)),
                    None => Ok(()),
                }
            }
            Objective::DominatingSet(d) => d.index().check_shape(inst),
            Objective::SetCover(c) => c.index().check_shape(inst),
            Objective::Truncated { cap, inner } => {
                if *cap == 0 {
                    return Err(ObjectiveError::ZeroCap);
                }
                inner.check_shape(inst)
            }
            Objective::Sum { parts } => parts.iter().try_for_each(|p| p.check_shape(inst)),
        }
    }

    /// Snapshot of the family at `s`, answering `F_h(s)` and single-pair
    /// gains without re-evaluating from scratch.
    pub(crate) fn prepare<'a>(
        &'a self,
        inst: &'a Instance,
        s: &'a PairSet,
        vs: &HypSet,
    ) -> Prepared<'a> {
        match self {
            Objective::ElimCount => Prepared::ElimCount {
                inst,
                eliminated: (inst.num_hypotheses() - vs.len()) as u64,
                vs: vs.clone(),
            },
            Objective::ApproxLearning(a) => Prepared::Approx {
                obj: a,
                inst,
                vs: vs.clone(),
                cache: HashMap::new(),
            },
            Objective::ModularTable(t) => Prepared::Modular { tables: t, s },
            Objective::MaxCoverage(t) => Prepared::MaxCoverage { tables: t, s },
            Objective::DominatingSet(d) => Prepared::Coverage {
                covered: d.index().covered_by(s),
                index: d.index(),
            },
            Objective::SetCover(c) => Prepared::Coverage {
                covered: c.index().covered_by(s),
                index: c.index(),
            },
            Objective::Truncated { cap, inner } => Prepared::Truncated {
                inner: Box::new(inner.prepare(inst, s, vs)),
                cap: *cap,
            },
            Objective::Sum { parts } => {
                Prepared::Sum(parts.iter().map(|p| p.prepare(inst, s, vs)).collect())
            }
        }
    }
}

/// One member `F_h` of an objective family.
#[derive(Clone, Copy)]
pub struct BoundObjective<'a> {
    objective: &'a Objective,
    inst: &'a Instance,
    hypothesis: HypothesisId,
}

impl SetFunction for BoundObjective<'_> {
    fn value(&self, s: &PairSet) -> i64 {
        self.objective.eval(self.inst, self.hypothesis, s) as i64
    }
}

pub(crate) enum Prepared<'a> {
    ElimCount {
        inst: &'a Instance,
        vs: HypSet,
        eliminated: u64,
    },
    Approx {
        obj: &'a ApproxLearning,
        inst: &'a Instance,
        vs: HypSet,
        cache: HashMap<HypothesisId, u64>,
    },
    Modular {
        tables: &'a PairTables,
        s: &'a PairSet,
    },
    MaxCoverage {
        tables: &'a PairTables,
        s: &'a PairSet,
    },
    Coverage {
        index: &'a CoverageIndex,
        covered: FixedBitSet,
    },
    Truncated {
        inner: Box<Prepared<'a>>,
        cap: u64,
    },
    Sum(Vec<Prepared<'a>>),
}

impl Prepared<'_> {
    /// `F_h(s)`.
    pub(crate) fn value(&self, h: HypothesisId) -> u64 {
        match self {
            Prepared::ElimCount { eliminated, .. } => *eliminated,
            Prepared::Approx { obj, inst, vs, cache } => cache
                .get(&h)
                .copied()
                .unwrap_or_else(|| obj.value(inst.num_hypotheses(), vs, h)),
            Prepared::Modular { tables, s } => s.iter().map(|p| tables.weight(h, *p)).sum(),
            Prepared::MaxCoverage { tables, s } => {
                s.iter().map(|p| tables.weight(h, *p)).max().unwrap_or(0)
            }
            Prepared::Coverage { index, covered } => index.value(h, covered),
            Prepared::Truncated { inner, cap } => inner.value(h).min(*cap),
            Prepared::Sum(parts) => parts.iter().map(|p| p.value(h)).sum(),
        }
    }

    /// `F_h(s ∪ {p}) − F_h(s)`.
    pub(crate) fn gain(&self, h: HypothesisId, p: Pair) -> u64 {
        match self {
            Prepared::ElimCount { inst, vs, .. } => {
                vs.difference_count(inst.consistent_with(p)) as u64
            }
            Prepared::Approx { obj, inst, vs, .. } => obj.gain(vs, inst.consistent_with(p), h),
            Prepared::Modular { tables, s } => {
                if s.contains(&p) {
                    0
                } else {
                    tables.weight(h, p)
                }
            }
            Prepared::MaxCoverage { tables, s } => {
                let cur = s.iter().map(|x| tables.weight(h, *x)).max().unwrap_or(0);
                tables.weight(h, p).saturating_sub(cur)
            }
            Prepared::Coverage { index, covered } => index.gain(h, p.query, covered),
            Prepared::Truncated { inner, cap } => {
                let v = inner.value(h);
                (v + inner.gain(h, p)).min(*cap) - v.min(*cap)
            }
            Prepared::Sum(parts) => parts.iter().map(|x| x.gain(h, p)).sum(),
        }
    }

    /// Precomputes `F_h(s)` for hypotheses whose value is needed repeatedly.
    pub(crate) fn warm(&mut self, hs: &HypSet) {
        match self {
            Prepared::Approx { obj, inst, vs, cache } => {
                for h in hs.iter() {
                    cache.insert(h, obj.value(inst.num_hypotheses(), vs, h));
                }
            }
            Prepared::Truncated { inner, .. } => inner.warm(hs),
            Prepared::Sum(parts) => parts.iter_mut().for_each(|p| p.warm(hs)),
            _ => {}
        }
    }
}
