//! The problem instance: hypotheses, queries with costs, the valid-response
//! relation `q(h)`, per-hypothesis objectives and the threshold `alpha`.

use std::fmt;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};

use crate::error::{InstanceError, ModelError};
use crate::model::{Cost, HypothesisId, Pair, PairSet, QueryId, ResponseId};
use crate::objectives::Objective;
use crate::verify::checker::{self, Shifted};

/// Set of response ids, at most 64 of them.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct ResponseSet(u64);

impl ResponseSet {
    pub const EMPTY: ResponseSet = ResponseSet(0);

    pub fn single(r: ResponseId) -> Self {
        ResponseSet(1 << r.0)
    }

    pub fn contains(self, r: ResponseId) -> bool {
        r.0 < 64 && self.0 & (1 << r.0) != 0
    }

    pub fn insert(&mut self, r: ResponseId) {
        self.0 |= 1 << r.0;
    }

    pub fn union(self, other: ResponseSet) -> ResponseSet {
        ResponseSet(self.0 | other.0)
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    /// Ascending response ids.
    pub fn iter(self) -> impl Iterator<Item = ResponseId> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            (bits != 0).then(|| {
                let r = bits.trailing_zeros();
                bits &= bits - 1;
                ResponseId(r)
            })
        })
    }
}

impl FromIterator<ResponseId> for ResponseSet {
    fn from_iter<I: IntoIterator<Item = ResponseId>>(iter: I) -> Self {
        let mut s = ResponseSet::EMPTY;
        for r in iter {
            s.insert(r);
        }
        s
    }
}

/// A set of hypotheses (a version space).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct HypSet(FixedBitSet);

impl HypSet {
    pub fn full(n: usize) -> Self {
        let mut b = FixedBitSet::with_capacity(n);
        b.insert_range(..);
        HypSet(b)
    }

    pub fn empty(n: usize) -> Self {
        HypSet(FixedBitSet::with_capacity(n))
    }

    pub fn contains(&self, h: HypothesisId) -> bool {
        self.0.contains(h.index())
    }

    pub fn insert(&mut self, h: HypothesisId) {
        self.0.insert(h.index());
    }

    pub fn len(&self) -> usize {
        self.0.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_clear()
    }

    pub fn iter(&self) -> impl Iterator<Item = HypothesisId> + '_ {
        self.0.ones().map(HypothesisId::from)
    }

    pub fn intersect_with(&mut self, other: &HypSet) {
        self.0.intersect_with(&other.0);
    }

    pub fn intersection_count(&self, other: &HypSet) -> usize {
        self.0.intersection_count(&other.0)
    }

    /// Number of members of `self` that are not in `other`.
    pub fn difference_count(&self, other: &HypSet) -> usize {
        self.0.difference_count(&other.0)
    }

    pub fn difference<'a>(&'a self, other: &'a HypSet) -> impl Iterator<Item = HypothesisId> + 'a {
        self.0.difference(&other.0).map(HypothesisId::from)
    }

    pub fn is_subset(&self, other: &HypSet) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn to_vec(&self) -> Vec<HypothesisId> {
        self.iter().collect()
    }
}

impl fmt::Display for HypSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ids: Vec<String> = self.iter().map(|h| h.to_string()).collect();
        write!(f, "{{{}}}", ids.join(", "))
    }
}

/// An interactive submodular set cover instance.
///
/// Built with [`Instance::from_parts`], which only checks shape (ids in
/// range, tables of the right size). Semantic invariants such as non-empty
/// response sets and positive costs are reported by [`validate_instance`].
#[derive(Clone, Debug)]
pub struct Instance {
    hypotheses: usize,
    responses: usize,
    costs: Vec<Cost>,
    valid: Vec<ResponseSet>,
    consistent: Vec<HypSet>,
    alpha: u64,
    objective: Objective,
    query_names: Vec<String>,
    hypothesis_names: Vec<String>,
}

impl Instance {
    /// `valid[q][h]` is the set of responses `q(h)`.
    pub fn from_parts(
        hypotheses: usize,
        responses: usize,
        costs: Vec<Cost>,
        valid: Vec<Vec<ResponseSet>>,
        alpha: u64,
        objective: Objective,
    ) -> Result<Instance, InstanceError> {
        if responses > 64 {
            return Err(InstanceError::TooManyResponses(responses));
        }
        if valid.len() != costs.len() {
            return Err(InstanceError::Shape(format!(
                "valid-response table has {} rows for {} queries",
                valid.len(),
                costs.len()
            )));
        }
        let mut flat = Vec::with_capacity(costs.len() * hypotheses);
        for (q, row) in valid.iter().enumerate() {
            if row.len() != hypotheses {
                return Err(InstanceError::Shape(format!(
                    "valid-response row for q{q} has {} entries for {hypotheses} hypotheses",
                    row.len()
                )));
            }
            for set in row {
                if let Some(r) = set.iter().find(|r| r.index() >= responses) {
                    return Err(InstanceError::UnknownResponse(r));
                }
                flat.push(*set);
            }
        }
        let mut consistent = Vec::with_capacity(costs.len() * responses);
        for q in 0..costs.len() {
            for r in 0..responses {
                let mut set = HypSet::empty(hypotheses);
                for h in 0..hypotheses {
                    if flat[q * hypotheses + h].contains(ResponseId(r as u32)) {
                        set.insert(HypothesisId::from(h));
                    }
                }
                consistent.push(set);
            }
        }
        let inst = Instance {
            hypotheses,
            responses,
            costs,
            valid: flat,
            consistent,
            alpha,
            objective,
            query_names: Vec::new(),
            hypothesis_names: Vec::new(),
        };
        inst.objective.check_shape(&inst)?;
        Ok(inst)
    }

    pub fn with_names(mut self, queries: Vec<String>, hypotheses: Vec<String>) -> Self {
        self.query_names = queries;
        self.hypothesis_names = hypotheses;
        self
    }

    /// Same instance with a different threshold.
    pub fn with_alpha(&self, alpha: u64) -> Instance {
        Instance {
            alpha,
            ..self.clone()
        }
    }

    pub fn num_hypotheses(&self) -> usize {
        self.hypotheses
    }

    pub fn num_queries(&self) -> usize {
        self.costs.len()
    }

    pub fn num_responses(&self) -> usize {
        self.responses
    }

    pub fn alpha(&self) -> u64 {
        self.alpha
    }

    /// `alpha * |H|`, the scaled threshold of the composite objective.
    pub fn scaled_threshold(&self) -> u64 {
        self.alpha * self.hypotheses as u64
    }

    pub fn objective(&self) -> &Objective {
        &self.objective
    }

    pub fn hypotheses(&self) -> impl Iterator<Item = HypothesisId> {
        (0..self.hypotheses).map(HypothesisId::from)
    }

    pub fn queries(&self) -> impl Iterator<Item = QueryId> {
        (0..self.costs.len()).map(QueryId::from)
    }

    pub fn cost(&self, q: QueryId) -> Cost {
        self.costs[q.index()]
    }

    pub fn costs(&self) -> &[Cost] {
        &self.costs
    }

    pub fn valid_responses(&self, q: QueryId, h: HypothesisId) -> ResponseSet {
        self.valid[q.index() * self.hypotheses + h.index()]
    }

    /// Hypotheses `h` with `r ∈ q(h)`.
    pub fn consistent_with(&self, p: Pair) -> &HypSet {
        &self.consistent[p.query.index() * self.responses + p.response.index()]
    }

    /// Union of `q(h)` over the hypotheses in `vs`.
    pub fn responses_for(&self, q: QueryId, vs: &HypSet) -> ResponseSet {
        vs.iter()
            .fold(ResponseSet::EMPTY, |acc, h| acc.union(self.valid_responses(q, h)))
    }

    /// Union of `q(h)` over all hypotheses.
    pub fn all_responses_for(&self, q: QueryId) -> ResponseSet {
        self.responses_for(q, &HypSet::full(self.hypotheses))
    }

    pub fn knows(&self, p: Pair) -> bool {
        p.query.index() < self.costs.len() && p.response.index() < self.responses
    }

    /// Version space without range checks on the pairs.
    pub fn version_space_of(&self, s: &PairSet) -> HypSet {
        let mut vs = HypSet::full(self.hypotheses);
        for p in s {
            vs.intersect_with(self.consistent_with(*p));
        }
        vs
    }

    pub fn query_name(&self, q: QueryId) -> String {
        self.query_names
            .get(q.index())
            .cloned()
            .unwrap_or_else(|| q.to_string())
    }

    pub fn hypothesis_name(&self, h: HypothesisId) -> String {
        self.hypothesis_names
            .get(h.index())
            .cloned()
            .unwrap_or_else(|| h.to_string())
    }

    pub fn query_by_name(&self, name: &str) -> Option<QueryId> {
        self.query_names
            .iter()
            .position(|n| n == name)
            .map(QueryId::from)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&InstanceJson::from(self)).expect("instance serializes")
    }

    pub fn from_json(text: &str) -> Result<Instance, InstanceError> {
        let raw: InstanceJson = serde_json::from_str(text)?;
        raw.try_into()
    }
}

/// `{ h : ∀(q,r) ∈ s, r ∈ q(h) }`.
pub fn version_space(inst: &Instance, s: &PairSet) -> Result<HypSet, ModelError> {
    if let Some(p) = s.iter().find(|p| !inst.knows(**p)) {
        return Err(ModelError::MalformedPair(*p));
    }
    Ok(inst.version_space_of(s))
}

/// One violated instance invariant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    NoHypotheses,
    NoResponses,
    ZeroAlpha,
    EmptyResponseSet { query: QueryId, hypothesis: HypothesisId },
    NonPositiveCost { query: QueryId, cost: Cost },
    Objective { hypothesis: HypothesisId, detail: String },
    CheckTooLarge { pairs: usize, limit: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoHypotheses => f.write_str("hypothesis class is empty"),
            Violation::NoResponses => f.write_str("response set is empty"),
            Violation::ZeroAlpha => f.write_str("alpha must be at least 1"),
            Violation::EmptyResponseSet { query, hypothesis } => {
                write!(f, "valid responses for ({query}, {hypothesis}) are empty")
            }
            Violation::NonPositiveCost { query, cost } => {
                write!(f, "cost of {query} is {cost}, not positive")
            }
            Violation::Objective { hypothesis, detail } => {
                write!(f, "objective of {hypothesis}: {detail}")
            }
            Violation::CheckTooLarge { pairs, limit } => write!(
                f,
                "exhaustive objective check needs {pairs} ground pairs, limit is {limit}"
            ),
        }
    }
}

/// Options for [`validate_instance`].
#[derive(Clone, Copy, Debug)]
pub struct ValidateOptions {
    /// Run the exponential submodularity/monotonicity check on every `F_h`.
    pub check_objectives: bool,
    pub ground_limit: usize,
}

impl Default for ValidateOptions {
    fn default() -> Self {
        ValidateOptions {
            check_objectives: false,
            ground_limit: checker::DEFAULT_GROUND_LIMIT,
        }
    }
}

/// Lists every violated invariant; empty iff the instance is well formed.
///
/// Objectives are checked after subtracting `F_h(∅)`, so constant-shifted
/// objectives such as the dominating-set one pass.
pub fn validate_instance(inst: &Instance, opts: ValidateOptions) -> Vec<Violation> {
    let mut out = Vec::new();
    if inst.num_hypotheses() == 0 {
        out.push(Violation::NoHypotheses);
    }
    if inst.num_responses() == 0 {
        out.push(Violation::NoResponses);
    }
    if inst.alpha() == 0 {
        out.push(Violation::ZeroAlpha);
    }
    for q in inst.queries() {
        for h in inst.hypotheses() {
            if inst.valid_responses(q, h).is_empty() {
                out.push(Violation::EmptyResponseSet {
                    query: q,
                    hypothesis: h,
                });
            }
        }
        if !inst.cost(q).is_positive() {
            out.push(Violation::NonPositiveCost {
                query: q,
                cost: inst.cost(q),
            });
        }
    }
    if opts.check_objectives {
        let ground: Vec<Pair> = inst
            .queries()
            .flat_map(|q| {
                inst.all_responses_for(q)
                    .iter()
                    .map(move |r| Pair::new(q, r))
            })
            .collect();
        if ground.len() > opts.ground_limit {
            out.push(Violation::CheckTooLarge {
                pairs: ground.len(),
                limit: opts.ground_limit,
            });
        } else {
            for h in inst.hypotheses() {
                let f = Shifted(inst.objective().bind(inst, h));
                if let Err(w) = checker::check_submodular_monotone(&f, &ground, opts.ground_limit) {
                    out.push(Violation::Objective {
                        hypothesis: h,
                        detail: w.to_string(),
                    });
                }
            }
        }
    }
    out
}

#[derive(Serialize, Deserialize)]
struct QueryJson {
    id: u32,
    cost: Cost,
}

#[derive(Serialize, Deserialize)]
struct InstanceJson {
    hypotheses: usize,
    queries: Vec<QueryJson>,
    responses: usize,
    valid: Vec<(u32, u32, Vec<u32>)>,
    alpha: u64,
    objective: Objective,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    query_names: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    hypothesis_names: Vec<String>,
}

impl From<&Instance> for InstanceJson {
    fn from(inst: &Instance) -> Self {
        let mut valid = Vec::with_capacity(inst.num_queries() * inst.num_hypotheses());
        for q in inst.queries() {
            for h in inst.hypotheses() {
                let rs = inst.valid_responses(q, h).iter().map(|r| r.0).collect();
                valid.push((q.0, h.0, rs));
            }
        }
        InstanceJson {
            hypotheses: inst.hypotheses,
            queries: inst
                .queries()
                .map(|q| QueryJson {
                    id: q.0,
                    cost: inst.cost(q),
                })
                .collect(),
            responses: inst.responses,
            valid,
            alpha: inst.alpha,
            objective: inst.objective.clone(),
            query_names: inst.query_names.clone(),
            hypothesis_names: inst.hypothesis_names.clone(),
        }
    }
}

impl TryFrom<InstanceJson> for Instance {
    type Error = InstanceError;

    fn try_from(raw: InstanceJson) -> Result<Self, Self::Error> {
        let n_q = raw.queries.len();
        let mut costs: Vec<Option<Cost>> = vec![None; n_q];
        for q in &raw.queries {
            let slot = costs
                .get_mut(q.id as usize)
                .ok_or(InstanceError::UnknownQuery(QueryId(q.id)))?;
            if slot.replace(q.cost).is_some() {
                return Err(InstanceError::Shape(format!("query id {} listed twice", q.id)));
            }
        }
        let costs: Vec<Cost> = costs.into_iter().map(|c| c.expect("ids are a permutation")).collect();
        let mut valid = vec![vec![ResponseSet::EMPTY; raw.hypotheses]; n_q];
        for (q, h, rs) in raw.valid {
            if q as usize >= n_q {
                return Err(InstanceError::UnknownQuery(QueryId(q)));
            }
            if h as usize >= raw.hypotheses {
                return Err(InstanceError::Shape(format!("hypothesis id {h} is out of range")));
            }
            for r in rs {
                if r as usize >= raw.responses || r >= 64 {
                    return Err(InstanceError::UnknownResponse(ResponseId(r)));
                }
                valid[q as usize][h as usize].insert(ResponseId(r));
            }
        }
        Ok(Instance::from_parts(
            raw.hypotheses,
            raw.responses,
            costs,
            valid,
            raw.alpha,
            raw.objective,
        )?
        .with_names(raw.query_names, raw.hypothesis_names))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instgen::gen_threshold_line;

    fn two_hyp(cost: Cost, empty: bool) -> Instance {
        let mut valid = vec![
            vec![ResponseSet::single(ResponseId(0)), ResponseSet::single(ResponseId(1))],
            vec![ResponseSet::single(ResponseId(1)), ResponseSet::single(ResponseId(1))],
        ];
        if empty {
            valid[0][0] = ResponseSet::EMPTY;
        }
        Instance::from_parts(
            2,
            2,
            vec![Cost::integer(1), cost],
            valid,
            1,
            Objective::ElimCount,
        )
        .unwrap()
    }

    #[test]
    fn well_formed_instance_has_no_violations() {
        let inst = two_hyp(Cost::integer(2), false);
        let opts = ValidateOptions {
            check_objectives: true,
            ..Default::default()
        };
        assert!(validate_instance(&inst, opts).is_empty());
    }

    #[test]
    fn empty_response_set_is_reported() {
        let inst = two_hyp(Cost::integer(2), true);
        assert_eq!(
            validate_instance(&inst, ValidateOptions::default()),
            vec![Violation::EmptyResponseSet {
                query: QueryId(0),
                hypothesis: HypothesisId(0)
            }]
        );
    }

    #[test]
    fn zero_cost_is_reported() {
        let inst = two_hyp(Cost::zero(), false);
        let v = validate_instance(&inst, ValidateOptions::default());
        assert_eq!(v.len(), 1);
        assert!(matches!(v[0], Violation::NonPositiveCost { query: QueryId(1), .. }));
    }

    #[test]
    fn version_space_of_empty_set_is_everything() {
        let inst = gen_threshold_line(3).unwrap();
        let vs = version_space(&inst, &PairSet::new()).unwrap();
        assert_eq!(vs.len(), 8);
    }

    #[test]
    fn threshold_line_positive_answer_keeps_upper_half() {
        // q5 answered 1 keeps h5..h8 (ids 4..7).
        let inst = gen_threshold_line(3).unwrap();
        let s: PairSet = [Pair::from((4, 1))].into_iter().collect();
        let vs = version_space(&inst, &s).unwrap();
        assert_eq!(vs.to_vec(), (4..8).map(HypothesisId).collect::<Vec<_>>());
    }

    #[test]
    fn contradictory_pairs_empty_the_version_space() {
        let inst = gen_threshold_line(3).unwrap();
        let s: PairSet = [Pair::from((4, 1)), Pair::from((4, 0))].into_iter().collect();
        assert!(version_space(&inst, &s).unwrap().is_empty());
    }

    #[test]
    fn unknown_pair_is_malformed() {
        let inst = gen_threshold_line(2).unwrap();
        let s: PairSet = [Pair::from((9, 0))].into_iter().collect();
        assert_eq!(
            version_space(&inst, &s),
            Err(ModelError::MalformedPair(Pair::from((9, 0))))
        );
    }

    #[test]
    fn json_round_trip_preserves_tables() {
        let inst = gen_threshold_line(2).unwrap();
        let back = Instance::from_json(&inst.to_json()).unwrap();
        assert_eq!(back.num_queries(), 4);
        for q in inst.queries() {
            for h in inst.hypotheses() {
                assert_eq!(back.valid_responses(q, h), inst.valid_responses(q, h));
            }
        }
        assert_eq!(back.alpha(), 3);
    }

    #[test]
    fn json_missing_valid_entry_is_an_empty_set() {
        let text = r#"{"hypotheses":1,"queries":[{"id":0,"cost":[1,1]}],"responses":1,
            "valid":[],"alpha":1,"objective":{"kind":"elim_count"}}"#;
        let inst = Instance::from_json(text).unwrap();
        assert_eq!(validate_instance(&inst, ValidateOptions::default()).len(), 1);
    }
}
