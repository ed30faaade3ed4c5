//! Response models: the per-step adversary, seeded random consistent
//! responders, and fixed answer tables.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::ModelError;
use crate::instance::Instance;
use crate::model::{HypothesisId, Pair, PairSet, QueryId, ResponseId};
use crate::objectives::f_bar_scaled;
use crate::run::Oracle;

/// Answers consistently with `target`, choosing the response that gives the
/// smallest composite value (smallest response id on ties).
#[derive(Clone, Debug)]
pub struct AdversarialOracle {
    target: HypothesisId,
}

pub fn adversarial_oracle(inst: &Instance, target: HypothesisId) -> Result<AdversarialOracle, ModelError> {
    check_target(inst, target)?;
    Ok(AdversarialOracle { target })
}

impl AdversarialOracle {
    pub fn target(&self) -> HypothesisId {
        self.target
    }
}

impl Oracle for AdversarialOracle {
    fn respond(&mut self, inst: &Instance, q: QueryId, s: &PairSet) -> ResponseId {
        let valid = inst.valid_responses(q, self.target);
        if valid.len() == 1 {
            return valid.iter().next().unwrap();
        }
        valid
            .iter()
            .min_by_key(|&r| (f_bar_scaled(inst, &s.with(Pair::new(q, r))).value, r))
            .expect("valid response sets are non-empty")
    }
}

/// Answers from a fixed map `Q → R`, regardless of history. Need not be
/// consistent with any hypothesis.
#[derive(Clone, Debug)]
pub struct TableOracle {
    table: Vec<ResponseId>,
}

pub fn table_oracle(table: Vec<ResponseId>) -> TableOracle {
    TableOracle { table }
}

impl TableOracle {
    pub fn constant(inst: &Instance, r: ResponseId) -> TableOracle {
        TableOracle {
            table: vec![r; inst.num_queries()],
        }
    }

    /// The table that answers every query as `h` would, using the smallest
    /// valid response.
    pub fn for_hypothesis(inst: &Instance, h: HypothesisId) -> TableOracle {
        TableOracle {
            table: inst
                .queries()
                .map(|q| inst.valid_responses(q, h).iter().next().unwrap_or(ResponseId(0)))
                .collect(),
        }
    }

    /// Parses `{"<query>": <response>, ...}` or `[<response>, ...]`; the
    /// table must be total over the instance's queries.
    pub fn from_json(inst: &Instance, text: &str) -> Result<TableOracle, String> {
        let value: serde_json::Value = serde_json::from_str(text).map_err(|e| e.to_string())?;
        let table: Vec<u32> = match value {
            serde_json::Value::Array(_) => serde_json::from_value(value).map_err(|e| e.to_string())?,
            serde_json::Value::Object(_) => {
                let map: BTreeMap<String, u32> =
                    serde_json::from_value(value).map_err(|e| e.to_string())?;
                let mut table = vec![None; inst.num_queries()];
                for (k, r) in map {
                    let q: usize = k.parse().map_err(|_| format!("bad query key {k:?}"))?;
                    *table.get_mut(q).ok_or(format!("query {q} out of range"))? = Some(r);
                }
                table
                    .into_iter()
                    .enumerate()
                    .map(|(q, r)| r.ok_or(format!("no response for query {q}")))
                    .collect::<Result<_, _>>()?
            }
            _ => return Err("table must be a JSON object or array".into()),
        };
        if table.len() != inst.num_queries() {
            return Err(format!(
                "table has {} entries for {} queries",
                table.len(),
                inst.num_queries()
            ));
        }
        if let Some(r) = table.iter().find(|r| **r as usize >= inst.num_responses()) {
            return Err(format!("response {r} out of range"));
        }
        Ok(table_oracle(table.into_iter().map(ResponseId).collect()))
    }
}

impl Oracle for TableOracle {
    fn respond(&mut self, _: &Instance, q: QueryId, _: &PairSet) -> ResponseId {
        self.table[q.index()]
    }
}

/// Draws uniformly from `q(target)` with a seeded generator.
#[derive(Clone, Debug)]
pub struct RandomConsistentOracle {
    target: HypothesisId,
    rng: ChaCha8Rng,
}

pub fn random_consistent_oracle(
    inst: &Instance,
    target: HypothesisId,
    seed: u64,
) -> Result<RandomConsistentOracle, ModelError> {
    check_target(inst, target)?;
    Ok(RandomConsistentOracle {
        target,
        rng: ChaCha8Rng::seed_from_u64(seed),
    })
}

impl Oracle for RandomConsistentOracle {
    fn respond(&mut self, inst: &Instance, q: QueryId, _: &PairSet) -> ResponseId {
        let valid = inst.valid_responses(q, self.target);
        match valid.len() {
            1 => valid.iter().next().unwrap(),
            n => {
                let k = self.rng.gen_range(0..n);
                valid.iter().nth(k).unwrap()
            }
        }
    }
}

fn check_target(inst: &Instance, target: HypothesisId) -> Result<(), ModelError> {
    if target.index() < inst.num_hypotheses() {
        Ok(())
    } else {
        Err(ModelError::UnknownHypothesis(target.0))
    }
}
