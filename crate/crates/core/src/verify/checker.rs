//! Exhaustive normalization, monotonicity and diminishing-returns checks on
//! small ground sets.

use std::fmt;

use thiserror::Error;

use crate::error::SizeError;
use crate::model::{Pair, PairSet};
use crate::objectives::SetFunction;

pub const DEFAULT_GROUND_LIMIT: usize = 12;

/// `F(s) − F(∅)`.
pub struct Shifted<F>(pub F);

impl<F: SetFunction> SetFunction for Shifted<F> {
    fn value(&self, s: &PairSet) -> i64 {
        self.0.value(s) - self.0.value(&PairSet::new())
    }
}

/// A violated property with the sets that exhibit it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Witness {
    NotNormalized { value: i64 },
    NotMonotone { set: PairSet, added: Pair, before: i64, after: i64 },
    NotSubmodular { a: PairSet, b: PairSet, v: Pair, gain_a: i64, gain_b: i64 },
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Witness::NotNormalized { value } => write!(f, "F(∅) = {value}, expected 0"),
            Witness::NotMonotone { set, added, before, after } => {
                write!(f, "F({set} + {added}) = {after} < F({set}) = {before}")
            }
            Witness::NotSubmodular { a, b, v, gain_a, gain_b } => write!(
                f,
                "gain of {v} is {gain_a} at A = {a} but {gain_b} at B = {b} ⊇ A"
            ),
        }
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum CheckError {
    #[error(transparent)]
    Size(#[from] SizeError),
    #[error("{0}")]
    Counterexample(Witness),
}

impl CheckError {
    pub fn witness(&self) -> Option<&Witness> {
        match self {
            CheckError::Counterexample(w) => Some(w),
            CheckError::Size(_) => None,
        }
    }
}

/// Checks `F(∅) = 0`, monotonicity and `F(A+v) − F(A) ≥ F(B+v) − F(B)` for
/// all `A ⊆ B ⊆ ground`, `v ∉ B`. Submodularity witnesses have the smallest
/// possible `|B|`, then the smallest `|A|`.
pub fn check_submodular_monotone<F: SetFunction + ?Sized>(
    f: &F,
    ground: &[Pair],
    limit: usize,
) -> Result<(), CheckError> {
    let n = ground.len();
    if n > limit {
        return Err(SizeError::TooLarge {
            what: "ground set",
            actual: n,
            limit,
        }
        .into());
    }
    let set_of = |mask: usize| -> PairSet { (0..n).filter(|i| mask >> i & 1 == 1).map(|i| ground[i]).collect() };
    let values: Vec<i64> = (0..1usize << n).map(|m| f.value(&set_of(m))).collect();

    if values[0] != 0 {
        return Err(CheckError::Counterexample(Witness::NotNormalized { value: values[0] }));
    }
    for mask in 0..values.len() {
        for i in (0..n).filter(|i| mask >> i & 1 == 0) {
            let (before, after) = (values[mask], values[mask | 1 << i]);
            if after < before {
                return Err(CheckError::Counterexample(Witness::NotMonotone {
                    set: set_of(mask),
                    added: ground[i],
                    before,
                    after,
                }));
            }
        }
    }

    let mut by_size: Vec<usize> = (0..values.len()).collect();
    by_size.sort_by_key(|m| (m.count_ones(), *m));
    for &b in &by_size {
        let mut found: Option<(usize, usize)> = None;
        for v in (0..n).filter(|i| b >> i & 1 == 0) {
            let gain_b = values[b | 1 << v] - values[b];
            // Enumerate submasks of b.
            let mut a = b;
            loop {
                let gain_a = values[a | 1 << v] - values[a];
                if gain_a < gain_b && found.is_none_or(|(fa, _)| a.count_ones() < fa.count_ones()) {
                    found = Some((a, v));
                }
                if a == 0 {
                    break;
                }
                a = (a - 1) & b;
            }
        }
        if let Some((a, v)) = found {
            return Err(CheckError::Counterexample(Witness::NotSubmodular {
                a: set_of(a),
                b: set_of(b),
                v: ground[v],
                gain_a: values[a | 1 << v] - values[a],
                gain_b: values[b | 1 << v] - values[b],
            }));
        }
    }
    Ok(())
}
