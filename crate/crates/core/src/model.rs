//! Identifiers, question-response pairs and exact costs.
//!
//! Hypotheses, queries and responses are dense integer ids `0..n`. Costs are
//! exact rationals so that every cost comparison is a cross-multiplication.

use std::collections::BTreeSet;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign};

use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

macro_rules! dense_id {
    ($name:ident, $prefix:literal) => {
        #[derive(
            Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
        )]
        #[serde(transparent)]
        pub struct $name(pub u32);

        impl $name {
            #[inline]
            pub fn index(self) -> usize {
                self.0 as usize
            }
        }

        impl From<usize> for $name {
            fn from(i: usize) -> Self {
                $name(i as u32)
            }
        }

        impl From<u32> for $name {
            fn from(i: u32) -> Self {
                $name(i)
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, concat!($prefix, "{}"), self.0)
            }
        }
    };
}

dense_id!(HypothesisId, "h");
dense_id!(QueryId, "q");
dense_id!(ResponseId, "r");

/// A single question-response pair `(q, r)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Pair {
    pub query: QueryId,
    pub response: ResponseId,
}

impl Pair {
    pub fn new(query: impl Into<QueryId>, response: impl Into<ResponseId>) -> Self {
        Pair {
            query: query.into(),
            response: response.into(),
        }
    }
}

impl From<(u32, u32)> for Pair {
    fn from((q, r): (u32, u32)) -> Self {
        Pair {
            query: QueryId(q),
            response: ResponseId(r),
        }
    }
}

impl fmt::Display for Pair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.query, self.response)
    }
}

/// A set of question-response pairs. Ordered, so it doubles as a canonical
/// memoization key.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PairSet {
    pairs: BTreeSet<Pair>,
}

impl PairSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts `p`; returns `false` if it was already present.
    pub fn insert(&mut self, p: Pair) -> bool {
        self.pairs.insert(p)
    }

    pub fn contains(&self, p: &Pair) -> bool {
        self.pairs.contains(p)
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Pair> + '_ {
        self.pairs.iter()
    }

    /// Copy of `self` with `p` added.
    pub fn with(&self, p: Pair) -> PairSet {
        let mut out = self.clone();
        out.insert(p);
        out
    }

    pub fn is_subset(&self, other: &PairSet) -> bool {
        self.pairs.is_subset(&other.pairs)
    }

    pub fn asked(&self, q: QueryId) -> bool {
        self.pairs
            .range(Pair::new(q, ResponseId(0))..=Pair::new(q, ResponseId(u32::MAX)))
            .next()
            .is_some()
    }

    /// Distinct queries appearing in the set, ascending.
    pub fn queries(&self) -> impl Iterator<Item = QueryId> + '_ {
        let mut last = None;
        self.pairs.iter().filter_map(move |p| {
            if last == Some(p.query) {
                None
            } else {
                last = Some(p.query);
                Some(p.query)
            }
        })
    }
}

impl FromIterator<Pair> for PairSet {
    fn from_iter<I: IntoIterator<Item = Pair>>(iter: I) -> Self {
        PairSet {
            pairs: iter.into_iter().collect(),
        }
    }
}

impl<'a> IntoIterator for &'a PairSet {
    type Item = &'a Pair;
    type IntoIter = std::collections::btree_set::Iter<'a, Pair>;

    fn into_iter(self) -> Self::IntoIter {
        self.pairs.iter()
    }
}

impl fmt::Display for PairSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, p) in self.pairs.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{p}")?;
        }
        f.write_str("}")
    }
}

/// An exact rational cost. Serialized as `[numerator, denominator]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "(i64, i64)", into = "(i64, i64)")]
pub struct Cost(Ratio<i64>);

impl Cost {
    pub fn new(numer: i64, denom: i64) -> Option<Cost> {
        (denom != 0).then(|| Cost(Ratio::new(numer, denom)))
    }

    pub fn integer(n: i64) -> Cost {
        Cost(Ratio::from_integer(n))
    }

    pub fn zero() -> Cost {
        Cost(Ratio::zero())
    }

    pub fn ratio(self) -> Ratio<i64> {
        self.0
    }

    pub fn numer(self) -> i64 {
        *self.0.numer()
    }

    pub fn denom(self) -> i64 {
        *self.0.denom()
    }

    pub fn is_positive(self) -> bool {
        self.0 > Ratio::zero()
    }

    pub fn to_f64(self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    /// `self − other`, or `None` when that would be negative.
    pub fn checked_sub(self, other: Cost) -> Option<Cost> {
        (self >= other).then(|| Cost(self.0 - other.0))
    }

    /// Multiplies by a non-negative integer.
    pub fn scale(self, k: u64) -> Cost {
        Cost(self.0 * Ratio::from_integer(k as i64))
    }
}

impl Default for Cost {
    fn default() -> Self {
        Cost::zero()
    }
}

impl TryFrom<(i64, i64)> for Cost {
    type Error = String;

    fn try_from((n, d): (i64, i64)) -> Result<Self, Self::Error> {
        Cost::new(n, d).ok_or_else(|| format!("cost {n}/{d} has a zero denominator"))
    }
}

impl From<Cost> for (i64, i64) {
    fn from(c: Cost) -> Self {
        (c.numer(), c.denom())
    }
}

impl From<i64> for Cost {
    fn from(n: i64) -> Self {
        Cost::integer(n)
    }
}

impl std::str::FromStr for Cost {
    type Err = String;

    /// Accepts `"3"` or `"3/2"`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parse = |t: &str| {
            t.trim()
                .parse::<i64>()
                .map_err(|e| format!("bad cost {s:?}: {e}"))
        };
        match s.split_once('/') {
            Some((n, d)) => Cost::new(parse(n)?, parse(d)?).ok_or_else(|| format!("bad cost {s:?}")),
            None => Ok(Cost::integer(parse(s)?)),
        }
    }
}

impl Add for Cost {
    type Output = Cost;

    fn add(self, rhs: Cost) -> Cost {
        Cost(self.0 + rhs.0)
    }
}

impl AddAssign for Cost {
    fn add_assign(&mut self, rhs: Cost) {
        self.0 += rhs.0;
    }
}

impl Sum for Cost {
    fn sum<I: Iterator<Item = Cost>>(iter: I) -> Cost {
        iter.fold(Cost::zero(), Add::add)
    }
}

impl fmt::Display for Cost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A cost that may be infinite (infeasible oracle tables or game states).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CostBound {
    Finite(Cost),
    Infinite,
}

impl CostBound {
    pub fn finite(self) -> Option<Cost> {
        match self {
            CostBound::Finite(c) => Some(c),
            CostBound::Infinite => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, CostBound::Finite(_))
    }

    pub fn plus(self, c: Cost) -> CostBound {
        match self {
            CostBound::Finite(x) => CostBound::Finite(x + c),
            CostBound::Infinite => CostBound::Infinite,
        }
    }
}

impl From<Cost> for CostBound {
    fn from(c: Cost) -> Self {
        CostBound::Finite(c)
    }
}

impl fmt::Display for CostBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CostBound::Finite(c) => write!(f, "{c}"),
            CostBound::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for CostBound {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            CostBound::Finite(c) => c.serialize(s),
            CostBound::Infinite => s.serialize_str("infinite"),
        }
    }
}
