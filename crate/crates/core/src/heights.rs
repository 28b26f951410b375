//! Relative heights and (anticanonical) pseudoheights of exceptional
//! collections of line bundles on surfaces.
//!
//! The anticanonical pseudoheight is the minimum over increasing chains
//! `a_0 < .. < a_p` of
//! `sum rheight(L_{a_{k-1}}, L_{a_k}) + rheight(L_{a_p}, L_{a_0} - K) - p`.
//! Each step contributes `rheight - 1`, so a dynamic program over
//! `(start, current)` finds the minimum exactly.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::picard::{is_numerically_exceptional, DivisorClass, PicardError};
use crate::vanishing::{CohomologyCertificate, CohomologyTriple, H0Engine, VanishingError};

/// Dimension of the surfaces handled here.
pub const SURFACE_DIM: i64 = 2;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HeightError {
    #[error("empty collection")]
    EmptyCollection,
    #[error("collection is not numerically exceptional: chi(L_{j} - L_{i}) = {chi}")]
    NotNumericallyExceptional { i: usize, j: usize, chi: i64 },
    #[error("table has {got} objects, expected {expected}")]
    SizeMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Picard(#[from] PicardError),
    #[error(transparent)]
    Vanishing(#[from] VanishingError),
}

/// An integer or `+inf`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Height {
    Finite(i64),
    Infinite,
}

impl Height {
    pub fn plus(self, k: i64) -> Self {
        match self {
            Height::Finite(v) => Height::Finite(v + k),
            Height::Infinite => Height::Infinite,
        }
    }

    pub fn add(self, other: Self) -> Self {
        match (self, other) {
            (Height::Finite(a), Height::Finite(b)) => Height::Finite(a + b),
            _ => Height::Infinite,
        }
    }

    pub fn finite(self) -> Option<i64> {
        match self {
            Height::Finite(v) => Some(v),
            Height::Infinite => None,
        }
    }
}

impl Ord for Height {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Height::Finite(a), Height::Finite(b)) => a.cmp(b),
            (Height::Finite(_), Height::Infinite) => Ordering::Less,
            (Height::Infinite, Height::Finite(_)) => Ordering::Greater,
            (Height::Infinite, Height::Infinite) => Ordering::Equal,
        }
    }
}

impl PartialOrd for Height {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Height {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Height::Finite(v) => write!(f, "{v}"),
            Height::Infinite => write!(f, "inf"),
        }
    }
}

/// Finite values as JSON integers, infinity as the string `"inf"`.
impl Serialize for Height {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Height::Finite(v) => s.serialize_i64(*v),
            Height::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Height {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw<'a> {
            Int(i64),
            #[serde(borrow)]
            Str(&'a str),
        }
        match Raw::deserialize(d)? {
            Raw::Int(v) => Ok(Height::Finite(v)),
            Raw::Str("inf") => Ok(Height::Infinite),
            Raw::Str(other) => Err(serde::de::Error::custom(alloc::format!("bad height {other:?}"))),
        }
    }
}

/// A relative height, either known or bounded below.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RheightEntry {
    pub value: Height,
    pub exact: bool,
}

impl RheightEntry {
    pub const ZERO: Self = Self { value: Height::Finite(0), exact: true };

    pub fn exact(value: Height) -> Self {
        Self { value, exact: true }
    }

    pub fn at_least(value: i64) -> Self {
        Self { value: Height::Finite(value), exact: false }
    }
}

/// Least `k` with `H^k != 0`, or infinity.
///
/// Values computed at special points bound the general ones from above, so
/// an inexact triple still gives a lower bound for the general rheight.
pub fn rheight_from_triple(t: &CohomologyTriple) -> RheightEntry {
    let value = [t.h0, t.h1, t.h2]
        .iter()
        .position(|&h| h != 0)
        .map_or(Height::Infinite, |k| Height::Finite(k as i64));
    RheightEntry { value, exact: t.is_exact() }
}

/// `rheight(O(from), O(to))`, read off the cohomology of `to - from`.
pub fn rheight(engine: &H0Engine<'_>, from: &DivisorClass, to: &DivisorClass) -> Result<RheightEntry, HeightError> {
    if from == to {
        return Ok(RheightEntry::ZERO);
    }
    let triple = engine.cohomology_triple(&to.checked_sub(from)?)?;
    Ok(rheight_from_triple(&triple))
}

/// Relative heights along a collection plus the anticanonical closers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RheightTable {
    n: usize,
    /// `rheight(L_i, L_j)` at `i * n + j` for `i < j`.
    forward: Vec<RheightEntry>,
    /// `rheight(L_c, L_s - K)` at `s * n + c` for `s <= c`.
    closers: Vec<RheightEntry>,
}

impl RheightTable {
    /// Fills the table from two callbacks. `forward(i, j)` is called for
    /// `i < j` and `closer(s, c)` for `s <= c`.
    pub fn build<E>(
        n: usize,
        mut forward: impl FnMut(usize, usize) -> Result<RheightEntry, E>,
        mut closer: impl FnMut(usize, usize) -> Result<RheightEntry, E>,
    ) -> Result<Self, E> {
        let mut fw = vec![RheightEntry::ZERO; n * n];
        let mut cl = vec![RheightEntry::exact(Height::Infinite); n * n];
        for i in 0..n {
            for j in i + 1..n {
                fw[i * n + j] = forward(i, j)?;
            }
            for c in i..n {
                cl[i * n + c] = closer(i, c)?;
            }
        }
        Ok(Self { n, forward: fw, closers: cl })
    }

    /// Computes every entry from cohomology triples.
    pub fn compute(engine: &H0Engine<'_>, collection: &[DivisorClass]) -> Result<Self, HeightError> {
        let n = collection.len();
        let neg_k = engine.lattice().canonical().neg()?;
        let twisted = collection.iter().map(|l| l.checked_add(&neg_k)).collect::<Result<Vec<_>, _>>()?;

        let mut jobs: Vec<(bool, usize, usize)> = Vec::new();
        for i in 0..n {
            jobs.extend((i + 1..n).map(|j| (true, i, j)));
            jobs.extend((i..n).map(|c| (false, i, c)));
        }
        let run = |&(fwd, a, b): &(bool, usize, usize)| -> Result<RheightEntry, HeightError> {
            if fwd {
                rheight(engine, &collection[a], &collection[b])
            } else {
                rheight(engine, &collection[b], &twisted[a])
            }
        };
        #[cfg(feature = "std")]
        let values: Vec<Result<RheightEntry, HeightError>> = {
            use rayon::prelude::*;
            jobs.par_iter().map(run).collect()
        };
        #[cfg(not(feature = "std"))]
        let values: Vec<Result<RheightEntry, HeightError>> = jobs.iter().map(run).collect();

        let mut fw = vec![RheightEntry::ZERO; n * n];
        let mut cl = vec![RheightEntry::exact(Height::Infinite); n * n];
        for (&(fwd, a, b), v) in jobs.iter().zip(values) {
            let slot = if fwd { &mut fw } else { &mut cl };
            slot[a * n + b] = v?;
        }
        Ok(Self { n, forward: fw, closers: cl })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn forward(&self, i: usize, j: usize) -> RheightEntry {
        if i == j {
            RheightEntry::ZERO
        } else {
            self.forward[i * self.n + j]
        }
    }

    pub fn closer(&self, start: usize, end: usize) -> RheightEntry {
        self.closers[start * self.n + end]
    }

    pub fn all_exact(&self) -> bool {
        (0..self.n).all(|i| {
            (i + 1..self.n).all(|j| self.forward(i, j).exact) && (i..self.n).all(|c| self.closer(i, c).exact)
        })
    }

    /// Value of a single chain, given as increasing indices.
    pub fn chain_value(&self, chain: &[usize]) -> Height {
        let (Some(&first), Some(&last)) = (chain.first(), chain.last()) else {
            return Height::Infinite;
        };
        let steps = chain
            .windows(2)
            .fold(Height::Finite(0), |acc, w| acc.add(self.forward(w[0], w[1]).value.plus(-1)));
        steps.add(self.closer(first, last).value)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeightClaim {
    /// The minimum is attained on a chain of length 0, so height equals
    /// pseudoheight.
    EqualsPseudoheight,
    LowerBoundOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fullness {
    NotFull,
    Undetermined,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeightReport {
    pub table: RheightTable,
    pub pseudoheight_ac: Height,
    pub pseudoheight: Height,
    /// False when table entries were only bounded below; the values above
    /// are then lower bounds.
    pub exact: bool,
    pub minimizing_chain: Vec<usize>,
    pub height_claim: HeightClaim,
    pub fullness: Fullness,
}

/// Exact chain minimum by dynamic programming over `(start, current)`.
pub fn minimize_chains(table: &RheightTable) -> Result<(Height, Vec<usize>), HeightError> {
    let n = table.len();
    if n == 0 {
        return Err(HeightError::EmptyCollection);
    }
    let mut best = Height::Infinite;
    let mut best_chain = vec![0];
    let mut cost = vec![Height::Infinite; n];
    let mut prev = vec![usize::MAX; n];
    for s in 0..n {
        cost.iter_mut().for_each(|c| *c = Height::Infinite);
        cost[s] = Height::Finite(0);
        for j in s + 1..n {
            for i in s..j {
                if cost[i] == Height::Infinite {
                    continue;
                }
                let cand = cost[i].add(table.forward(i, j).value.plus(-1));
                if cand < cost[j] {
                    cost[j] = cand;
                    prev[j] = i;
                }
            }
        }
        for c in s..n {
            let total = cost[c].add(table.closer(s, c).value);
            if total < best {
                best = total;
                let mut chain = vec![c];
                let mut at = c;
                while at != s {
                    at = prev[at];
                    chain.push(at);
                }
                chain.reverse();
                best_chain = chain;
            }
        }
    }
    Ok((best, best_chain))
}

/// Pseudoheight report from a filled table.
pub fn report_from_table(table: RheightTable) -> Result<HeightReport, HeightError> {
    let (ac, mut chain) = minimize_chains(&table)?;
    let exact = table.all_exact();
    let length_zero = (0..table.len()).find(|&s| table.closer(s, s).value == ac);
    if let Some(s) = length_zero {
        chain = vec![s];
    }
    let height_claim = if exact && length_zero.is_some() && ac != Height::Infinite {
        HeightClaim::EqualsPseudoheight
    } else {
        HeightClaim::LowerBoundOnly
    };
    let fullness = if ac > Height::Finite(-SURFACE_DIM) { Fullness::NotFull } else { Fullness::Undetermined };
    Ok(HeightReport {
        pseudoheight: ac.plus(SURFACE_DIM),
        pseudoheight_ac: ac,
        exact,
        minimizing_chain: chain,
        height_claim,
        fullness,
        table,
    })
}

fn check_exceptional(engine: &H0Engine<'_>, collection: &[DivisorClass]) -> Result<(), HeightError> {
    if collection.is_empty() {
        return Err(HeightError::EmptyCollection);
    }
    let verdict = is_numerically_exceptional(engine.lattice(), collection)?;
    if let Some(&(i, j, chi)) = verdict.failures.first() {
        return Err(HeightError::NotNumericallyExceptional { i, j, chi });
    }
    Ok(())
}

/// Anticanonical pseudoheight with every rheight computed in full.
pub fn pseudoheight_ac(engine: &H0Engine<'_>, collection: &[DivisorClass]) -> Result<HeightReport, HeightError> {
    check_exceptional(engine, collection)?;
    report_from_table(RheightTable::compute(engine, collection)?)
}

/// `h^0(L_j - L_i)` for all `i < j`, with the verdict that all vanish.
pub fn all_homs_vanish(
    engine: &H0Engine<'_>,
    collection: &[DivisorClass],
) -> Result<(bool, Vec<CohomologyCertificate>), HeightError> {
    let mut pairs = Vec::new();
    for i in 0..collection.len() {
        for j in i + 1..collection.len() {
            pairs.push((i, j));
        }
    }
    let run = |&(i, j): &(usize, usize)| -> Result<CohomologyCertificate, HeightError> {
        Ok(engine.h0(&collection[j].checked_sub(&collection[i])?)?)
    };
    #[cfg(feature = "std")]
    let certs: Result<Vec<_>, _> = {
        use rayon::prelude::*;
        pairs.par_iter().map(run).collect()
    };
    #[cfg(not(feature = "std"))]
    let certs: Result<Vec<_>, _> = pairs.iter().map(run).collect();
    let certs = certs?;
    Ok((certs.iter().all(|c| c.h0 == 0), certs))
}

/// Lower-bound report when only `Hom(L_i, L_j) = 0` for `i < j` is known:
/// every forward rheight is at least 1 and every closer at least 0.
pub fn pseudoheight_from_homs(n: usize, homs_vanish: bool) -> Result<HeightReport, HeightError> {
    let edge = if homs_vanish { RheightEntry::at_least(1) } else { RheightEntry::at_least(0) };
    let table = RheightTable::build::<HeightError>(n, |_, _| Ok(edge), |_, _| Ok(RheightEntry::at_least(0)))?;
    report_from_table(table)
}
