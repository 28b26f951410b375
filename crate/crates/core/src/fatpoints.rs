//! Interpolation oracle for linear systems with fat points.
//!
//! Sections of a line bundle on `P^2` or `F_n` are written as monomials in an
//! affine chart `(s, t)`. A point of multiplicity `m` contributes one row per
//! local monomial `(s - s0)^i (t - t0)^j` with `i + j < m`, holding the
//! coefficient of that monomial in the Taylor expansion of each basis element.
//! The number of independent sections is the kernel dimension of the result.
//!
//! Charts:
//! * `P^2`: `x0 = 1`, `s = x1/x0`, `t = x2/x0`.
//! * `F_n` with Cox coordinates `(u0, u1, v, w)` of classes `F, F, C, C+nF`:
//!   `s = u0/u1`, `t = w/(v u1^n)`. The chart misses `C = {v = 0}` and the
//!   fiber `{u1 = 0}`. Sections of `aC + bF` are spanned by `s^e t^k` with
//!   `0 <= k <= a` and `0 <= e <= b - nk`.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand_chacha::rand_core::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ffrank::{self, pow_mod, DenseMatrixFp, RankError, RankOptions};
use crate::picard::{DivisorClass, PicardError, SurfaceKind, SurfaceLattice};
use crate::vanishing::{nef_degree_test, Genericity, NefVerdict};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FatPointError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("bundle has a negative coefficient: {0}")]
    NegativeBundle(String),
    #[error("prime {prime} does not exceed the largest monomial degree {degree}")]
    PrimeTooSmall { prime: u32, degree: u64 },
    #[error("point {index} lies outside the affine chart: {reason}")]
    PointOnForbiddenLocus { index: usize, reason: &'static str },
    #[error("points {0} and {1} coincide")]
    DuplicatePoint(usize, usize),
    #[error("point {index} has {got} coordinates, expected {expected}")]
    BadArity { index: usize, expected: usize, got: usize },
    #[error("point {0} does not satisfy the scroll equations")]
    NotOnScroll(usize),
    #[error("could not sample {0} distinct points")]
    SamplingExhausted(usize),
    #[error("need {expected} multiplicities, got {got}")]
    WrongPointCount { expected: usize, got: usize },
    #[error("point set lives on {found}, expected {expected}")]
    SurfaceMismatch { expected: SurfaceKind, found: SurfaceKind },
    #[error("operation needs a Hirzebruch surface of degree {0}")]
    WrongSurface(u32),
    #[error(transparent)]
    Picard(#[from] PicardError),
    #[error(transparent)]
    Rank(#[from] RankError),
}

/// Where a point set came from.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Provenance {
    Sampled { seed: u64 },
    Fixture { name: String },
}

/// Points in the standard affine chart of a surface, over `F_p`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointSet {
    surface: SurfaceKind,
    prime: u32,
    points: Vec<[u32; 2]>,
    provenance: Provenance,
}

/// On-disk form: homogeneous coordinates, `[x0, x1, x2]` on the plane and
/// Cox coordinates `[u0, u1, v, w]` on `F_n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointSetRecord {
    pub surface: SurfaceKind,
    pub prime: u32,
    pub points: Vec<Vec<u64>>,
    pub provenance: Provenance,
}

fn inv_mod(x: u64, p: u32) -> u64 {
    pow_mod(x, p as u64 - 2, p as u64)
}

impl PointSet {
    /// Builds a point set from chart coordinates `(s, t)`.
    pub fn from_chart(
        surface: SurfaceKind,
        prime: u32,
        points: Vec<[u32; 2]>,
        provenance: Provenance,
    ) -> Result<Self, FatPointError> {
        if !ffrank::is_prime_u32(prime) {
            return Err(FatPointError::NotPrime(prime as u64));
        }
        if let Some(c) = points.iter().flatten().find(|&&c| c >= prime) {
            return Err(FatPointError::Rank(RankError::UnreducedEntry {
                row: 0,
                col: 0,
                value: *c,
                prime,
            }));
        }
        let mut sorted: Vec<(usize, [u32; 2])> = points.iter().copied().enumerate().collect();
        sorted.sort_by_key(|&(_, pt)| pt);
        for pair in sorted.windows(2) {
            if pair[0].1 == pair[1].1 {
                let (a, b) = (pair[0].0.min(pair[1].0), pair[0].0.max(pair[1].0));
                return Err(FatPointError::DuplicatePoint(a, b));
            }
        }
        Ok(Self { surface, prime, points, provenance })
    }

    pub fn from_homogeneous(
        surface: SurfaceKind,
        prime: u32,
        coords: &[Vec<u64>],
        provenance: Provenance,
    ) -> Result<Self, FatPointError> {
        if !ffrank::is_prime_u32(prime) {
            return Err(FatPointError::NotPrime(prime as u64));
        }
        let p = prime as u64;
        let mut chart = Vec::with_capacity(coords.len());
        for (index, c) in coords.iter().enumerate() {
            let expected = if surface.is_plane() { 3 } else { 4 };
            if c.len() != expected {
                return Err(FatPointError::BadArity { index, expected, got: c.len() });
            }
            let c: Vec<u64> = c.iter().map(|x| x % p).collect();
            let pt = match surface.hirzebruch_degree() {
                None => {
                    if c[0] == 0 {
                        return Err(FatPointError::PointOnForbiddenLocus { index, reason: "x0 = 0" });
                    }
                    let inv = inv_mod(c[0], prime);
                    [c[1] * inv % p, c[2] * inv % p]
                }
                Some(n) => {
                    if c[2] == 0 {
                        return Err(FatPointError::PointOnForbiddenLocus { index, reason: "point lies on C" });
                    }
                    if c[1] == 0 {
                        return Err(FatPointError::PointOnForbiddenLocus { index, reason: "u1 = 0" });
                    }
                    let s = c[0] * inv_mod(c[1], prime) % p;
                    let denom = c[2] * pow_mod(c[1], n as u64, p) % p;
                    [s, c[3] * inv_mod(denom, prime) % p]
                }
            };
            chart.push([pt[0] as u32, pt[1] as u32]);
        }
        Self::from_chart(surface, prime, chart, provenance)
    }

    pub fn from_record(record: &PointSetRecord) -> Result<Self, FatPointError> {
        Self::from_homogeneous(record.surface, record.prime, &record.points, record.provenance.clone())
    }

    /// Normalized homogeneous coordinates: `[1, s, t]` or `[s, 1, 1, t]`.
    pub fn to_record(&self) -> PointSetRecord {
        let points = self
            .points
            .iter()
            .map(|&[s, t]| {
                if self.surface.is_plane() {
                    vec![1, s as u64, t as u64]
                } else {
                    vec![s as u64, 1, 1, t as u64]
                }
            })
            .collect();
        PointSetRecord { surface: self.surface, prime: self.prime, points, provenance: self.provenance.clone() }
    }

    pub fn surface(&self) -> SurfaceKind {
        self.surface
    }

    pub fn prime(&self) -> u32 {
        self.prime
    }

    pub fn points(&self) -> &[[u32; 2]] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    /// Short label used in certificates.
    pub fn id(&self) -> String {
        match &self.provenance {
            Provenance::Fixture { name } => name.clone(),
            Provenance::Sampled { seed } => format!("sampled-{}-p{}-s{}", self.surface, self.prime, seed),
        }
    }
}

/// Uniform points in the open torus of the chart, deterministic in `seed`.
pub fn sample_points(surface: SurfaceKind, count: usize, prime: u32, seed: u64) -> Result<PointSet, FatPointError> {
    if !ffrank::is_prime_u32(prime) {
        return Err(FatPointError::NotPrime(prime as u64));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = |rng: &mut ChaCha8Rng| 1 + ((rng.next_u64() as u128 * (prime as u128 - 1)) >> 64) as u32;
    let mut points: Vec<[u32; 2]> = Vec::with_capacity(count);
    let mut attempts = 0usize;
    while points.len() < count {
        attempts += 1;
        if attempts > 64 * count + 64 {
            return Err(FatPointError::SamplingExhausted(count));
        }
        let pt = [draw(&mut rng), draw(&mut rng)];
        if !points.contains(&pt) {
            points.push(pt);
        }
    }
    PointSet::from_chart(surface, prime, points, Provenance::Sampled { seed })
}

/// The six quadrics cutting out the quartic scroll `F_2` in `P^5`, evaluated
/// mod `p`.
pub fn scroll_quadrics(z: &[u64; 6], p: u32) -> [u64; 6] {
    let p = p as u64;
    let z = z.map(|x| x % p);
    let q = |a: usize, b: usize, c: usize, d: usize| (z[a] * z[b] % p + p - z[c] * z[d] % p) % p;
    [q(0, 4, 1, 3), q(0, 5, 2, 3), q(1, 5, 2, 4), q(0, 1, 3, 3), q(1, 1, 3, 4), q(1, 2, 3, 5)]
}

/// Cox coordinates of a point of the scroll `F_2 ⊂ P^5`.
///
/// The scroll is parametrized by
/// `z = (v u0^3, v u0 u1^2, u0 w, v u0^2 u1, v u1^3, u1 w)`, so on `z5 != 0` the
/// point is `[z2/z5 : 1 : z4/z5 : 1]`.
pub fn segre_to_cox(z: &[u64; 6], p: u32, index: usize) -> Result<[u64; 4], FatPointError> {
    if scroll_quadrics(z, p).iter().any(|&q| q != 0) {
        return Err(FatPointError::NotOnScroll(index));
    }
    let pp = p as u64;
    let z5 = z[5] % pp;
    if z5 == 0 {
        return Err(FatPointError::PointOnForbiddenLocus { index, reason: "z5 = 0" });
    }
    let inv = inv_mod(z5, p);
    Ok([z[2] % pp * inv % pp, 1, z[4] % pp * inv % pp, 1])
}

/// `[x0 : x1 : x2]` cut out by `x0 - a x1 = x0 - b x2 = 0`.
pub fn plane_point_from_linear_forms(a: u64, b: u64, p: u32) -> Result<[u64; 3], FatPointError> {
    let pp = p as u64;
    let (a, b) = (a % pp, b % pp);
    if a == 0 || b == 0 {
        return Err(FatPointError::PointOnForbiddenLocus { index: 0, reason: "x0 = 0" });
    }
    Ok([1, inv_mod(a, p), inv_mod(b, p)])
}

/// The non-exceptional part of a class, as the bundle whose sections are
/// counted downstairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BundleData {
    /// `O(d)` on the plane.
    Plane { degree: u32 },
    /// `O(aC + bF)` on `F_n`.
    Hirzebruch { n: u32, a: u32, b: u32 },
}

impl BundleData {
    /// Splits a class `base - sum m_i E_i` into bundle data and multiplicities.
    pub fn split(d: &DivisorClass) -> Result<(Self, Vec<u32>), FatPointError> {
        let negative = || FatPointError::NegativeBundle(format!("{d}"));
        let to_u32 = |x: i64| u32::try_from(x).map_err(|_| negative());
        let bundle = match d.surface().hirzebruch_degree() {
            None => BundleData::Plane { degree: to_u32(d.base()[0])? },
            Some(n) => BundleData::Hirzebruch { n, a: to_u32(d.base()[0])?, b: to_u32(d.base()[1])? },
        };
        let mults = d.multiplicities().map(to_u32).collect::<Result<_, _>>()?;
        Ok((bundle, mults))
    }

    /// Closed-form number of sections.
    pub fn section_count(self) -> u64 {
        match self {
            BundleData::Plane { degree } => {
                let d = degree as u64;
                (d + 1) * (d + 2) / 2
            }
            BundleData::Hirzebruch { n, a, b } => (0..=a as u64)
                .map(|k| (b as u64 + 1).saturating_sub(n as u64 * k))
                .sum(),
        }
    }

    /// Largest total degree of a chart monomial.
    pub fn max_degree(self) -> u64 {
        match self {
            BundleData::Plane { degree } => degree as u64,
            BundleData::Hirzebruch { n, a, b } => (0..=a as u64)
                .filter(|&k| n as u64 * k <= b as u64)
                .map(|k| b as u64 - n as u64 * k + k)
                .max()
                .unwrap_or(0),
        }
    }
}

/// Exponent pairs `(e_s, e_t)` of the chart monomials spanning the sections.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonomialBasis {
    pub exponents: Vec<(u32, u32)>,
    pub max_degree: u64,
}

impl MonomialBasis {
    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }
}

/// Degree-graded monomial basis of the bundle's sections.
pub fn monomial_basis(bundle: BundleData) -> MonomialBasis {
    let mut exponents = Vec::with_capacity(bundle.section_count() as usize);
    match bundle {
        BundleData::Plane { degree } => {
            for total in 0..=degree {
                for b in 0..=total {
                    exponents.push((total - b, b));
                }
            }
        }
        BundleData::Hirzebruch { n, a, b } => {
            for k in 0..=a {
                let Some(top) = b.checked_sub(n * k) else { break };
                for e in 0..=top {
                    exponents.push((e, k));
                }
            }
        }
    }
    MonomialBasis { exponents, max_degree: bundle.max_degree() }
}

/// Fat-point condition matrix with row and column labels.
#[derive(Debug, Clone)]
pub struct ConditionMatrix {
    pub matrix: DenseMatrixFp,
    /// `(point index, i, j)` for the local monomial `(s - s0)^i (t - t0)^j`.
    pub rows: Vec<(u32, u32, u32)>,
    pub columns: MonomialBasis,
}

/// `C(a, i)` mod p for `a <= top`, `i < width`.
struct BinomialTable {
    width: usize,
    data: Vec<u64>,
}

impl BinomialTable {
    fn new(top: usize, width: usize, p: u64) -> Self {
        let mut data = vec![0u64; (top + 1) * width];
        for a in 0..=top {
            data[a * width] = 1 % p;
            for i in 1..width.min(a + 1) {
                let above = data[(a - 1) * width + i];
                let diag = data[(a - 1) * width + i - 1];
                data[a * width + i] = (above + diag) % p;
            }
        }
        Self { width, data }
    }

    fn get(&self, a: u32, i: u32) -> u64 {
        if i > a {
            0
        } else {
            self.data[a as usize * self.width + i as usize]
        }
    }
}

fn powers(x: u64, top: usize, p: u64) -> Vec<u64> {
    let mut out = Vec::with_capacity(top + 1);
    let mut acc = 1 % p;
    for _ in 0..=top {
        out.push(acc);
        acc = acc * x % p;
    }
    out
}

pub fn build_conditions(
    bundle: BundleData,
    points: &PointSet,
    multiplicities: &[u32],
) -> Result<ConditionMatrix, FatPointError> {
    match (bundle, points.surface().hirzebruch_degree()) {
        (BundleData::Plane { .. }, None) => {}
        (BundleData::Hirzebruch { n, .. }, Some(m)) if n == m => {}
        (BundleData::Hirzebruch { n, .. }, _) => return Err(FatPointError::WrongSurface(n)),
        (BundleData::Plane { .. }, Some(_)) => {
            return Err(FatPointError::SurfaceMismatch {
                expected: SurfaceKind::BlowupP2 { points: points.len() as u32 },
                found: points.surface(),
            })
        }
    }
    if multiplicities.len() != points.len() {
        return Err(FatPointError::WrongPointCount { expected: points.len(), got: multiplicities.len() });
    }
    let basis = monomial_basis(bundle);
    let p = points.prime() as u64;
    if basis.max_degree >= p {
        return Err(FatPointError::PrimeTooSmall { prime: points.prime(), degree: basis.max_degree });
    }

    let mut rows = Vec::new();
    for (idx, &m) in multiplicities.iter().enumerate() {
        for order in 0..m {
            for j in 0..=order {
                rows.push((idx as u32, order - j, j));
            }
        }
    }
    let top = basis.max_degree as usize;
    let width = multiplicities.iter().copied().max().unwrap_or(0) as usize;
    let binom = BinomialTable::new(top, width.max(1), p);
    let pows: Vec<(Vec<u64>, Vec<u64>)> = points
        .points()
        .iter()
        .map(|&[s, t]| (powers(s as u64, top, p), powers(t as u64, top, p)))
        .collect();

    let cols = basis.len();
    let mut data = vec![0u32; rows.len() * cols];
    let fill = |(row, &(pt, i, j)): (&mut [u32], &(u32, u32, u32))| {
        let (ps, pt_) = &pows[pt as usize];
        for (cell, &(es, et)) in row.iter_mut().zip(&basis.exponents) {
            if es < i || et < j {
                continue;
            }
            let a = binom.get(es, i) * ps[(es - i) as usize] % p;
            let b = binom.get(et, j) * pt_[(et - j) as usize] % p;
            *cell = (a * b % p) as u32;
        }
    };
    if cols > 0 {
        #[cfg(feature = "std")]
        {
            use rayon::prelude::*;
            data.par_chunks_mut(cols).zip(rows.par_iter()).for_each(fill);
        }
        #[cfg(not(feature = "std"))]
        data.chunks_mut(cols).zip(rows.iter()).for_each(fill);
    }
    let matrix = DenseMatrixFp::new(points.prime(), rows.len(), cols, data)?;
    Ok(ConditionMatrix { matrix, rows, columns: basis })
}

/// Number of sections of a reduced class through the fat points.
pub fn h0_interpolation(d: &DivisorClass, points: &PointSet, opts: &RankOptions) -> Result<u64, FatPointError> {
    if d.surface() != points.surface() {
        return Err(FatPointError::SurfaceMismatch { expected: points.surface(), found: d.surface() });
    }
    let (bundle, mults) = BundleData::split(d)?;
    let conditions = build_conditions(bundle, points, &mults)?;
    if conditions.matrix.rows() == 0 {
        return Ok(conditions.columns.len() as u64);
    }
    Ok(ffrank::kernel_dim_with(&conditions.matrix, opts)? as u64)
}

/// What a value computed at special points says about general points.
///
/// Semicontinuity only bounds the general value from above; it is pinned when
/// the computed value is zero, or equals `chi` while `h^2` vanishes.
pub fn certify_generic(lattice: &SurfaceLattice, d: &DivisorClass, computed_h0: u64) -> Result<Genericity, FatPointError> {
    if computed_h0 == 0 {
        return Ok(Genericity::VanishesGenerically);
    }
    let chi = lattice.chi(d)?;
    let dual = lattice.canonical().checked_sub(d)?;
    let h2_vanishes = matches!(nef_degree_test(lattice, &dual)?, NefVerdict::Vanishes { .. });
    if h2_vanishes && computed_h0 as i64 == chi.max(0) {
        Ok(Genericity::ExactGeneric)
    } else {
        Ok(Genericity::UpperBoundOnly)
    }
}
