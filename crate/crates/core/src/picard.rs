//! Picard lattices of blowups of `P^2` and of Hirzebruch surfaces `F_n`.
//!
//! Bases are fixed: `(H, E_1, .., E_r)` for blowups of the plane and
//! `(C, F, E_1, .., E_r)` for blowups of `F_n`, where `C` is the negative
//! section and `F` the fiber. All arithmetic is checked `i64`.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PicardError {
    #[error("a blowup needs at least one point")]
    NoPoints,
    #[error("integer overflow in divisor arithmetic")]
    Overflow,
    #[error("divisor lives on {found}, expected {expected}")]
    SurfaceMismatch { expected: SurfaceKind, found: SurfaceKind },
    #[error("expected {expected} coefficients, got {got}")]
    WrongLength { expected: usize, got: usize },
    #[error("exceptional index {0} out of range")]
    BadIndex(usize),
    #[error("class is not available on this surface")]
    WrongBasis,
    #[error("D.(D-K) = {0} is odd")]
    OddIntersection(i64),
    #[error("reflection is not integral: {0}")]
    NonIntegralReflection(String),
    #[error("Gram matrix of the reflection plane is singular")]
    SingularPlane,
    #[error("K^2 = {0}; the canonical reflection needs |K^2| in {{1, 2}}")]
    BadCanonicalSquare(i64),
    #[error("involution check failed: {0}")]
    NotAnIsometricInvolution(String),
    #[error("cannot parse surface descriptor {0:?}")]
    BadDescriptor(String),
    #[error("empty collection")]
    EmptyCollection,
}

/// Which rational surface a lattice models.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SurfaceKind {
    BlowupP2 { points: u32 },
    BlowupHirzebruch { degree: u32, points: u32 },
}

impl SurfaceKind {
    pub fn n_points(self) -> usize {
        match self {
            SurfaceKind::BlowupP2 { points } | SurfaceKind::BlowupHirzebruch { points, .. } => points as usize,
        }
    }

    /// Number of non-exceptional basis vectors (1 for the plane, 2 for `F_n`).
    pub fn base_rank(self) -> usize {
        match self {
            SurfaceKind::BlowupP2 { .. } => 1,
            SurfaceKind::BlowupHirzebruch { .. } => 2,
        }
    }

    pub fn rank(self) -> usize {
        self.base_rank() + self.n_points()
    }

    pub fn is_plane(self) -> bool {
        matches!(self, SurfaceKind::BlowupP2 { .. })
    }

    pub fn hirzebruch_degree(self) -> Option<u32> {
        match self {
            SurfaceKind::BlowupHirzebruch { degree, .. } => Some(degree),
            SurfaceKind::BlowupP2 { .. } => None,
        }
    }

    pub fn basis_names(self) -> Vec<String> {
        let mut names: Vec<String> = match self {
            SurfaceKind::BlowupP2 { .. } => vec!["H".into()],
            SurfaceKind::BlowupHirzebruch { .. } => vec!["C".into(), "F".into()],
        };
        names.extend((1..=self.n_points()).map(|i| format!("E{i}")));
        names
    }
}

/// `p2:11` or `f2:9` (`f<degree>:<points>`).
impl fmt::Display for SurfaceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SurfaceKind::BlowupP2 { points } => write!(f, "p2:{points}"),
            SurfaceKind::BlowupHirzebruch { degree, points } => write!(f, "f{degree}:{points}"),
        }
    }
}

impl FromStr for SurfaceKind {
    type Err = PicardError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || PicardError::BadDescriptor(s.into());
        let (head, tail) = s.split_once(':').ok_or_else(bad)?;
        let points: u32 = tail.trim().parse().map_err(|_| bad())?;
        if points == 0 {
            return Err(PicardError::NoPoints);
        }
        let head = head.trim().to_ascii_lowercase();
        if head == "p2" {
            return Ok(SurfaceKind::BlowupP2 { points });
        }
        let degree = head.strip_prefix('f').ok_or_else(bad)?.parse().map_err(|_| bad())?;
        Ok(SurfaceKind::BlowupHirzebruch { degree, points })
    }
}

impl Serialize for SurfaceKind {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format!("{self}"))
    }
}

impl<'de> Deserialize<'de> for SurfaceKind {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// An integer class in the Picard group of a specific surface.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DivisorClass {
    surface: SurfaceKind,
    coeffs: Vec<i64>,
}

impl DivisorClass {
    pub fn surface(&self) -> SurfaceKind {
        self.surface
    }

    pub fn coeffs(&self) -> &[i64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    /// Coefficients on the non-exceptional part of the basis.
    pub fn base(&self) -> &[i64] {
        &self.coeffs[..self.surface.base_rank()]
    }

    /// Coefficient of `E_i` (1-based) in the basis expansion.
    pub fn exceptional(&self, i: usize) -> i64 {
        self.coeffs[self.surface.base_rank() + i - 1]
    }

    /// Multiplicities `m_i` in the convention `D = base - sum m_i E_i`.
    pub fn multiplicities(&self) -> impl Iterator<Item = i64> + '_ {
        self.coeffs[self.surface.base_rank()..].iter().map(|&c| -c)
    }

    fn same_surface(&self, other: &Self) -> Result<(), PicardError> {
        if self.surface == other.surface {
            Ok(())
        } else {
            Err(PicardError::SurfaceMismatch { expected: self.surface, found: other.surface })
        }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self, PicardError> {
        self.combine(1, other)
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self, PicardError> {
        self.combine(-1, other)
    }

    /// `self + factor * other`.
    pub fn combine(&self, factor: i64, other: &Self) -> Result<Self, PicardError> {
        self.same_surface(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(&a, &b)| b.checked_mul(factor).and_then(|t| a.checked_add(t)).ok_or(PicardError::Overflow))
            .collect::<Result<_, _>>()?;
        Ok(Self { surface: self.surface, coeffs })
    }

    pub fn scaled(&self, factor: i64) -> Result<Self, PicardError> {
        let coeffs = self
            .coeffs
            .iter()
            .map(|&a| a.checked_mul(factor).ok_or(PicardError::Overflow))
            .collect::<Result<_, _>>()?;
        Ok(Self { surface: self.surface, coeffs })
    }

    pub fn neg(&self) -> Result<Self, PicardError> {
        self.scaled(-1)
    }
}

/// Writes the class in its basis, e.g. `7H-2E1-2E2` or `8C+17F-4E1`.
impl fmt::Display for DivisorClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = self.surface.basis_names();
        let mut first = true;
        for (c, name) in self.coeffs.iter().zip(&names) {
            if *c == 0 {
                continue;
            }
            let sign = if *c < 0 { "-" } else if first { "" } else { "+" };
            let mag = c.unsigned_abs();
            if mag == 1 {
                write!(f, "{sign}{name}")?;
            } else {
                write!(f, "{sign}{mag}{name}")?;
            }
            first = false;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// A surface model: Gram matrix, canonical class and nef witnesses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SurfaceLattice {
    kind: SurfaceKind,
    gram: Vec<i64>,
    canonical: DivisorClass,
    nef_witnesses: Vec<DivisorClass>,
}

impl SurfaceLattice {
    pub fn new(kind: SurfaceKind) -> Result<Self, PicardError> {
        let r = kind.n_points();
        if r == 0 {
            return Err(PicardError::NoPoints);
        }
        let rank = kind.rank();
        let b = kind.base_rank();
        let mut gram = vec![0i64; rank * rank];
        let mut canonical = vec![1i64; rank];
        match kind {
            SurfaceKind::BlowupP2 { .. } => {
                gram[0] = 1;
                canonical[0] = -3;
            }
            SurfaceKind::BlowupHirzebruch { degree, .. } => {
                let n = degree as i64;
                gram[0] = -n;
                gram[1] = 1;
                gram[rank] = 1;
                canonical[0] = -2;
                canonical[1] = -(n + 2);
            }
        }
        for i in b..rank {
            gram[i * rank + i] = -1;
        }
        let mut lattice = Self {
            kind,
            gram,
            canonical: DivisorClass { surface: kind, coeffs: canonical },
            nef_witnesses: Vec::new(),
        };
        lattice.nef_witnesses = match kind {
            SurfaceKind::BlowupP2 { .. } => vec![lattice.h()?],
            SurfaceKind::BlowupHirzebruch { degree, .. } => {
                let (c, f) = (lattice.c()?, lattice.f()?);
                let n = degree as i64;
                vec![f.clone(), c.combine(n, &f)?, c.combine(n + 1, &f)?]
            }
        };
        Ok(lattice)
    }

    pub fn kind(&self) -> SurfaceKind {
        self.kind
    }

    pub fn rank(&self) -> usize {
        self.kind.rank()
    }

    pub fn n_points(&self) -> usize {
        self.kind.n_points()
    }

    pub fn gram_entry(&self, i: usize, j: usize) -> i64 {
        self.gram[i * self.rank() + j]
    }

    pub fn canonical(&self) -> &DivisorClass {
        &self.canonical
    }

    pub fn nef_witnesses(&self) -> &[DivisorClass] {
        &self.nef_witnesses
    }

    pub fn class(&self, coeffs: Vec<i64>) -> Result<DivisorClass, PicardError> {
        if coeffs.len() != self.rank() {
            return Err(PicardError::WrongLength { expected: self.rank(), got: coeffs.len() });
        }
        Ok(DivisorClass { surface: self.kind, coeffs })
    }

    pub fn zero(&self) -> DivisorClass {
        DivisorClass { surface: self.kind, coeffs: vec![0; self.rank()] }
    }

    pub fn basis_vector(&self, idx: usize) -> DivisorClass {
        let mut d = self.zero();
        d.coeffs[idx] = 1;
        d
    }

    pub fn h(&self) -> Result<DivisorClass, PicardError> {
        if !self.kind.is_plane() {
            return Err(PicardError::WrongBasis);
        }
        Ok(self.basis_vector(0))
    }

    pub fn c(&self) -> Result<DivisorClass, PicardError> {
        if self.kind.is_plane() {
            return Err(PicardError::WrongBasis);
        }
        Ok(self.basis_vector(0))
    }

    pub fn f(&self) -> Result<DivisorClass, PicardError> {
        if self.kind.is_plane() {
            return Err(PicardError::WrongBasis);
        }
        Ok(self.basis_vector(1))
    }

    /// Exceptional curve `E_i`, 1-based.
    pub fn e(&self, i: usize) -> Result<DivisorClass, PicardError> {
        if i == 0 || i > self.n_points() {
            return Err(PicardError::BadIndex(i));
        }
        Ok(self.basis_vector(self.kind.base_rank() + i - 1))
    }

    /// `E_1 + ... + E_r`.
    pub fn sum_e(&self) -> DivisorClass {
        let mut d = self.zero();
        for c in &mut d.coeffs[self.kind.base_rank()..] {
            *c = 1;
        }
        d
    }

    /// Sum of `factor_k * class_k`.
    pub fn linear(&self, terms: &[(i64, &DivisorClass)]) -> Result<DivisorClass, PicardError> {
        terms.iter().try_fold(self.zero(), |acc, (k, d)| acc.combine(*k, d))
    }

    fn owns(&self, d: &DivisorClass) -> Result<(), PicardError> {
        if d.surface == self.kind {
            Ok(())
        } else {
            Err(PicardError::SurfaceMismatch { expected: self.kind, found: d.surface })
        }
    }

    /// Intersection pairing `D1^T G D2`.
    pub fn pair(&self, a: &DivisorClass, b: &DivisorClass) -> Result<i64, PicardError> {
        self.owns(a)?;
        self.owns(b)?;
        let n = self.rank();
        let mut acc: i64 = 0;
        for i in 0..n {
            if a.coeffs[i] == 0 {
                continue;
            }
            for j in 0..n {
                let g = self.gram[i * n + j];
                if g == 0 || b.coeffs[j] == 0 {
                    continue;
                }
                let term = a.coeffs[i]
                    .checked_mul(g)
                    .and_then(|t| t.checked_mul(b.coeffs[j]))
                    .ok_or(PicardError::Overflow)?;
                acc = acc.checked_add(term).ok_or(PicardError::Overflow)?;
            }
        }
        Ok(acc)
    }

    pub fn self_intersection(&self, d: &DivisorClass) -> Result<i64, PicardError> {
        self.pair(d, d)
    }

    /// Riemann-Roch on a rational surface: `1 + D.(D-K)/2`.
    pub fn chi(&self, d: &DivisorClass) -> Result<i64, PicardError> {
        let dk = d.checked_sub(&self.canonical)?;
        let prod = self.pair(d, &dk)?;
        if prod % 2 != 0 {
            return Err(PicardError::OddIntersection(prod));
        }
        Ok(1 + prod / 2)
    }

    /// `chi(O(from), O(to)) = chi(to - from)`.
    pub fn euler_pairing(&self, from: &DivisorClass, to: &DivisorClass) -> Result<i64, PicardError> {
        self.chi(&to.checked_sub(from)?)
    }
}

/// Result of the Euler-pairing test on an ordered collection of line bundles.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NumericalExceptionality {
    pub exceptional: bool,
    /// `(i, j, chi(L_j - L_i))` for every backward pair `i > j` with nonzero
    /// Euler characteristic.
    pub failures: Vec<(usize, usize, i64)>,
}

pub fn is_numerically_exceptional(
    lattice: &SurfaceLattice,
    collection: &[DivisorClass],
) -> Result<NumericalExceptionality, PicardError> {
    if collection.is_empty() {
        return Err(PicardError::EmptyCollection);
    }
    let mut failures = Vec::new();
    for (i, li) in collection.iter().enumerate() {
        lattice.owns(li)?;
        for (j, lj) in collection.iter().enumerate().take(i) {
            let chi = lattice.euler_pairing(li, lj)?;
            if chi != 0 {
                failures.push((i, j, chi));
            }
        }
    }
    Ok(NumericalExceptionality { exceptional: failures.is_empty(), failures })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum InvolutionKind {
    /// `D -> -D + 2 (D.K / K^2) K`.
    CanonicalReflection,
    /// `D -> D - 2 P(D)` with `P` the orthogonal projection onto `<v, w>`.
    PlaneReflection { v: DivisorClass, w: DivisorClass },
}

/// An integral isometric involution of a Picard lattice fixing `K`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Involution {
    kind: InvolutionKind,
    surface: SurfaceKind,
    // (v.v, v.w, w.w, det) for the plane reflection, K^2 for the canonical one
    plane_gram: [i64; 4],
    k_squared: i64,
}

impl Involution {
    pub fn canonical(lattice: &SurfaceLattice) -> Result<Self, PicardError> {
        let k2 = lattice.self_intersection(lattice.canonical())?;
        if !(k2.abs() == 1 || k2.abs() == 2) {
            return Err(PicardError::BadCanonicalSquare(k2));
        }
        let inv = Self {
            kind: InvolutionKind::CanonicalReflection,
            surface: lattice.kind(),
            plane_gram: [0; 4],
            k_squared: k2,
        };
        inv.validate(lattice)?;
        Ok(inv)
    }

    pub fn plane(lattice: &SurfaceLattice, v: DivisorClass, w: DivisorClass) -> Result<Self, PicardError> {
        let vv = lattice.pair(&v, &v)?;
        let vw = lattice.pair(&v, &w)?;
        let ww = lattice.pair(&w, &w)?;
        let det = vv
            .checked_mul(ww)
            .and_then(|a| vw.checked_mul(vw).and_then(|b| a.checked_sub(b)))
            .ok_or(PicardError::Overflow)?;
        if det == 0 {
            return Err(PicardError::SingularPlane);
        }
        let inv = Self {
            kind: InvolutionKind::PlaneReflection { v, w },
            surface: lattice.kind(),
            plane_gram: [vv, vw, ww, det],
            k_squared: lattice.self_intersection(lattice.canonical())?,
        };
        inv.validate(lattice)?;
        Ok(inv)
    }

    pub fn kind(&self) -> &InvolutionKind {
        &self.kind
    }

    pub fn surface(&self) -> SurfaceKind {
        self.surface
    }

    pub fn apply(&self, lattice: &SurfaceLattice, d: &DivisorClass) -> Result<DivisorClass, PicardError> {
        lattice.owns(d)?;
        if lattice.kind() != self.surface {
            return Err(PicardError::SurfaceMismatch { expected: self.surface, found: lattice.kind() });
        }
        match &self.kind {
            InvolutionKind::CanonicalReflection => {
                let k = lattice.canonical();
                let dk = lattice.pair(d, k)?;
                let num = dk.checked_mul(2).ok_or(PicardError::Overflow)?;
                if num % self.k_squared != 0 {
                    return Err(PicardError::NonIntegralReflection(format!(
                        "2(D.K) = {num} is not divisible by K^2 = {}",
                        self.k_squared
                    )));
                }
                d.neg()?.combine(num / self.k_squared, k)
            }
            InvolutionKind::PlaneReflection { v, w } => {
                let [vv, vw, ww, det] = self.plane_gram;
                let dv = lattice.pair(d, v)?;
                let dw = lattice.pair(d, w)?;
                // P(D) = a v + b w with [[vv, vw], [vw, ww]] (a, b)^T = (D.v, D.w)^T
                let mul = |x: i64, y: i64| x.checked_mul(y).ok_or(PicardError::Overflow);
                let sub = |x: i64, y: i64| x.checked_sub(y).ok_or(PicardError::Overflow);
                let a_num = sub(mul(ww, dv)?, mul(vw, dw)?)?;
                let b_num = sub(mul(vv, dw)?, mul(vw, dv)?)?;
                let (a2, b2) = (mul(2, a_num)?, mul(2, b_num)?);
                if a2 % det != 0 || b2 % det != 0 {
                    return Err(PicardError::NonIntegralReflection(format!(
                        "2P(D) has coefficients {a2}/{det}, {b2}/{det}"
                    )));
                }
                d.combine(-(a2 / det), v)?.combine(-(b2 / det), w)
            }
        }
    }

    /// Integrality, involutivity, isometry and `K`-fixing on the basis.
    fn validate(&self, lattice: &SurfaceLattice) -> Result<(), PicardError> {
        let rank = lattice.rank();
        let images = (0..rank)
            .map(|i| self.apply(lattice, &lattice.basis_vector(i)))
            .collect::<Result<Vec<_>, _>>()?;
        for (i, img) in images.iter().enumerate() {
            if self.apply(lattice, img)? != lattice.basis_vector(i) {
                return Err(PicardError::NotAnIsometricInvolution(format!("not involutive on basis vector {i}")));
            }
            for (j, other) in images.iter().enumerate() {
                if lattice.pair(img, other)? != lattice.gram_entry(i, j) {
                    return Err(PicardError::NotAnIsometricInvolution(format!("pairing ({i}, {j}) not preserved")));
                }
            }
        }
        if &self.apply(lattice, lattice.canonical())? != lattice.canonical() {
            return Err(PicardError::NotAnIsometricInvolution("K is not fixed".into()));
        }
        Ok(())
    }
}
