//! Layered computation of `h^0` on blowups at general points.
//!
//! Layers, cheapest first: strip fixed components, read off classes with no
//! base part, test against nef classes, apply the SHGH formula in its proven
//! range, and finally interpolate at concrete points.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fatpoints::{self, BundleData, FatPointError, PointSet};
use crate::ffrank::RankOptions;
use crate::picard::{DivisorClass, PicardError, SurfaceLattice};

/// Largest multiplicity for which the SHGH formula is used.
pub const SHGH_MAX_MULTIPLICITY: i64 = 11;

const REDUCTION_CAP: usize = 1 << 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum VanishingError {
    #[error(transparent)]
    Picard(#[from] PicardError),
    #[error(transparent)]
    FatPoints(#[from] FatPointError),
    #[error("interpolation needed for {divisor} but no point set is configured")]
    OracleUnavailable { divisor: String },
    #[error("interpolation for {divisor} needs degree {degree}, above the cap {cap}")]
    DegreeCapExceeded { divisor: String, degree: u64, cap: u64 },
    #[error("h0 + h2 - chi < 0 for {divisor}: h0 = {h0}, h2 = {h2}, chi = {chi}")]
    InconsistentCohomology { divisor: String, h0: u64, h2: u64, chi: i64 },
    #[error("fixed-component reduction of {0} did not terminate")]
    InternalError(String),
    #[error("standard form is only defined on blowups of the plane")]
    NotPlane,
}

/// Which layer decided a value.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum Rule {
    NefDegree,
    FixedComponentThenRule,
    #[serde(rename = "standard_form_shgh")]
    StandardFormSHGH,
    ExceptionalOnly,
    Interpolation { prime: u32, pointset: String },
}

impl Rule {
    pub fn label(&self) -> &'static str {
        match self {
            Rule::NefDegree => "degree",
            Rule::FixedComponentThenRule => "fixed-component",
            Rule::StandardFormSHGH => "SHGH",
            Rule::ExceptionalOnly => "exceptional",
            Rule::Interpolation { .. } => "interpolation",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Genericity {
    ExactGeneric,
    UpperBoundOnly,
    VanishesGenerically,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CohomologyCertificate {
    pub divisor: DivisorClass,
    pub h0: u64,
    #[serde(flatten)]
    pub rule: Rule,
    pub genericity: Genericity,
    /// The class after fixed components were removed, when that changed it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reduced: Option<DivisorClass>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CohomologyTriple {
    pub divisor: DivisorClass,
    pub chi: i64,
    pub h0: u64,
    pub h1: u64,
    pub h2: u64,
    pub h0_certificate: CohomologyCertificate,
    /// Certificate for `h^0(K - D)`.
    pub h2_certificate: CohomologyCertificate,
}

impl CohomologyTriple {
    pub fn is_exact(&self) -> bool {
        self.h0_certificate.genericity != Genericity::UpperBoundOnly
            && self.h2_certificate.genericity != Genericity::UpperBoundOnly
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NefVerdict {
    /// `witness . D = degree < 0`.
    Vanishes { witness: DivisorClass, degree: i64 },
    Unknown,
}

pub fn nef_degree_test(lattice: &SurfaceLattice, d: &DivisorClass) -> Result<NefVerdict, PicardError> {
    for witness in lattice.nef_witnesses() {
        let degree = lattice.pair(witness, d)?;
        if degree < 0 {
            return Ok(NefVerdict::Vanishes { witness: witness.clone(), degree });
        }
    }
    Ok(NefVerdict::Unknown)
}

/// Removes exceptional curves and the negative section while they are forced
/// into every member of `|D|`.
pub fn fixed_component_reduce(lattice: &SurfaceLattice, d: &DivisorClass) -> Result<DivisorClass, VanishingError> {
    let base = d.surface().base_rank();
    let mut coeffs = d.coeffs().to_vec();
    for c in &mut coeffs[base..] {
        *c = (*c).min(0);
    }
    let mut out = lattice.class(coeffs)?;
    if let Some(n) = d.surface().hirzebruch_degree().filter(|&n| n > 0) {
        let c = lattice.c()?;
        let dc = lattice.pair(&out, &c)?;
        if dc < 0 {
            // each removal of C raises D.C by n
            let steps = (-dc + n as i64 - 1) / n as i64;
            if steps as usize > REDUCTION_CAP {
                return Err(VanishingError::InternalError(format!("{d}")));
            }
            out = out.combine(-steps, &c)?;
        }
    }
    Ok(out)
}

/// SHGH standard form: `d > 0`, `d >= m_1 >= .. >= m_r >= 0` after sorting and
/// `d >= m_1 + m_2 + m_3`.
pub fn standard_form(d: &DivisorClass) -> Result<bool, VanishingError> {
    if !d.surface().is_plane() {
        return Err(VanishingError::NotPlane);
    }
    let degree = d.base()[0];
    let mut m: Vec<i64> = d.multiplicities().collect();
    m.sort_unstable_by(|a, b| b.cmp(a));
    if degree <= 0 || m.last().is_some_and(|&x| x < 0) || m.first().is_some_and(|&x| x > degree) {
        return Ok(false);
    }
    let top3: i64 = m.iter().take(3).sum();
    Ok(degree - top3 >= 0)
}

pub fn shgh_h0(lattice: &SurfaceLattice, d: &DivisorClass) -> Result<Option<u64>, VanishingError> {
    if !standard_form(d)? || d.multiplicities().any(|m| m > SHGH_MAX_MULTIPLICITY) {
        return Ok(None);
    }
    Ok(Some(lattice.chi(d)?.max(0) as u64))
}

/// Cache for interpolated values, keyed by the reduced class.
pub trait H0Store: Sync {
    fn lookup(&self, reduced: &DivisorClass) -> Option<u64>;
    fn record(&self, reduced: &DivisorClass, h0: u64);
}

pub struct NoStore;

impl H0Store for NoStore {
    fn lookup(&self, _: &DivisorClass) -> Option<u64> {
        None
    }

    fn record(&self, _: &DivisorClass, _: u64) {}
}

#[cfg(feature = "std")]
#[derive(Default)]
pub struct MemoryStore(std::sync::Mutex<std::collections::HashMap<DivisorClass, u64>>);

#[cfg(feature = "std")]
impl H0Store for MemoryStore {
    fn lookup(&self, reduced: &DivisorClass) -> Option<u64> {
        self.0.lock().ok()?.get(reduced).copied()
    }

    fn record(&self, reduced: &DivisorClass, h0: u64) {
        if let Ok(mut map) = self.0.lock() {
            map.insert(reduced.clone(), h0);
        }
    }
}

/// Shared byte budget for concurrent eliminations. A request larger than the
/// whole budget waits for an idle gate and then runs alone, leaving the
/// elimination itself to reject it.
#[cfg(feature = "std")]
pub struct MemoryGate {
    budget: u64,
    used: std::sync::Mutex<u64>,
    freed: std::sync::Condvar,
}

#[cfg(feature = "std")]
impl MemoryGate {
    pub fn new(budget: u64) -> Self {
        Self { budget, used: std::sync::Mutex::new(0), freed: std::sync::Condvar::new() }
    }

    pub fn acquire(&self, bytes: u64) -> MemoryPermit<'_> {
        let bytes = bytes.min(self.budget);
        let mut used = self.used.lock().unwrap_or_else(|e| e.into_inner());
        while *used + bytes > self.budget {
            used = self.freed.wait(used).unwrap_or_else(|e| e.into_inner());
        }
        *used += bytes;
        MemoryPermit { gate: self, bytes }
    }
}

#[cfg(feature = "std")]
pub struct MemoryPermit<'a> {
    gate: &'a MemoryGate,
    bytes: u64,
}

#[cfg(feature = "std")]
impl Drop for MemoryPermit<'_> {
    fn drop(&mut self) {
        let mut used = self.gate.used.lock().unwrap_or_else(|e| e.into_inner());
        *used -= self.bytes;
        self.gate.freed.notify_all();
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct EngineOptions {
    /// Refuse interpolation whose largest monomial degree exceeds this.
    pub max_degree: Option<u64>,
    pub rank: RankOptions,
}

/// Decides `h^0` for classes on one surface at one point set.
pub struct H0Engine<'a> {
    lattice: &'a SurfaceLattice,
    points: Option<&'a PointSet>,
    store: &'a dyn H0Store,
    options: EngineOptions,
    #[cfg(feature = "std")]
    gate: Option<&'a MemoryGate>,
}

impl<'a> H0Engine<'a> {
    pub fn new(
        lattice: &'a SurfaceLattice,
        points: Option<&'a PointSet>,
        store: &'a dyn H0Store,
        options: EngineOptions,
    ) -> Self {
        Self {
            lattice,
            points,
            store,
            options,
            #[cfg(feature = "std")]
            gate: None,
        }
    }

    #[cfg(feature = "std")]
    pub fn with_gate(mut self, gate: &'a MemoryGate) -> Self {
        self.gate = Some(gate);
        self
    }

    pub fn lattice(&self) -> &SurfaceLattice {
        self.lattice
    }

    pub fn points(&self) -> Option<&PointSet> {
        self.points
    }

    pub fn h0(&self, d: &DivisorClass) -> Result<CohomologyCertificate, VanishingError> {
        let lattice = self.lattice;
        let reduced = fixed_component_reduce(lattice, d)?;
        let changed = &reduced != d;
        let decided = |h0: u64, rule: Rule, genericity: Option<Genericity>| {
            let genericity = genericity.unwrap_or(if h0 == 0 {
                Genericity::VanishesGenerically
            } else {
                Genericity::ExactGeneric
            });
            CohomologyCertificate {
                divisor: d.clone(),
                h0,
                rule,
                genericity,
                reduced: changed.then(|| reduced.clone()),
            }
        };

        if reduced.base().iter().all(|&c| c == 0) {
            let h0 = u64::from(reduced.is_zero());
            let rule = if changed { Rule::FixedComponentThenRule } else { Rule::ExceptionalOnly };
            return Ok(decided(h0, rule, None));
        }
        if let NefVerdict::Vanishes { .. } = nef_degree_test(lattice, &reduced)? {
            return Ok(decided(0, Rule::NefDegree, None));
        }
        if reduced.surface().is_plane() {
            if let Some(h0) = shgh_h0(lattice, &reduced)? {
                return Ok(decided(h0, Rule::StandardFormSHGH, None));
            }
        }

        let Some(points) = self.points else {
            return Err(VanishingError::OracleUnavailable { divisor: format!("{d}") });
        };
        let (bundle, mults) = BundleData::split(&reduced)?;
        if let Some(cap) = self.options.max_degree {
            if bundle.max_degree() > cap {
                return Err(VanishingError::DegreeCapExceeded {
                    divisor: format!("{d}"),
                    degree: bundle.max_degree(),
                    cap,
                });
            }
        }
        let h0 = match self.store.lookup(&reduced) {
            Some(v) => v,
            None => {
                #[cfg(feature = "std")]
                let _permit = self.gate.map(|g| {
                    let rows: u64 = mults.iter().map(|&m| m as u64 * (m as u64 + 1) / 2).sum();
                    let cols = bundle.section_count();
                    // the residue matrix lives alongside the elimination workspace
                    g.acquire(crate::ffrank::working_bytes(rows as usize, cols as usize) + rows * cols * 4)
                });
                #[cfg(not(feature = "std"))]
                let _ = &mults;
                let v = fatpoints::h0_interpolation(&reduced, points, &self.options.rank)?;
                self.store.record(&reduced, v);
                v
            }
        };
        let genericity = fatpoints::certify_generic(lattice, &reduced, h0)?;
        let rule = Rule::Interpolation { prime: points.prime(), pointset: points.id() };
        Ok(decided(h0, rule, Some(genericity)))
    }

    /// `(h0, h1, h2)` from `h^0(D)`, Serre duality and Riemann-Roch.
    pub fn cohomology_triple(&self, d: &DivisorClass) -> Result<CohomologyTriple, VanishingError> {
        let chi = self.lattice.chi(d)?;
        let h0_certificate = self.h0(d)?;
        let dual = self.lattice.canonical().checked_sub(d)?;
        let h2_certificate = self.h0(&dual)?;
        let (h0, h2) = (h0_certificate.h0, h2_certificate.h0);
        let h1 = h0 as i64 + h2 as i64 - chi;
        if h1 < 0 {
            return Err(VanishingError::InconsistentCohomology { divisor: format!("{d}"), h0, h2, chi });
        }
        Ok(CohomologyTriple { divisor: d.clone(), chi, h0, h1: h1 as u64, h2, h0_certificate, h2_certificate })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fatpoints::sample_points;
    use crate::picard::{Involution, SurfaceKind};

    fn f2() -> SurfaceLattice {
        SurfaceLattice::new(SurfaceKind::BlowupHirzebruch { degree: 2, points: 9 }).unwrap()
    }

    fn p2(n: u32) -> SurfaceLattice {
        SurfaceLattice::new(SurfaceKind::BlowupP2 { points: n }).unwrap()
    }

    #[test]
    fn nef_test_examples() {
        let y = f2();
        let (c, f, e) = (y.c().unwrap(), y.f().unwrap(), y.sum_e());
        let d = y.linear(&[(-25, &c), (-51, &f), (12, &e)]).unwrap();
        match nef_degree_test(&y, &d).unwrap() {
            NefVerdict::Vanishes { .. } => {}
            NefVerdict::Unknown => panic!("expected vanishing"),
        }
        let c3f = y.linear(&[(1, &c), (3, &f)]).unwrap();
        assert_eq!(y.pair(&c3f, &d).unwrap(), -76);
        assert_eq!(nef_degree_test(&y, &y.zero()).unwrap(), NefVerdict::Unknown);
    }

    #[test]
    fn reduction_examples() {
        let y = f2();
        let (e1, e2) = (y.e(1).unwrap(), y.e(2).unwrap());
        assert_eq!(fixed_component_reduce(&y, &e1).unwrap(), y.zero());
        assert_eq!(fixed_component_reduce(&y, &e1.checked_sub(&e2).unwrap()).unwrap(), e2.neg().unwrap());
        let fixed = y.linear(&[(1, &y.c().unwrap()), (3, &y.f().unwrap()), (-1, &e1)]).unwrap();
        assert_eq!(fixed_component_reduce(&y, &fixed).unwrap(), fixed);
        // 3C + F meets C in -5; three copies of C are fixed
        let d = y.linear(&[(3, &y.c().unwrap()), (1, &y.f().unwrap())]).unwrap();
        let r = fixed_component_reduce(&y, &d).unwrap();
        assert_eq!(r.coeffs()[..2], [0, 1]);
    }

    #[test]
    fn standard_form_examples() {
        let x = p2(11);
        let h = x.h().unwrap();
        let minus_f = x.linear(&[(10, &h), (-3, &x.sum_e())]).unwrap();
        assert!(standard_form(&minus_f).unwrap());
        assert!(standard_form(&x.canonical().neg().unwrap()).unwrap());
        let bad = x.linear(&[(2, &h), (-1, &x.sum_e())]).unwrap();
        assert!(!standard_form(&bad).unwrap());
        assert_eq!(standard_form(&f2().zero()), Err(VanishingError::NotPlane));
    }

    #[test]
    fn shgh_examples() {
        let x = p2(11);
        let h = x.h().unwrap();
        let minus_f = x.linear(&[(10, &h), (-3, &x.sum_e())]).unwrap();
        assert_eq!(shgh_h0(&x, &minus_f).unwrap(), Some(0));
        assert_eq!(shgh_h0(&x, &x.canonical().neg().unwrap()).unwrap(), Some(0));
        let k_minus_f = x.linear(&[(7, &h), (-2, &x.sum_e())]).unwrap();
        assert_eq!(shgh_h0(&x, &k_minus_f).unwrap(), Some(3));
        let big = x.linear(&[(40, &h), (-12, &x.e(1).unwrap())]).unwrap();
        assert_eq!(shgh_h0(&x, &big).unwrap(), None);
    }

    #[test]
    fn dispatch_records_the_deciding_layer() {
        let y = f2();
        let store = NoStore;
        let engine = H0Engine::new(&y, None, &store, EngineOptions::default());
        let e1 = engine.h0(&y.e(1).unwrap()).unwrap();
        assert_eq!((e1.h0, &e1.rule), (1, &Rule::FixedComponentThenRule));
        let m = engine.h0(&y.e(1).unwrap().neg().unwrap()).unwrap();
        assert_eq!((m.h0, &m.rule), (0, &Rule::ExceptionalOnly));
        let (c, f, e) = (y.c().unwrap(), y.f().unwrap(), y.sum_e());
        let s3g = y.linear(&[(-25, &c), (-51, &f), (12, &e)]).unwrap();
        assert_eq!(engine.h0(&s3g).unwrap().rule, Rule::NefDegree);
        let minus_g = y.linear(&[(8, &c), (17, &f), (-4, &e)]).unwrap();
        assert!(matches!(engine.h0(&minus_g), Err(VanishingError::OracleUnavailable { .. })));
    }

    #[test]
    fn interpolation_layer_and_degree_cap() {
        let y = f2();
        let pts = sample_points(y.kind(), 9, 997, 7).unwrap();
        let store = MemoryStore::default();
        let (c, f, e) = (y.c().unwrap(), y.f().unwrap(), y.sum_e());
        let minus_g = y.linear(&[(8, &c), (17, &f), (-4, &e)]).unwrap();
        let engine = H0Engine::new(&y, Some(&pts), &store, EngineOptions::default());
        let cert = engine.h0(&minus_g).unwrap();
        assert_eq!(cert.h0, 0);
        assert_eq!(cert.genericity, Genericity::VanishesGenerically);
        assert!(matches!(cert.rule, Rule::Interpolation { prime: 997, .. }));
        assert_eq!(store.lookup(&minus_g), Some(0));
        let capped = H0Engine::new(&y, Some(&pts), &store, EngineOptions { max_degree: Some(10), ..Default::default() });
        assert!(matches!(capped.h0(&minus_g), Err(VanishingError::DegreeCapExceeded { degree: 17, .. })));
    }

    #[test]
    fn f2_triples() {
        let y = f2();
        let pts = sample_points(y.kind(), 9, 997, 3).unwrap();
        let store = NoStore;
        let engine = H0Engine::new(&y, Some(&pts), &store, EngineOptions::default());
        let k = y.canonical().clone();
        let d1 = k.scaled(2).unwrap().checked_sub(&y.e(1).unwrap()).unwrap();
        let t = engine.cohomology_triple(&d1).unwrap();
        assert_eq!((t.chi, t.h0, t.h1, t.h2), (1, 0, 0, 1));
        assert!(t.is_exact());
        let zero = engine.cohomology_triple(&y.zero()).unwrap();
        assert_eq!((zero.h0, zero.h1, zero.h2), (1, 0, 0));
        let inv = Involution::canonical(&y).unwrap();
        assert_eq!(inv.apply(&y, &d1).unwrap(), y.e(1).unwrap());
    }

    #[test]
    fn certificates_serialize_flat() {
        let y = f2();
        let cert = CohomologyCertificate {
            divisor: y.zero(),
            h0: 0,
            rule: Rule::Interpolation { prime: 997, pointset: "x".into() },
            genericity: Genericity::VanishesGenerically,
            reduced: None,
        };
        let json = serde_json::to_value(&cert).unwrap();
        assert_eq!(json["rule"], "interpolation");
        assert_eq!(json["prime"], 997);
        let back: CohomologyCertificate = serde_json::from_value(json).unwrap();
        assert_eq!(back, cert);
    }
}
