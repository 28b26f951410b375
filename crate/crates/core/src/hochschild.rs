//! Closed-form deformation counts and the resulting statements about
//! `HH^2` of the orthogonal complement of a collection.
//!
//! On the surfaces in scope `h^0(T_X) = h^2(T_X) = 0`, so `HH^2(X)` is
//! `H^1(T_X)`. If the normal Hochschild cohomology vanishes through degree 3
//! (height at least 4) the restriction `HH^2(X) -> HH^2(C)` is an isomorphism;
//! at height 3 it is only injective.

use alloc::string::String;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::heights::{Height, HeightClaim, HeightReport};
use crate::picard::SurfaceKind;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HochschildError {
    #[error("{formula} needs {requirement}, got {value}")]
    OutOfRange { formula: &'static str, requirement: &'static str, value: u32 },
    #[error("height {0} is too small for an HH^2 statement")]
    InsufficientHeight(Height),
}

/// `h^1(T_X)` for `P^2` blown up in `n >= 8` general points.
pub fn h1_tangent_p2_blowup(n: u32) -> Result<u32, HochschildError> {
    if n < 8 {
        return Err(HochschildError::OutOfRange { formula: "h1(T) of a plane blowup", requirement: "n >= 8", value: n });
    }
    Ok(2 * n - 8)
}

/// Number of general points after which `|-K|` on the blowup of `F_n` is empty.
pub fn d_critical(n: u32) -> u32 {
    6 + n.max(3)
}

/// `h^1(T_X)` for `F_n` blown up in `d_critical(n)` general points.
pub fn h1_tangent_hirzebruch_blowup(n: u32) -> Result<u32, HochschildError> {
    match n {
        0 => Err(HochschildError::OutOfRange {
            formula: "h1(T) of a Hirzebruch blowup",
            requirement: "n >= 1",
            value: n,
        }),
        1..=3 => Ok(11 + n),
        _ => Ok(5 + 3 * n),
    }
}

/// `h^1(T_X)` for a surface, checking the point count the formulas assume.
pub fn h1_tangent(surface: SurfaceKind) -> Result<u32, HochschildError> {
    match surface {
        SurfaceKind::BlowupP2 { points } => h1_tangent_p2_blowup(points),
        SurfaceKind::BlowupHirzebruch { degree, points } => {
            if points != d_critical(degree) {
                return Err(HochschildError::OutOfRange {
                    formula: "h1(T) of a Hirzebruch blowup",
                    requirement: "exactly d_critical(n) points",
                    value: points,
                });
            }
            h1_tangent_hirzebruch_blowup(degree)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "value")]
pub enum Hh2Statement {
    Exact(u32),
    LowerBound(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Justification {
    HeightAtLeast4,
    HeightEquals3,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HHCertificate {
    pub scenario: String,
    pub h1_tangent: u32,
    pub statement: Hh2Statement,
    pub justification: Justification,
}

impl HHCertificate {
    /// Whether two certificates can describe categories of equal `HH^2`.
    pub fn compatible_with(&self, other: &Self) -> bool {
        use Hh2Statement::*;
        match (self.statement, other.statement) {
            (Exact(a), Exact(b)) => a == b,
            (Exact(a), LowerBound(b)) | (LowerBound(b), Exact(a)) => a >= b,
            (LowerBound(_), LowerBound(_)) => true,
        }
    }
}

pub fn hh2_statement(scenario: &str, h1_tangent: u32, report: &HeightReport) -> Result<HHCertificate, HochschildError> {
    let (statement, justification) = if report.pseudoheight >= Height::Finite(4) {
        (Hh2Statement::Exact(h1_tangent), Justification::HeightAtLeast4)
    } else if report.exact
        && report.height_claim == HeightClaim::EqualsPseudoheight
        && report.pseudoheight == Height::Finite(3)
    {
        (Hh2Statement::LowerBound(h1_tangent), Justification::HeightEquals3)
    } else {
        return Err(HochschildError::InsufficientHeight(report.pseudoheight));
    };
    Ok(HHCertificate { scenario: scenario.into(), h1_tangent, statement, justification })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fatpoints::BundleData;
    use crate::heights::{report_from_table, RheightEntry, RheightTable};

    fn report(closer: i64) -> HeightReport {
        let t = RheightTable::build::<()>(1, |_, _| unreachable!(), |_, _| {
            Ok(RheightEntry::exact(Height::Finite(closer)))
        })
        .unwrap();
        report_from_table(t).unwrap()
    }

    #[test]
    fn tangent_counts() {
        assert_eq!(h1_tangent_p2_blowup(11), Ok(14));
        assert_eq!(h1_tangent_p2_blowup(10), Ok(12));
        assert_eq!(h1_tangent_p2_blowup(8), Ok(8));
        assert!(h1_tangent_p2_blowup(7).is_err());
        assert_eq!(h1_tangent_hirzebruch_blowup(2), Ok(13));
        assert_eq!(h1_tangent_hirzebruch_blowup(3), Ok(14));
        assert_eq!(h1_tangent_hirzebruch_blowup(4), Ok(17));
        assert!(h1_tangent_hirzebruch_blowup(0).is_err());
        assert_eq!(h1_tangent(SurfaceKind::BlowupHirzebruch { degree: 2, points: 9 }), Ok(13));
        assert!(h1_tangent(SurfaceKind::BlowupHirzebruch { degree: 2, points: 10 }).is_err());
    }

    #[test]
    fn d_critical_values() {
        assert_eq!(d_critical(2), 9);
        assert_eq!(d_critical(0), 9);
        assert_eq!(d_critical(5), 11);
    }

    #[test]
    fn d_critical_counts_anticanonical_sections() {
        for n in 0..=8 {
            let sections = BundleData::Hirzebruch { n, a: 2, b: n + 2 }.section_count();
            assert_eq!(sections, d_critical(n) as u64);
        }
    }

    #[test]
    fn statements_follow_height() {
        let c = hh2_statement("a", 14, &report(1)).unwrap();
        assert_eq!(c.statement, Hh2Statement::LowerBound(14));
        let d = hh2_statement("b", 13, &report(2)).unwrap();
        assert_eq!((d.statement, d.justification), (Hh2Statement::Exact(13), Justification::HeightAtLeast4));
        assert!(matches!(hh2_statement("c", 1, &report(0)), Err(HochschildError::InsufficientHeight(_))));
    }

    #[test]
    fn distinguishability() {
        let mk = |s| HHCertificate { scenario: "x".into(), h1_tangent: 0, statement: s, justification: Justification::HeightAtLeast4 };
        let (a, b, c) = (mk(Hh2Statement::Exact(12)), mk(Hh2Statement::LowerBound(14)), mk(Hh2Statement::Exact(13)));
        assert!(!a.compatible_with(&b) && !a.compatible_with(&c) && !b.compatible_with(&c));
    }
}
