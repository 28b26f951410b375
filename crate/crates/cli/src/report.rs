//! The `pv-report/1` verification report.

use std::fmt::Write as _;

use pv_core::fatpoints::Provenance;
use pv_core::heights::HeightReport;
use pv_core::hochschild::HHCertificate;
use pv_core::picard::{DivisorClass, NumericalExceptionality, SurfaceKind};
use pv_core::vanishing::CohomologyCertificate;
use serde::{Deserialize, Serialize};

pub const SCHEMA: &str = "pv-report/1";

fn sheaf(name: &str) -> String {
    if name == "O" {
        "O_X".into()
    } else {
        format!("O_X({name})")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NamedClass {
    pub name: String,
    pub class: DivisorClass,
}

impl NamedClass {
    pub fn new(name: impl Into<String>, class: DivisorClass) -> Self {
        Self { name: name.into(), class }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    /// `h^0(L_to - L_from)`.
    Hom,
    /// `h^2(L_to - L_from) = h^0(K + L_from - L_to)`.
    Ext2,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairCheck {
    pub from: usize,
    pub to: usize,
    pub kind: CheckKind,
    pub divisor: String,
    pub h0: u64,
    pub rule: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Orthogonality {
    pub pairs_checked: usize,
    pub completely_orthogonal: bool,
    /// 1-based `(i, j)` with some `Ext^k(O(D_i), O(D_j)) != 0`.
    pub failures: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldenCheck {
    pub name: String,
    /// The statement this value reproduces.
    pub claim: String,
    pub expected: String,
    pub observed: String,
    pub pass: bool,
    /// Non-gating checks are reported but do not affect the verdict.
    pub gating: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub schema: String,
    pub scenario: String,
    pub surface: SurfaceKind,
    pub prime: u32,
    pub pointset: String,
    pub provenance: Provenance,
    pub involution: String,
    pub base: Vec<NamedClass>,
    pub collection: Vec<NamedClass>,
    pub numerical_exceptionality: NumericalExceptionality,
    pub exceptional: bool,
    pub exceptionality_checks: Vec<PairCheck>,
    pub fullness_checks: Vec<PairCheck>,
    pub all_homs_vanish: Option<bool>,
    pub orthogonality: Option<Orthogonality>,
    pub heights: Option<HeightReport>,
    pub h1_tangent: Option<u32>,
    pub hh2: Option<HHCertificate>,
    /// Why no `HH^2` statement could be made, when one was attempted.
    pub hh2_refused: Option<String>,
    /// One certificate per distinct class, in first-use order.
    pub certificates: Vec<CohomologyCertificate>,
    pub goldens: Vec<GoldenCheck>,
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<u64>,
}

impl VerificationReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    pub fn failed_goldens(&self) -> impl Iterator<Item = &GoldenCheck> {
        self.goldens.iter().filter(|g| g.gating && !g.pass)
    }

    pub fn to_markdown(&self) -> String {
        let mut s = String::new();
        let verdict = match self.verdict {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
        };
        let _ = writeln!(s, "# Scenario `{}`: {verdict}\n", self.scenario);
        let _ = writeln!(s, "- surface: `{}`", self.surface);
        let _ = writeln!(s, "- points: `{}` over F_{}", self.pointset, self.prime);
        let _ = writeln!(s, "- involution: {}", self.involution);
        if let Some(ms) = self.elapsed_ms {
            let _ = writeln!(s, "- elapsed: {:.1} s", ms as f64 / 1000.0);
        }

        let _ = writeln!(s, "\n## Collection\n\n| # | object | class | reflected from |\n|---|---|---|---|");
        for (i, (c, b)) in self.collection.iter().zip(&self.base).enumerate() {
            let _ = writeln!(s, "| {i} | {} | `{}` | {} |", sheaf(&c.name), c.class, sheaf(&b.name));
        }

        let _ = writeln!(s, "\n## Checks\n");
        let vanish = |checks: &[PairCheck]| checks.iter().filter(|c| c.h0 == 0).count();
        let _ = writeln!(
            s,
            "- numerically exceptional: {} ({} failing pairs)",
            self.numerical_exceptionality.exceptional,
            self.numerical_exceptionality.failures.len()
        );
        let _ = writeln!(
            s,
            "- exceptionality: {} of {} backward hom and ext2 checks vanish",
            vanish(&self.exceptionality_checks),
            self.exceptionality_checks.len()
        );
        if !self.fullness_checks.is_empty() {
            let _ = writeln!(
                s,
                "- forward homs: {} of {} vanish",
                vanish(&self.fullness_checks),
                self.fullness_checks.len()
            );
        }
        if let Some(o) = &self.orthogonality {
            let _ = writeln!(s, "- completely orthogonal D_i: {} ({} ordered pairs)", o.completely_orthogonal, o.pairs_checked);
        }
        if let Some(h) = &self.heights {
            let _ = writeln!(
                s,
                "- anticanonical pseudoheight {}, pseudoheight {} ({}), minimizing chain {:?}, {:?}, {:?}",
                serde_json::to_string(&h.pseudoheight_ac).unwrap_or_default(),
                serde_json::to_string(&h.pseudoheight).unwrap_or_default(),
                if h.exact { "exact" } else { "lower bound" },
                h.minimizing_chain,
                h.height_claim,
                h.fullness
            );
        }
        if let Some(h1) = self.h1_tangent {
            let _ = writeln!(s, "- h^1(T_X) = {h1}");
        }
        if let Some(c) = &self.hh2 {
            let _ = writeln!(s, "- HH^2: {:?} ({:?})", c.statement, c.justification);
        }
        if let Some(why) = &self.hh2_refused {
            let _ = writeln!(s, "- HH^2: no statement ({why})");
        }

        let _ = writeln!(s, "\n## Goldens\n\n| check | expected | observed | result | claim |\n|---|---|---|---|---|");
        for g in &self.goldens {
            let result = match (g.pass, g.gating) {
                (true, _) => "pass",
                (false, true) => "FAIL",
                (false, false) => "differs (informational)",
            };
            let _ = writeln!(s, "| {} | `{}` | `{}` | {result} | {} |", g.name, g.expected, g.observed, g.claim);
        }

        let _ = writeln!(s, "\n## Certificates\n\n| divisor | h0 | rule | genericity |\n|---|---|---|---|");
        for c in &self.certificates {
            let rule = match &c.rule {
                pv_core::vanishing::Rule::Interpolation { prime, pointset } => format!("interpolation ({pointset}, p = {prime})"),
                r => r.label().to_string(),
            };
            let _ = writeln!(s, "| `{}` | {} | {rule} | {:?} |", c.divisor, c.h0, c.genericity);
        }
        s
    }
}
