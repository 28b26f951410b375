//! Vanishing and cohomology tables for the ten-point plane and the
//! nine-point `F_2` scenarios.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::str::FromStr;

use pv_core::picard::{DivisorClass, PicardError, SurfaceKind};
use pv_core::vanishing::{CohomologyTriple, Genericity, H0Store, MemoryGate, Rule};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::scenario::{certify_all, setup, RunOptions, ScenarioError, ScenarioId, Setup, Symbols};

pub const SCHEMA: &str = "pv-table/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TableId {
    Table1,
    Table2,
    Table3,
}

impl TableId {
    pub fn as_str(self) -> &'static str {
        match self {
            TableId::Table1 => "table1",
            TableId::Table2 => "table2",
            TableId::Table3 => "table3",
        }
    }

    pub fn scenario(self) -> ScenarioId {
        match self {
            TableId::Table1 => ScenarioId::PlaneAlternate,
            TableId::Table2 | TableId::Table3 => ScenarioId::Hirzebruch2,
        }
    }

    pub fn caption(self) -> &'static str {
        match self {
            TableId::Table1 => "Vanishing of linear systems on the blowup of P^2 at 10 generic points",
            TableId::Table2 => "Vanishing of linear systems on the blowup of F_2 at 9 generic points",
            TableId::Table3 => "Cohomology of line bundles on the blowup of F_2 at 9 generic points",
        }
    }
}

impl FromStr for TableId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "table1" => Ok(TableId::Table1),
            "table2" => Ok(TableId::Table2),
            "table3" => Ok(TableId::Table3),
            _ => Err(format!("unknown table {s:?} (expected table1, table2 or table3)")),
        }
    }
}

/// The justification a table row gives for `h^0 = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reason {
    Degree,
    Exceptional,
    Interpolation,
}

impl Reason {
    pub fn matches(self, rule: &Rule) -> bool {
        matches!(
            (self, rule),
            (Reason::Degree, Rule::NefDegree)
                | (Reason::Exceptional, Rule::FixedComponentThenRule | Rule::ExceptionalOnly)
                | (Reason::Interpolation, Rule::Interpolation { .. })
        )
    }
}

#[derive(Debug, Clone, Copy)]
enum Sym {
    K,
    F,
    S,
    Di,
    Dj,
    D(usize),
}

#[derive(Debug, Clone, Copy)]
enum Idx {
    None,
    I(usize, usize),
    J(usize, usize),
    ILtJ(usize, usize),
    IJ((usize, usize), (usize, usize)),
    INeJ(usize, usize),
}

impl Idx {
    fn instances(self) -> Vec<(Option<usize>, Option<usize>)> {
        let r = |(a, b): (usize, usize)| a..=b;
        match self {
            Idx::None => vec![(None, None)],
            Idx::I(a, b) => r((a, b)).map(|i| (Some(i), None)).collect(),
            Idx::J(a, b) => r((a, b)).map(|j| (None, Some(j))).collect(),
            Idx::ILtJ(a, b) => r((a, b)).flat_map(|i| (i + 1..=b).map(move |j| (Some(i), Some(j)))).collect(),
            Idx::IJ(ri, rj) => r(ri).flat_map(|i| r(rj).map(move |j| (Some(i), Some(j)))).collect(),
            Idx::INeJ(a, b) => {
                r((a, b)).flat_map(|i| r((a, b)).filter(move |&j| j != i).map(move |j| (Some(i), Some(j)))).collect()
            }
        }
    }

    fn describe(self) -> String {
        let range = |(a, b): (usize, usize)| match b - a {
            0 => a.to_string(),
            1 => format!("{a},{b}"),
            2 => format!("{a},{},{b}", a + 1),
            _ => format!("{a},...,{b}"),
        };
        match self {
            Idx::None => String::new(),
            Idx::I(a, b) => format!("i={}", range((a, b))),
            Idx::J(a, b) => format!("j={}", range((a, b))),
            Idx::ILtJ(a, b) => format!("i<j in {{{}}}", range((a, b))),
            Idx::IJ(ri, rj) => format!("i={}, j={}", range(ri), range(rj)),
            Idx::INeJ(a, b) => format!("i!=j in {{{}}}", range((a, b))),
        }
    }
}

struct RowDef {
    label: &'static str,
    idx: Idx,
    reason: Option<Reason>,
    terms: &'static [(i64, Sym)],
}

const fn row(label: &'static str, idx: Idx, reason: Reason, terms: &'static [(i64, Sym)]) -> RowDef {
    RowDef { label, idx, reason: Some(reason), terms }
}

use Reason::{Degree as DEG, Exceptional as EXC, Interpolation as INT};
use Sym::{Di, Dj, D, F, K, S};

const G8: (usize, usize) = (8, 10);
const G3: (usize, usize) = (3, 7);
const G1: (usize, usize) = (1, 2);

const TABLE1: &[RowDef] = &[
    row("-F", Idx::None, INT, &[(-1, F)]),
    row("F+K_X", Idx::None, DEG, &[(1, F), (1, K)]),
    row("-2F+D_i", Idx::I(8, 10), INT, &[(-2, F), (1, Di)]),
    row("2F-D_i+K_X", Idx::I(8, 10), DEG, &[(2, F), (-1, Di), (1, K)]),
    row("-2F+D_i", Idx::I(3, 7), INT, &[(-2, F), (1, Di)]),
    row("2F-D_i+K_X", Idx::I(3, 7), DEG, &[(2, F), (-1, Di), (1, K)]),
    row("-2F+D_i", Idx::I(1, 2), INT, &[(-2, F), (1, Di)]),
    row("2F-D_i+K_X", Idx::I(1, 2), DEG, &[(2, F), (-1, Di), (1, K)]),
    row("-2F", Idx::None, INT, &[(-2, F)]),
    row("2F+K_X", Idx::None, DEG, &[(2, F), (1, K)]),
    row("-F+D_i", Idx::I(8, 10), INT, &[(-1, F), (1, Di)]),
    row("F-D_i+K_X", Idx::I(8, 10), DEG, &[(1, F), (-1, Di), (1, K)]),
    row("-F+D_i", Idx::I(3, 7), INT, &[(-1, F), (1, Di)]),
    row("F-D_i+K_X", Idx::I(3, 7), DEG, &[(1, F), (-1, Di), (1, K)]),
    row("-F+D_i", Idx::I(1, 2), INT, &[(-1, F), (1, Di)]),
    row("F-D_i+K_X", Idx::I(1, 2), DEG, &[(1, F), (-1, Di), (1, K)]),
    row("D_j-D_i+K_X", Idx::ILtJ(8, 10), DEG, &[(1, Dj), (-1, Di), (1, K)]),
    row("D_i-D_j", Idx::IJ(G3, G8), INT, &[(1, Di), (-1, Dj)]),
    row("D_j-D_i+K_X", Idx::IJ(G3, G8), DEG, &[(1, Dj), (-1, Di), (1, K)]),
    row("D_i-D_j", Idx::IJ(G1, G8), DEG, &[(1, Di), (-1, Dj)]),
    row("D_j-D_i+K_X", Idx::IJ(G1, G8), INT, &[(1, Dj), (-1, Di), (1, K)]),
    row("-D_i", Idx::I(8, 10), INT, &[(-1, Di)]),
    row("D_i+K_X", Idx::I(8, 10), DEG, &[(1, Di), (1, K)]),
    row("D_j-D_i+K_X", Idx::ILtJ(3, 7), DEG, &[(1, Dj), (-1, Di), (1, K)]),
    row("D_i-D_j", Idx::IJ(G1, G3), DEG, &[(1, Di), (-1, Dj)]),
    row("D_j-D_i+K_X", Idx::IJ(G1, G3), INT, &[(1, Dj), (-1, Di), (1, K)]),
    row("-D_i", Idx::I(3, 7), INT, &[(-1, Di)]),
    row("D_i+K_X", Idx::I(3, 7), DEG, &[(1, Di), (1, K)]),
    row("D_2-D_1+K_X", Idx::None, DEG, &[(1, D(2)), (-1, D(1)), (1, K)]),
    row("-D_i", Idx::I(1, 2), INT, &[(-1, Di)]),
    row("D_i+K_X", Idx::I(1, 2), DEG, &[(1, Di), (1, K)]),
    row("D_i", Idx::I(1, 10), DEG, &[(1, Di)]),
    row("F", Idx::None, DEG, &[(1, F)]),
    row("2F", Idx::None, DEG, &[(2, F)]),
    row("D_j-D_i", Idx::IJ(G1, G3), INT, &[(1, Dj), (-1, Di)]),
    row("F-D_i", Idx::I(1, 10), DEG, &[(1, F), (-1, Di)]),
    row("2F-D_i", Idx::I(1, 10), DEG, &[(2, F), (-1, Di)]),
    row("D_j-D_i", Idx::IJ(G3, G8), DEG, &[(1, Dj), (-1, Di)]),
];

/// Classes the exceptionality and hom checks need that have no row of their own.
const TABLE1_SUPPLEMENT: &[RowDef] = &[
    RowDef { label: "D_i-D_j", idx: Idx::ILtJ(1, 2), reason: None, terms: &[(1, Di), (-1, Dj)] },
    RowDef { label: "D_i-D_j", idx: Idx::ILtJ(3, 7), reason: None, terms: &[(1, Di), (-1, Dj)] },
    RowDef { label: "D_i-D_j", idx: Idx::ILtJ(8, 10), reason: None, terms: &[(1, Di), (-1, Dj)] },
    RowDef { label: "D_j-D_i", idx: Idx::ILtJ(1, 2), reason: None, terms: &[(1, Dj), (-1, Di)] },
    RowDef { label: "D_j-D_i", idx: Idx::ILtJ(3, 7), reason: None, terms: &[(1, Dj), (-1, Di)] },
    RowDef { label: "D_j-D_i", idx: Idx::ILtJ(8, 10), reason: None, terms: &[(1, Dj), (-1, Di)] },
    RowDef { label: "D_j-D_i", idx: Idx::IJ(G1, G8), reason: None, terms: &[(1, Dj), (-1, Di)] },
];

// `F` stands for `G` on the Hirzebruch surface.
const TABLE2: &[RowDef] = &[
    row("-G", Idx::None, INT, &[(-1, F)]),
    row("K_X+G", Idx::None, DEG, &[(1, K), (1, F)]),
    row("-S-2G", Idx::None, INT, &[(-1, S), (-2, F)]),
    row("K_X+S+2G", Idx::None, DEG, &[(1, K), (1, S), (2, F)]),
    row("D_j-S-3G", Idx::J(1, 9), INT, &[(1, Dj), (-1, S), (-3, F)]),
    row("K_X-D_i+S+3G", Idx::I(1, 9), DEG, &[(1, K), (-1, Di), (1, S), (3, F)]),
    row("-S-3G", Idx::None, INT, &[(-1, S), (-3, F)]),
    row("K_X+S+3G", Idx::None, DEG, &[(1, K), (1, S), (3, F)]),
    row("-S-G", Idx::None, INT, &[(-1, S), (-1, F)]),
    row("K_X+S+G", Idx::None, DEG, &[(1, K), (1, S), (1, F)]),
    row("D_j-S-2G", Idx::J(1, 9), INT, &[(1, Dj), (-1, S), (-2, F)]),
    row("K_X-D_i+S+2G", Idx::I(1, 9), DEG, &[(1, K), (-1, Di), (1, S), (2, F)]),
    row("D_j-G", Idx::J(1, 9), INT, &[(1, Dj), (-1, F)]),
    row("K_X-D_i+G", Idx::I(1, 9), DEG, &[(1, K), (-1, Di), (1, F)]),
    row("D_j-D_i", Idx::INeJ(1, 9), EXC, &[(1, Dj), (-1, Di)]),
    row("K_X-D_j+D_i", Idx::INeJ(1, 9), DEG, &[(1, K), (-1, Dj), (1, Di)]),
    row("-D_j", Idx::J(1, 9), INT, &[(-1, Dj)]),
    row("K_X+D_i", Idx::I(1, 9), DEG, &[(1, K), (1, Di)]),
    row("D_i", Idx::I(1, 9), DEG, &[(1, Di)]),
    row("G", Idx::None, DEG, &[(1, F)]),
    row("S+2G", Idx::None, DEG, &[(1, S), (2, F)]),
    row("S+3G", Idx::None, DEG, &[(1, S), (3, F)]),
    row("G-D_i", Idx::I(1, 9), DEG, &[(1, F), (-1, Di)]),
    row("S+2G-D_i", Idx::I(1, 9), DEG, &[(1, S), (2, F), (-1, Di)]),
    row("S+3G-D_i", Idx::I(1, 9), DEG, &[(1, S), (3, F), (-1, Di)]),
    row("S+G", Idx::None, DEG, &[(1, S), (1, F)]),
];

const fn triple(label: &'static str, idx: Idx, terms: &'static [(i64, Sym)]) -> RowDef {
    RowDef { label, idx, reason: None, terms }
}

const TABLE3: &[RowDef] = &[
    triple("D_i", Idx::I(1, 9), &[(1, Di)]),
    triple("G", Idx::None, &[(1, F)]),
    triple("G-D_i", Idx::I(1, 9), &[(1, F), (-1, Di)]),
    triple("S+G", Idx::None, &[(1, S), (1, F)]),
    triple("S+2G", Idx::None, &[(1, S), (2, F)]),
    triple("S+3G", Idx::None, &[(1, S), (3, F)]),
    triple("S+2G-D_i", Idx::I(1, 9), &[(1, S), (2, F), (-1, Di)]),
    triple("S+3G-D_i", Idx::I(1, 9), &[(1, S), (3, F), (-1, Di)]),
    triple("-K_X", Idx::None, &[(-1, K)]),
    triple("-K_X-D_i", Idx::I(1, 9), &[(-1, K), (-1, Di)]),
    triple("-K_X-G", Idx::None, &[(-1, K), (-1, F)]),
    triple("-K_X-S-2G", Idx::None, &[(-1, K), (-1, S), (-2, F)]),
    triple("-K_X-S-3G", Idx::None, &[(-1, K), (-1, S), (-3, F)]),
    triple("-K_X-G+D_i", Idx::I(1, 9), &[(-1, K), (-1, F), (1, Di)]),
    triple("-K_X-S-2G+D_i", Idx::I(1, 9), &[(-1, K), (-1, S), (-2, F), (1, Di)]),
    triple("-K_X-S-3G+D_i", Idx::I(1, 9), &[(-1, K), (-1, S), (-3, F), (1, Di)]),
    triple("-K_X-S-G", Idx::None, &[(-1, K), (-1, S), (-1, F)]),
];

fn build(
    setup: &Setup,
    terms: &[(i64, Sym)],
    (i, j): (Option<usize>, Option<usize>),
) -> Result<DivisorClass, PicardError> {
    let sy: &Symbols = &setup.symbols;
    let pick = |s: Sym| -> &DivisorClass {
        match s {
            Sym::K => &sy.k,
            Sym::F => &sy.f,
            Sym::S => sy.s(),
            Sym::Di => sy.d(i.expect("row uses i")),
            Sym::Dj => sy.d(j.expect("row uses j")),
            Sym::D(k) => sy.d(k),
        }
    };
    let pairs: Vec<(i64, &DivisorClass)> = terms.iter().map(|&(c, s)| (c, pick(s))).collect();
    setup.lattice.linear(&pairs)
}

/// Groups of exceptional curves that share a coefficient in printed classes.
fn groups(surface: SurfaceKind) -> Vec<(&'static str, Vec<usize>)> {
    match surface {
        SurfaceKind::BlowupP2 { points: 10 } => {
            vec![("E'_1", vec![1, 2]), ("E'_3", (3..=7).collect()), ("E'_8", (8..=10).collect())]
        }
        s => vec![("ΣE", (1..=s.n_points()).collect())],
    }
}

fn push_term(out: &mut String, c: i64, sym: &str) {
    if c == 0 {
        return;
    }
    let sign = if c < 0 { "-" } else if out.is_empty() { "" } else { "+" };
    let mag = c.unsigned_abs();
    if mag == 1 {
        let _ = write!(out, "{sign}{sym}");
    } else {
        let _ = write!(out, "{sign}{mag}{sym}");
    }
}

/// Prints a class with grouped exceptional curves, naming the curves at the
/// row indices `i`, `j` symbolically.
pub fn grouped_expression(d: &DivisorClass, i: Option<usize>, j: Option<usize>) -> String {
    let surface = d.surface();
    let mut out = String::new();
    let base_names: &[&str] = if surface.is_plane() { &["H"] } else { &["C", "F"] };
    for (c, name) in d.base().iter().zip(base_names) {
        push_term(&mut out, *c, name);
    }
    let vars: Vec<(&str, usize)> = [("E_i", i), ("E_j", j)].into_iter().filter_map(|(n, v)| Some((n, v?))).collect();
    for (sym, members) in groups(surface) {
        let generic: Vec<usize> = members.iter().copied().filter(|m| vars.iter().all(|v| v.1 != *m)).collect();
        let shared = generic.first().map_or(0, |&m| d.exceptional(m));
        push_term(&mut out, shared, sym);
        for &m in &generic {
            push_term(&mut out, d.exceptional(m) - shared, &format!("E_{m}"));
        }
        for &(name, v) in &vars {
            if members.contains(&v) {
                push_term(&mut out, d.exceptional(v) - shared, name);
            }
        }
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

fn distinct_expressions(exprs: impl IntoIterator<Item = String>) -> String {
    let mut seen = Vec::new();
    for e in exprs {
        if !seen.contains(&e) {
            seen.push(e);
        }
    }
    seen.join(" | ")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VanishingInstance {
    pub i: Option<usize>,
    pub j: Option<usize>,
    pub divisor: DivisorClass,
    pub h0: u64,
    pub rule: String,
    pub genericity: Genericity,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VanishingRow {
    pub label: String,
    pub indices: String,
    /// False for classes the checks need but the published table omits.
    pub in_table: bool,
    pub reason: Option<Reason>,
    pub expression: String,
    pub instances: Vec<VanishingInstance>,
    pub all_vanish: bool,
    pub rules_match: bool,
}

impl VanishingRow {
    pub fn pass(&self) -> bool {
        self.all_vanish && self.rules_match
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CohomologyInstance {
    pub i: Option<usize>,
    pub divisor: DivisorClass,
    pub chi: i64,
    pub h0: u64,
    pub h1: u64,
    pub h2: u64,
    pub exact: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CohomologyRow {
    pub label: String,
    pub indices: String,
    pub expression: String,
    /// `(chi, h0, h1, h2)`, shared by every instance when `uniform`.
    pub values: [i64; 4],
    pub uniform: bool,
    pub exact: bool,
    pub instances: Vec<CohomologyInstance>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TableRows {
    Vanishing(Vec<VanishingRow>),
    Cohomology(Vec<CohomologyRow>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableDocument {
    pub schema: String,
    pub table: String,
    pub caption: String,
    pub surface: SurfaceKind,
    pub prime: u32,
    pub pointset: String,
    pub rows: TableRows,
    /// Every row vanishes with a matching rule, or every triple is exact.
    pub pass: bool,
}

fn instances_of(setup: &Setup, def: &RowDef) -> Result<Vec<((Option<usize>, Option<usize>), DivisorClass)>, PicardError> {
    def.idx.instances().into_iter().map(|ij| Ok((ij, build(setup, def.terms, ij)?))).collect()
}

/// The classes of one table row, one per index assignment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowClasses {
    pub label: &'static str,
    pub in_table: bool,
    pub instances: Vec<((Option<usize>, Option<usize>), DivisorClass)>,
}

/// Rows in table order, followed by the supplementary rows.
pub fn row_classes(setup: &Setup, id: TableId) -> Result<Vec<RowClasses>, PicardError> {
    let tagged = defs(id).iter().map(|d| (d, true)).chain(supplement(id).iter().map(|d| (d, false)));
    tagged
        .map(|(def, in_table)| Ok(RowClasses { label: def.label, in_table, instances: instances_of(setup, def)? }))
        .collect()
}

/// Every class a table mentions, row by row.
pub fn table_classes(setup: &Setup, id: TableId, include_supplement: bool) -> Result<Vec<DivisorClass>, PicardError> {
    Ok(row_classes(setup, id)?
        .into_iter()
        .filter(|r| include_supplement || r.in_table)
        .flat_map(|r| r.instances.into_iter().map(|(_, d)| d))
        .collect())
}

fn defs(id: TableId) -> &'static [RowDef] {
    match id {
        TableId::Table1 => TABLE1,
        TableId::Table2 => TABLE2,
        TableId::Table3 => TABLE3,
    }
}

fn supplement(id: TableId) -> &'static [RowDef] {
    match id {
        TableId::Table1 => TABLE1_SUPPLEMENT,
        _ => &[],
    }
}

pub fn emit_table(id: TableId, opts: &RunOptions, store: &dyn H0Store) -> Result<TableDocument, ScenarioError> {
    let setup = setup(id.scenario(), opts)?;
    let gate = MemoryGate::new(opts.memory_budget());
    let rows = opts.install(|| -> Result<TableRows, ScenarioError> {
        let engine = setup.engine(store, &gate, opts);
        match id {
            TableId::Table3 => cohomology_rows(&setup, &engine).map(TableRows::Cohomology),
            _ => vanishing_rows(&setup, &engine, id).map(TableRows::Vanishing),
        }
    })??;
    let pass = match &rows {
        TableRows::Vanishing(r) => r.iter().all(VanishingRow::pass),
        TableRows::Cohomology(r) => r.iter().all(|r| r.exact && r.uniform),
    };
    Ok(TableDocument {
        schema: SCHEMA.into(),
        table: id.as_str().into(),
        caption: id.caption().into(),
        surface: setup.lattice.kind(),
        prime: setup.points.prime(),
        pointset: setup.points.id(),
        rows,
        pass,
    })
}

fn vanishing_rows(
    setup: &Setup,
    engine: &pv_core::vanishing::H0Engine<'_>,
    id: TableId,
) -> Result<Vec<VanishingRow>, ScenarioError> {
    let certs = certify_all(engine, &table_classes(setup, id, true)?)?;
    let mut rows = Vec::new();
    for (def, in_table) in defs(id).iter().map(|d| (d, true)).chain(supplement(id).iter().map(|d| (d, false))) {
        let inst = instances_of(setup, def)?;
        let instances: Vec<VanishingInstance> = inst
            .iter()
            .map(|((i, j), d)| {
                let c = &certs[d];
                VanishingInstance {
                    i: *i,
                    j: *j,
                    divisor: d.clone(),
                    h0: c.h0,
                    rule: c.rule.label().into(),
                    genericity: c.genericity,
                }
            })
            .collect();
        let rules_match = def.reason.is_none_or(|r| inst.iter().all(|(_, d)| r.matches(&certs[d].rule)));
        rows.push(VanishingRow {
            label: def.label.into(),
            indices: def.idx.describe(),
            in_table,
            reason: def.reason,
            expression: distinct_expressions(inst.iter().map(|((i, j), d)| grouped_expression(d, *i, *j))),
            all_vanish: instances.iter().all(|x| x.h0 == 0),
            instances,
            rules_match,
        });
    }
    Ok(rows)
}

fn cohomology_rows(setup: &Setup, engine: &pv_core::vanishing::H0Engine<'_>) -> Result<Vec<CohomologyRow>, ScenarioError> {
    let mut jobs = Vec::new();
    for def in TABLE3 {
        jobs.extend(instances_of(setup, def)?.into_iter().map(|(ij, d)| (ij.0, d)));
    }
    let unique: Vec<DivisorClass> = jobs.iter().map(|(_, d)| d.clone()).collect::<BTreeSet<_>>().into_iter().collect();
    let triples: Vec<CohomologyTriple> =
        unique.par_iter().map(|d| engine.cohomology_triple(d)).collect::<Result<_, _>>()?;
    let lookup = |d: &DivisorClass| &triples[unique.binary_search(d).expect("class was scheduled")];

    let mut rows = Vec::new();
    for def in TABLE3 {
        let inst = instances_of(setup, def)?;
        let instances: Vec<CohomologyInstance> = inst
            .iter()
            .map(|((i, _), d)| {
                let t = lookup(d);
                CohomologyInstance { i: *i, divisor: d.clone(), chi: t.chi, h0: t.h0, h1: t.h1, h2: t.h2, exact: t.is_exact() }
            })
            .collect();
        let first = &instances[0];
        let values = [first.chi, first.h0 as i64, first.h1 as i64, first.h2 as i64];
        let uniform = instances.iter().all(|x| [x.chi, x.h0 as i64, x.h1 as i64, x.h2 as i64] == values);
        rows.push(CohomologyRow {
            label: def.label.into(),
            indices: def.idx.describe(),
            expression: distinct_expressions(inst.iter().map(|((i, j), d)| grouped_expression(d, *i, *j))),
            values,
            uniform,
            exact: instances.iter().all(|x| x.exact),
            instances,
        });
    }
    Ok(rows)
}

impl TableDocument {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("table serializes") + "\n"
    }

    pub fn to_markdown(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "**{}** ({} points over F_{}).\n", self.caption, self.pointset, self.prime);
        match &self.rows {
            TableRows::Vanishing(rows) => {
                let grouped = matches!(self.surface, SurfaceKind::BlowupP2 { points: 10 });
                let header = if grouped { "Expression in (H, E_i)" } else { "Divisor in (C, F, E_i)" };
                let _ = writeln!(s, "| Divisor | (i,j) | {header} | Reason for vanishing | h0 | rule | check |");
                let _ = writeln!(s, "|---|---|---|---|---|---|---|");
                for r in rows {
                    let reason = r.reason.map_or("(not tabulated)".to_string(), |x| reason_text(x).into());
                    let h0s: BTreeSet<u64> = r.instances.iter().map(|x| x.h0).collect();
                    let rules: BTreeSet<&str> = r.instances.iter().map(|x| x.rule.as_str()).collect();
                    let _ = writeln!(
                        s,
                        "| {} | {} | {} | {reason} | {} | {} | {} |",
                        r.label,
                        r.indices,
                        r.expression,
                        h0s.iter().map(u64::to_string).collect::<Vec<_>>().join(","),
                        rules.into_iter().collect::<Vec<_>>().join(","),
                        if r.pass() { "ok" } else { "FAIL" }
                    );
                }
                if grouped {
                    let _ = writeln!(s, "\nE'_1 = E_1+E_2, E'_3 = E_3+...+E_7, E'_8 = E_8+E_9+E_10.");
                }
            }
            TableRows::Cohomology(rows) => {
                let _ = writeln!(s, "| Divisor | chi | h0 | h1 | h2 | check |\n|---|---|---|---|---|---|");
                for r in rows {
                    let [chi, h0, h1, h2] = r.values;
                    let ok = if r.exact && r.uniform { "ok" } else { "FAIL" };
                    let _ = writeln!(s, "| {} | {chi} | {h0} | {h1} | {h2} | {ok} |", r.label);
                }
            }
        }
        s
    }
}

fn reason_text(r: Reason) -> &'static str {
    match r {
        Reason::Degree => "degree",
        Reason::Exceptional => "exceptional",
        Reason::Interpolation => "interpolation",
    }
}
