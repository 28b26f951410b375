//! Acceptance run. Prints one `PASS`/`FAIL` line per criterion straight to
//! stdout, so the lines show up even when the harness captures output.

#[path = "../../core/tests/properties.rs"]
mod properties;

use std::io::Write as _;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use pv::report::{CheckKind, VerificationReport};
use pv::scenario::{alternate_plane, run_scenario, setup, RunOptions, ScenarioId};
use pv::tables::{emit_table, Reason, TableDocument, TableId, TableRows};
use pv_core::ffrank::{rank_with, DenseMatrixFp, RankOptions};
use pv_core::heights::{minimize_chains, pseudoheight_from_homs, Fullness, Height, HeightClaim, RheightTable};
use pv_core::hochschild::Hh2Statement;
use pv_core::vanishing::MemoryStore;
use pv_oracles as oracle;
use rand_chacha::rand_core::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TABLE2_BUDGET: Duration = Duration::from_secs(5 * 60);
const TABLE1_BUDGET: Duration = Duration::from_secs(60 * 60);
const RANK_TARGET: Duration = Duration::from_secs(60);

/// Reason column of the first table, `M` for interpolation and `d` for degree.
const TABLE1_REASONS: &str = "MdMdMdMdMdMdMdMddMddMMdddMMddMddddMddd";
/// Reason column of the second table, `x` for exceptional.
const TABLE2_REASONS: &str = "MdMdMdMdMdMdMdxdMddddddddd";

/// `(row, chi, h0, h1, h2)` as printed in the cohomology table.
const TABLE3: [(&str, [i64; 4]); 17] = [
    ("D_i", [1, 0, 0, 1]),
    ("G", [2, 0, 0, 2]),
    ("G-D_i", [1, 0, 0, 1]),
    ("S+G", [2, 0, 0, 2]),
    ("S+2G", [4, 0, 0, 4]),
    ("S+3G", [6, 0, 0, 6]),
    ("S+2G-D_i", [3, 0, 0, 3]),
    ("S+3G-D_i", [5, 0, 0, 5]),
    ("-K_X", [0, 0, 0, 0]),
    ("-K_X-D_i", [-2, 0, 2, 0]),
    ("-K_X-G", [-3, 0, 3, 0]),
    ("-K_X-S-2G", [-5, 0, 5, 0]),
    ("-K_X-S-3G", [-7, 0, 7, 0]),
    ("-K_X-G+D_i", [-2, 0, 2, 0]),
    ("-K_X-S-2G+D_i", [-4, 0, 4, 0]),
    ("-K_X-S-3G+D_i", [-6, 0, 6, 0]),
    ("-K_X-S-G", [-3, 0, 3, 0]),
];

struct Line {
    id: u8,
    title: &'static str,
    /// `None` for soft targets, which are reported but never fail the run.
    pass: Option<bool>,
    detail: String,
}

fn say(line: &Line) {
    let tag = match line.pass {
        Some(true) => "PASS",
        Some(false) => "FAIL",
        None => "SOFT",
    };
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "[{tag}] criterion {:>2}: {} ({})", line.id, line.title, line.detail);
    let _ = out.flush();
}

fn reason_code(r: Option<Reason>) -> char {
    match r {
        Some(Reason::Degree) => 'd',
        Some(Reason::Interpolation) => 'M',
        Some(Reason::Exceptional) => 'x',
        None => '-',
    }
}

/// Checks a vanishing table row by row against the printed reason column.
fn vanishing_table(doc: &TableDocument, reasons: &str, pointset: &str) -> (bool, String) {
    let TableRows::Vanishing(rows) = &doc.rows else {
        return (false, "not a vanishing table".into());
    };
    let printed: Vec<_> = rows.iter().filter(|r| r.in_table).collect();
    let column: String = printed.iter().map(|r| reason_code(r.reason)).collect();
    let bad: Vec<&str> = rows.iter().filter(|r| !r.pass()).map(|r| r.label.as_str()).collect();
    let instances: usize = rows.iter().map(|r| r.instances.len()).sum();
    let ok = column == reasons && bad.is_empty() && doc.pass && doc.pointset == pointset;
    let detail = format!(
        "{} printed rows + {} supplementary, {instances} instances, reasons {}, failing rows {bad:?}, points {}",
        printed.len(),
        rows.len() - printed.len(),
        if column == reasons { "match" } else { "differ" },
        doc.pointset
    );
    (ok, detail)
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let started = Instant::now();
    let v = f();
    (v, started.elapsed())
}

fn height(h: Option<Height>) -> String {
    h.map_or("missing".into(), |h| h.to_string())
}

fn dp_matches_exhaustive(table: &RheightTable) -> bool {
    let Ok((dp, _)) = minimize_chains(table) else { return false };
    let brute = oracle::exhaustive_chain_min(
        table.len(),
        |i, j| table.forward(i, j).value.finite(),
        |s, c| table.closer(s, c).value.finite(),
    );
    dp.finite() == brute
}

fn criterion1(store: &MemoryStore) -> Line {
    let (doc, took) = timed(|| emit_table(TableId::Table2, &RunOptions::default(), store));
    let (pass, detail) = match doc {
        Ok(doc) => {
            let (ok, d) = vanishing_table(&doc, TABLE2_REASONS, "paper-f2-997");
            (ok && doc.prime == 997 && took < TABLE2_BUDGET, format!("{d}, {:.1} s of {} s", took.as_secs_f64(), TABLE2_BUDGET.as_secs()))
        }
        Err(e) => (false, e.to_string()),
    };
    Line { id: 1, title: "second table reproduced", pass: Some(pass), detail }
}

fn criterion2(store: &MemoryStore, threads: usize) -> Line {
    let opts = RunOptions { threads, ..Default::default() };
    let (doc, took) = timed(|| emit_table(TableId::Table1, &opts, store));
    let (pass, detail) = match doc {
        Ok(doc) => {
            let (ok, d) = vanishing_table(&doc, TABLE1_REASONS, "paper-p2-997");
            let TableRows::Vanishing(rows) = &doc.rows else { unreachable!() };
            let top = rows
                .iter()
                .flat_map(|r| &r.instances)
                .filter(|x| x.rule == "interpolation")
                .map(|x| x.divisor.base()[0].unsigned_abs())
                .max()
                .unwrap_or(0);
            let monomials = (top + 1) * (top + 2) / 2;
            (
                ok && doc.prime == 997 && top == 158 && took < TABLE1_BUDGET,
                format!(
                    "{d}, top interpolated degree {top} ({monomials} monomials), {:.1} s of {} s on {threads} thread(s)",
                    took.as_secs_f64(),
                    TABLE1_BUDGET.as_secs()
                ),
            )
        }
        Err(e) => (false, e.to_string()),
    };
    Line { id: 2, title: "first table reproduced", pass: Some(pass), detail }
}

fn criterion3(store: &MemoryStore) -> Line {
    let (pass, detail) = match emit_table(TableId::Table3, &RunOptions::default(), store) {
        Ok(TableDocument { rows: TableRows::Cohomology(rows), .. }) => {
            let mismatched: Vec<&str> = TABLE3
                .iter()
                .filter(|(label, values)| {
                    !rows.iter().any(|r| r.label == *label && r.values == *values && r.exact && r.uniform)
                })
                .map(|(label, _)| *label)
                .collect();
            let h1: Vec<i64> = rows.iter().map(|r| r.values[2]).filter(|&v| v > 0).collect();
            (
                mismatched.is_empty() && rows.len() == TABLE3.len(),
                format!("{} of {} rows exact, nonzero h1 {h1:?}, mismatched {mismatched:?}", rows.len() - mismatched.len(), TABLE3.len()),
            )
        }
        Ok(_) => (false, "not a cohomology table".into()),
        Err(e) => (false, e.to_string()),
    };
    Line { id: 3, title: "cohomology table reproduced", pass: Some(pass), detail }
}

fn criterion4(r: &VerificationReport) -> Line {
    let h = r.heights.as_ref();
    let orth = r.orthogonality.as_ref().is_some_and(|o| o.completely_orthogonal && o.pairs_checked == 110);
    let chain_len = h.map(|h| h.minimizing_chain.len().saturating_sub(1));
    let pass = r.exceptional
        && r.collection.len() == 14
        && orth
        && h.is_some_and(|h| {
            h.exact
                && h.pseudoheight_ac == Height::Finite(1)
                && h.pseudoheight == Height::Finite(3)
                && h.height_claim == HeightClaim::EqualsPseudoheight
                && h.fullness == Fullness::NotFull
        })
        && chain_len == Some(0)
        && r.hh2.as_ref().is_some_and(|c| c.statement == Hh2Statement::LowerBound(14));
    let detail = format!(
        "exceptional {}, orthogonal {orth}, ac pseudoheight {}, pseudoheight {}, chain length {chain_len:?}, HH2 {:?}",
        r.exceptional,
        height(h.map(|h| h.pseudoheight_ac)),
        height(h.map(|h| h.pseudoheight)),
        r.hh2.as_ref().map(|c| c.statement)
    );
    Line { id: 4, title: "eleven-point phantom", pass: Some(pass), detail }
}

fn criterion5(r: &VerificationReport) -> Line {
    let h = r.heights.as_ref();
    let pass = r.exceptional
        && h.is_some_and(|h| h.exact && h.pseudoheight_ac == Height::Finite(2) && h.pseudoheight == Height::Finite(4))
        && r.hh2.as_ref().is_some_and(|c| c.statement == Hh2Statement::Exact(13));
    let detail = format!(
        "exceptional {}, ac pseudoheight {}, pseudoheight {}, HH2 {:?}",
        r.exceptional,
        height(h.map(|h| h.pseudoheight_ac)),
        height(h.map(|h| h.pseudoheight)),
        r.hh2.as_ref().map(|c| c.statement)
    );
    Line { id: 5, title: "Hirzebruch phantom", pass: Some(pass), detail }
}

fn criterion6(r: &VerificationReport) -> Line {
    let closed_forms = (|| -> Result<bool, Box<dyn std::error::Error>> {
        let s = setup(ScenarioId::PlaneAlternate, &RunOptions::default())?;
        let lat = &s.lattice;
        let v = lat.class([vec![-3, 2, 2, 1, 1, 1, 1, 1], vec![0; 3]].concat())?;
        let w = lat.class([vec![-1], vec![0; 7], vec![1; 3]].concat())?;
        let (pv, pw) = alternate_plane(lat)?;
        let (h, e1) = (lat.h()?, lat.e(1)?);
        let ih = s.involution.apply(lat, &h)?;
        let ie1 = s.involution.apply(lat, &e1)?;
        Ok(pv == v
            && pw == w
            && ih == lat.linear(&[(1, &h), (18, &v), (26, &w)])?
            && ie1 == lat.linear(&[(1, &e1), (8, &v), (12, &w)])?)
    })()
    .unwrap_or(false);
    let not_full = r.heights.as_ref().is_some_and(|h| h.fullness == Fullness::NotFull);
    let pass = r.exceptional && r.all_homs_vanish == Some(true) && not_full && closed_forms;
    let detail = format!(
        "exceptional {}, all homs vanish {:?}, not full {not_full}, closed forms for the reflections of H and E1 {}",
        r.exceptional,
        r.all_homs_vanish,
        if closed_forms { "match" } else { "differ" }
    );
    Line { id: 6, title: "alternate reflection", pass: Some(pass), detail }
}

fn criterion7(r: &VerificationReport) -> Line {
    let not_full = r.heights.as_ref().is_some_and(|h| h.fullness == Fullness::NotFull);
    let pass = r.exceptional
        && not_full
        && r.h1_tangent == Some(12)
        && r.hh2.as_ref().is_some_and(|c| c.statement == Hh2Statement::Exact(12));
    let detail = format!(
        "exceptional {}, not full {not_full}, h1(T_X) {:?}, HH2 {:?}",
        r.exceptional,
        r.h1_tangent,
        r.hh2.as_ref().map(|c| c.statement)
    );
    Line { id: 7, title: "ten-point regression", pass: Some(pass), detail }
}

fn criterion8(r: &VerificationReport) -> Line {
    let s = setup(ScenarioId::Hirzebruch4Control, &RunOptions::default()).expect("control setup");
    let minus_g = s.symbols.f.neg().expect("negation").to_string();
    let h0 = r
        .exceptionality_checks
        .iter()
        .find(|c| c.kind == CheckKind::Hom && c.divisor == minus_g)
        .map(|c| c.h0);
    let pass = r.prime == 65537 && !r.exceptional && h0.is_some_and(|v| v >= 1);
    let detail = format!(
        "over F_{}, exceptional {}, h0(-G) = {} (8 expected, at least 1 required)",
        r.prime,
        r.exceptional,
        h0.map_or("missing".into(), |v| v.to_string())
    );
    Line { id: 8, title: "negative control", pass: Some(pass), detail }
}

fn criterion9(scenario_tables: &[(&str, RheightTable)]) -> Line {
    let suites: [(&str, fn()); 12] = [
        ("involutions", properties::involutions_are_integral_isometric_and_fix_k),
        ("bilinearity", properties::pairing_is_symmetric_and_bilinear),
        ("reflected collections", properties::reflected_collections_stay_numerically_exceptional),
        ("plane oracle", properties::interpolation_agrees_with_derivative_oracle_on_small_plane_instances),
        ("hirzebruch oracle", properties::interpolation_agrees_with_derivative_oracle_on_hirzebruch_instances),
        ("reduction", properties::reduction_preserves_h0_against_brute_force),
        ("serre duality", properties::serre_duality_matches_direct_interpolation),
        ("sampling", properties::sampling_is_seed_deterministic_and_multiplicity_monotone),
        ("rank vs naive", properties::rank_agrees_with_naive_elimination_up_to_64),
        ("rank invariance", properties::rank_is_transpose_and_row_operation_invariant),
        ("chain dp vs exhaustive", properties::chain_dp_agrees_with_exhaustive_oracle_on_random_tables),
        ("d_critical", properties::d_critical_matches_independent_section_count),
    ];
    let mut failed: Vec<&str> = suites
        .iter()
        .filter(|(_, f)| catch_unwind(AssertUnwindSafe(f)).is_err())
        .map(|(name, _)| *name)
        .collect();
    failed.extend(scenario_tables.iter().filter(|(_, t)| !dp_matches_exhaustive(t)).map(|(name, _)| *name));
    let total = suites.len() + scenario_tables.len();
    let detail = format!("{} of {total} suites clean, failures {failed:?}", total - failed.len());
    Line { id: 9, title: "property suites", pass: Some(failed.is_empty()), detail }
}

fn criterion10() -> Line {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let m = DenseMatrixFp::from_fn(997, 4000, 4000, |_, _| rng.next_u64()).expect("matrix");
    let (rank, took) = timed(|| rank_with(&m, &RankOptions { threads: 1, ..Default::default() }));
    let detail = format!(
        "rank {} of a random 4000x4000 matrix over F_997 in {:.1} s on one thread, target {} s {}",
        rank.map_or_else(|e| e.to_string(), |r| r.to_string()),
        took.as_secs_f64(),
        RANK_TARGET.as_secs(),
        if took < RANK_TARGET { "met" } else { "missed" }
    );
    Line { id: 10, title: "rank performance", pass: None, detail }
}

fn scenario(id: ScenarioId, store: &MemoryStore) -> VerificationReport {
    run_scenario(id, &RunOptions::default(), store).unwrap_or_else(|e| panic!("{id}: {e}"))
}

#[test]
fn acceptance() {
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get()).min(8);
    // Stores are keyed by class only, so each one serves a single point set.
    let plane_store = MemoryStore::default();
    let scroll_store = MemoryStore::default();

    let mut lines = Vec::new();
    let mut record = |line: Line| {
        say(&line);
        lines.push(line);
    };

    record(criterion1(&scroll_store));
    record(criterion2(&plane_store, threads));
    record(criterion3(&scroll_store));

    let eleven = scenario(ScenarioId::Plane11, &MemoryStore::default());
    record(criterion4(&eleven));
    let scroll = scenario(ScenarioId::Hirzebruch2, &scroll_store);
    record(criterion5(&scroll));
    let alternate = scenario(ScenarioId::PlaneAlternate, &plane_store);
    record(criterion6(&alternate));
    let ten = scenario(ScenarioId::PlaneCanonical10, &MemoryStore::default());
    record(criterion7(&ten));
    let control = scenario(ScenarioId::Hirzebruch4Control, &MemoryStore::default());
    record(criterion8(&control));

    let mut tables = Vec::new();
    for (name, r) in [("p2-11 chains", &eleven), ("f2-9 chains", &scroll), ("p2-10-krah chains", &ten)] {
        tables.push((name, r.heights.as_ref().map(|h| h.table.clone()).expect("heights computed")));
    }
    tables.push(("p2-10-alt chains", pseudoheight_from_homs(alternate.collection.len(), true).expect("table").table));
    record(criterion9(&tables));
    record(criterion10());

    let failed: Vec<u8> = lines.iter().filter(|l| l.pass == Some(false)).map(|l| l.id).collect();
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
