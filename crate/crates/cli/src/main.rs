use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use pv::cache::DiskStore;
use pv::report::Verdict;
use pv::scenario::{resolve_points, run_scenario, RunOptions, ScenarioId};
use pv::tables::{emit_table, TableId};
use pv::fixtures;
use pv_core::fatpoints::{sample_points, PointSet};
use pv_core::ffrank::{rank_with, DenseMatrixFp, RankOptions};
use pv_core::picard::{SurfaceKind, SurfaceLattice};
use pv_core::vanishing::{EngineOptions, H0Engine, H0Store, MemoryStore};
use rand_chacha::rand_core::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Parser)]
#[command(name = "pv", version, about = "Exact verification of exceptional collections on blowups of P^2 and F_n")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Md,
}

#[derive(Args)]
struct Common {
    /// Prime field for interpolation.
    #[arg(long)]
    prime: Option<u32>,
    /// Sample points with this seed instead of the bundled ones.
    #[arg(long)]
    seed: Option<u64>,
    /// Point-set JSON file.
    #[arg(long)]
    points: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "md")]
    format: Format,
    /// Worker threads (default: all cores).
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Refuse interpolation above this monomial degree.
    #[arg(long)]
    max_degree: Option<u64>,
    /// Byte budget shared by concurrent eliminations.
    #[arg(long)]
    memory_budget: Option<u64>,
    /// Include wall-clock time in the output.
    #[arg(long)]
    timing: bool,
    /// Write the document here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario: p2-11, f2-9, p2-10-alt, p2-10-krah or f4-9-control.
    Verify {
        scenario: String,
        #[command(flatten)]
        common: Common,
    },
    /// Emit table1, table2 or table3.
    Table {
        table: String,
        #[command(flatten)]
        common: Common,
    },
    /// Certify h^0 of one class, e.g. `h0 p2:11 "[10,-3,...]"`.
    H0 {
        surface: String,
        divisor: String,
        #[command(flatten)]
        common: Common,
    },
    #[command(subcommand)]
    Bench(Bench),
}

#[derive(Subcommand)]
enum Bench {
    /// Time the rank of a random square matrix.
    Rank {
        #[arg(long, default_value_t = 4000)]
        size: usize,
        #[arg(long, default_value_t = 997)]
        prime: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        threads: usize,
        #[arg(long, value_enum, default_value = "md")]
        format: Format,
    },
}

fn read_points(path: &PathBuf) -> Result<PointSet> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    fixtures::parse(&text).with_context(|| format!("parsing {}", path.display()))
}

impl Common {
    fn options(&self) -> Result<RunOptions> {
        Ok(RunOptions {
            prime: self.prime,
            seed: self.seed,
            points: self.points.as_ref().map(read_points).transpose()?,
            max_degree: self.max_degree,
            threads: self.threads,
            memory_budget: self.memory_budget,
            timing: self.timing,
        })
    }

    fn emit(&self, json: String, md: String) -> Result<()> {
        let text = match self.format {
            Format::Json => json,
            Format::Md => md,
        };
        match &self.out {
            Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display())),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }
}

fn store_for(points: &PointSet) -> Result<Box<dyn H0Store>> {
    Ok(match DiskStore::from_env(points).context("opening PV_CACHE_DIR")? {
        Some(disk) => Box::new(disk),
        None => Box::new(MemoryStore::default()),
    })
}

fn verify(scenario: &str, common: &Common) -> Result<bool> {
    let id: ScenarioId = scenario.parse()?;
    let mut opts = common.options()?;
    let points = resolve_points(id, &opts)?;
    let store = store_for(&points)?;
    opts.points = Some(points);
    let report = run_scenario(id, &opts, store.as_ref())?;
    for g in report.failed_goldens() {
        eprintln!("FAIL {}: expected {}, observed {} (claim: {})", g.name, g.expected, g.observed, g.claim);
    }
    common.emit(report.to_json(), report.to_markdown())?;
    Ok(report.verdict == Verdict::Pass)
}

fn table(name: &str, common: &Common) -> Result<bool> {
    let id: TableId = name.parse().map_err(anyhow::Error::msg)?;
    let mut opts = common.options()?;
    let points = resolve_points(id.scenario(), &opts)?;
    let store = store_for(&points)?;
    opts.points = Some(points);
    let started = Instant::now();
    let doc = emit_table(id, &opts, store.as_ref())?;
    if common.timing {
        eprintln!("{} computed in {:.1} s", id.as_str(), started.elapsed().as_secs_f64());
    }
    common.emit(doc.to_json(), doc.to_markdown())?;
    Ok(doc.pass)
}

fn h0(surface: &str, divisor: &str, common: &Common) -> Result<bool> {
    let kind: SurfaceKind = surface.parse().map_err(|e| anyhow::anyhow!("{e:?}"))?;
    let lattice = SurfaceLattice::new(kind)?;
    let coeffs: Vec<i64> = serde_json::from_str(divisor).context("divisor must be a JSON integer array")?;
    let d = lattice.class(coeffs)?;
    let opts = common.options()?;
    let points = match opts.points {
        Some(ps) => ps,
        None => sample_points(kind, kind.n_points(), opts.prime.unwrap_or(997), opts.seed.unwrap_or(0))?,
    };
    if points.surface() != kind {
        bail!("point set is for {}, divisor lives on {kind}", points.surface());
    }
    let store = store_for(&points)?;
    let engine = H0Engine::new(
        &lattice,
        Some(&points),
        store.as_ref(),
        EngineOptions { max_degree: opts.max_degree, rank: RankOptions { threads: opts.threads, ..Default::default() } },
    );
    let cert = engine.h0(&d)?;
    let json = serde_json::to_string_pretty(&cert)? + "\n";
    let md = format!("h0({}) = {} via {} ({:?})\n", cert.divisor, cert.h0, cert.rule.label(), cert.genericity);
    common.emit(json, md)?;
    Ok(true)
}

fn bench_rank(size: usize, prime: u32, seed: u64, threads: usize, format: Format) -> Result<bool> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = DenseMatrixFp::from_fn(prime, size, size, |_, _| rng.next_u64())?;
    let started = Instant::now();
    let rank = rank_with(&m, &RankOptions { threads, ..Default::default() })?;
    let secs = started.elapsed().as_secs_f64();
    let within = secs < 60.0;
    match format {
        Format::Json => println!(
            "{}",
            serde_json::json!({"size": size, "prime": prime, "seed": seed, "threads": threads, "rank": rank, "seconds": secs, "target_seconds": 60, "within_target": within})
        ),
        Format::Md => println!(
            "rank of a random {size}x{size} matrix over F_{prime}: {rank} in {secs:.2} s with {threads} thread(s) (target < 60 s: {})",
            if within { "met" } else { "missed" }
        ),
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Verify { scenario, common } => verify(scenario, common),
        Command::Table { table: t, common } => table(t, common),
        Command::H0 { surface, divisor, common } => h0(surface, divisor, common),
        Command::Bench(Bench::Rank { size, prime, seed, threads, format }) => {
            bench_rank(*size, *prime, *seed, *threads, *format)
        }
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
