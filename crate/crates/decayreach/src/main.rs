use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use decayreach::bench::{run_bench, write_csv, BenchConfig};
use decayreach::gen::{generate, GenConfig, DEFAULT_DENSITY_PER_KM2};
use decayreach::report::{RunReport, TopKReport};
use decayreach::store::{preprocess, IndexPackage, PreprocessParams};
use decayreach::trajfile::{read_csv, read_dataset, write_dataset};
use decayreach::tune::{prefix_ticks, tune, TuneSpace};
use decayreach::verify::{check_decay, check_topk, reference_meetings, VerifySummary};
use decayreach::workload::{decay_queries, topk_queries, DecayWorkload, TopKWorkload};
use decayreach::Error;
use decayreach_core::query::{answer, answer_baseline};
use decayreach_core::topk::{answer_topk_with, TopKOptions};
use decayreach_core::{DecayParams, DecayQuery, ObjectId, TimeGrid, TopKQuery, TrajectoryDataset};

const EXIT_USAGE: u8 = 1;
const EXIT_DATA: u8 = 2;
const EXIT_MISMATCH: u8 = 3;

#[derive(Parser)]
#[command(
    name = "decayreach",
    version,
    about = "Reachability queries with transfer decay over trajectory data"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic random-walk dataset.
    Generate(GenerateArgs),
    /// Build an index directory from a dataset.
    Preprocess(PreprocessArgs),
    /// Answer one single-target query.
    Query(QueryArgs),
    /// Answer one multi-source top-k query.
    Topk(TopKArgs),
    /// Check random queries against the brute-force oracle.
    Verify(VerifyArgs),
    /// Pick block length and cell side on a dataset prefix.
    Tune(TuneArgs),
    /// Compare weighted I/O against a meetings-only sweep.
    Bench(BenchArgs),
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, default_value_t = 200)]
    objects: u32,
    /// Duration in hours; rounded to whole reporting ticks.
    #[arg(long, conflicts_with = "ticks")]
    hours: Option<f64>,
    #[arg(long)]
    ticks: Option<u32>,
    /// Side of the square area in meters.
    #[arg(long, conflicts_with = "density_per_km2")]
    area_side_m: Option<f64>,
    /// Size the area to hold this many objects per square kilometer
    /// (default 100).
    #[arg(long)]
    density_per_km2: Option<f64>,
    #[arg(long, default_value_t = 6.0)]
    delta_t: f64,
    #[arg(long, default_value_t = 6)]
    tau_per_tick: u32,
    #[arg(long, default_value_t = 1.5)]
    speed_min: f64,
    #[arg(long, default_value_t = 4.0)]
    speed_max: f64,
    #[arg(long, default_value_t = 0.9)]
    moving_fraction: f64,
    #[arg(long, default_value_t = 60.0)]
    trip_min_s: f64,
    #[arg(long, default_value_t = 600.0)]
    trip_max_s: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct DatasetArgs {
    /// Binary trajectory file.
    #[arg(long, conflicts_with = "csv", required_unless_present = "csv")]
    dataset: Option<PathBuf>,
    /// CSV with columns t,object_id,x,y (t in seconds).
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Reporting interval for CSV input.
    #[arg(long, default_value_t = 6.0)]
    delta_t: f64,
    /// Instants per reporting tick for CSV input.
    #[arg(long, default_value_t = 6)]
    tau_per_tick: u32,
}

impl DatasetArgs {
    fn load(&self) -> Result<TrajectoryDataset, Error> {
        match (&self.dataset, &self.csv) {
            (Some(p), _) => read_dataset(p),
            (None, Some(p)) => read_csv(p, self.delta_t, self.tau_per_tick),
            (None, None) => Err(Error::Invalid(
                "either --dataset or --csv is required".into(),
            )),
        }
    }
}

#[derive(Args)]
struct PreprocessArgs {
    #[command(flatten)]
    input: DatasetArgs,
    #[arg(long)]
    out: PathBuf,
    /// Block length in minutes.
    #[arg(
        long,
        conflicts_with = "block_ticks",
        required_unless_present = "block_ticks"
    )]
    block_minutes: Option<f64>,
    /// Block length in reporting ticks.
    #[arg(long)]
    block_ticks: Option<u32>,
    /// Grid cell side in meters.
    #[arg(long, default_value_t = 500.0)]
    grid_m: f64,
    /// Minimum meeting duration in instants.
    #[arg(long, default_value_t = 2)]
    mu: u32,
    #[arg(long, default_value_t = 10.0)]
    d_cont: f64,
}

#[derive(Args)]
struct IntervalArgs {
    /// First instant of the query interval.
    #[arg(long)]
    from: u32,
    /// Last instant of the query interval.
    #[arg(long)]
    to: u32,
}

#[derive(Args)]
struct QueryArgs {
    #[arg(long)]
    index: PathBuf,
    #[arg(long)]
    source: u32,
    #[arg(long)]
    target: u32,
    #[arg(long, default_value_t = 1.0)]
    w: f64,
    #[arg(long)]
    d: f64,
    #[arg(long)]
    nu: f64,
    #[command(flatten)]
    interval: IntervalArgs,
    /// Answer with the meetings-only sweep instead.
    #[arg(long)]
    baseline: bool,
}

#[derive(Args)]
struct TopKArgs {
    #[arg(long)]
    index: PathBuf,
    /// Source as `id:w:d`; repeat for each source.
    #[arg(long = "src", required = true, value_parser = parse_source)]
    sources: Vec<(u32, f64, f64)>,
    #[arg(long)]
    nu: f64,
    #[arg(long)]
    k: usize,
    #[command(flatten)]
    interval: IntervalArgs,
    /// Sweep every block even once the answer is final.
    #[arg(long)]
    no_early_stop: bool,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    index: PathBuf,
    /// The dataset the index was built from.
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long, default_value_t = 500, value_parser = clap::value_parser!(u64).range(1..))]
    queries: u64,
    #[arg(long, default_value_t = 0)]
    topk: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args)]
struct TuneArgs {
    #[command(flatten)]
    input: DatasetArgs,
    /// Candidate block lengths in ticks.
    #[arg(long, value_delimiter = ',', required = true)]
    block_ticks: Vec<u32>,
    /// Candidate cell sides in meters.
    #[arg(long, value_delimiter = ',', required = true)]
    grid_m: Vec<f64>,
    #[arg(long, default_value_t = 2)]
    mu: u32,
    #[arg(long, default_value_t = 10.0)]
    d_cont: f64,
    #[arg(long, default_value_t = 0.05)]
    prefix_fraction: f64,
    #[arg(long, default_value_t = 100)]
    queries: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    index: PathBuf,
    #[arg(long, default_value_t = 200)]
    queries: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_source(s: &str) -> Result<(u32, f64, f64), String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [id, w, d] = parts[..] else {
        return Err(format!("expected id:w:d, got {s:?}"));
    };
    let bad = |what: &str| format!("bad {what} in {s:?}");
    Ok((
        id.parse().map_err(|_| bad("id"))?,
        w.parse().map_err(|_| bad("weight"))?,
        d.parse().map_err(|_| bad("decay"))?,
    ))
}

enum Failure {
    Error(Error),
    Mismatch,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Error(e)
    }
}

impl<E: std::fmt::Display> From<decayreach_core::query::QueryError<E>> for Failure {
    fn from(e: decayreach_core::query::QueryError<E>) -> Self {
        Failure::Error(e.into())
    }
}

type Outcome = Result<(), Failure>;

fn print_json<T: serde::Serialize>(value: &T) -> Outcome {
    let s = serde_json::to_string_pretty(value).map_err(|e| Error::Invalid(e.to_string()))?;
    match writeln!(std::io::stdout().lock(), "{s}") {
        // A reader that closed early (e.g. `head`) is not an error.
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(Error::Io {
            path: "<stdout>".into(),
            source: e,
        }
        .into()),
        _ => Ok(()),
    }
}

fn open_index(path: &Path) -> Result<IndexPackage, Error> {
    IndexPackage::open(path)
}

fn cmd_generate(a: GenerateArgs) -> Outcome {
    let ticks = match (a.hours, a.ticks) {
        (_, Some(t)) => t,
        (Some(h), None) => {
            if !(h > 0.0 && h.is_finite() && a.delta_t > 0.0) {
                return Err(Error::Invalid("--hours and --delta-t must be positive".into()).into());
            }
            (h * 3600.0 / a.delta_t).round() as u32
        }
        (None, None) => GenConfig::default().duration_ticks,
    };
    let cfg = GenConfig {
        n_objects: a.objects,
        area_side: match (a.area_side_m, a.density_per_km2) {
            (Some(side), _) => side,
            (None, Some(rho)) if rho > 0.0 && rho.is_finite() => {
                GenConfig::side_for_density(a.objects, rho)
            }
            (None, Some(_)) => {
                return Err(Error::Invalid("--density-per-km2 must be positive".into()).into())
            }
            (None, None) => GenConfig::side_for_density(a.objects, DEFAULT_DENSITY_PER_KM2),
        },
        duration_ticks: ticks,
        delta_t: a.delta_t,
        tau_per_tick: a.tau_per_tick,
        speed_min: a.speed_min,
        speed_max: a.speed_max,
        moving_fraction: a.moving_fraction,
        trip_duration: (a.trip_min_s, a.trip_max_s),
        seed: a.seed,
    };
    let ds = generate(&cfg)?;
    write_dataset(&ds, &a.out)?;
    println!(
        "wrote {}: objects={} ticks={} moving={} d_max={:.3} tau_last={}",
        a.out.display(),
        ds.n_objects(),
        ds.n_ticks(),
        cfg.moving_count(),
        ds.d_max,
        ds.last_tau()
    );
    Ok(())
}

fn cmd_preprocess(a: PreprocessArgs) -> Outcome {
    let ds = a.input.load()?;
    let ticks_per_block = match (a.block_ticks, a.block_minutes) {
        (Some(c), _) => c,
        (None, Some(m)) => {
            if !(m > 0.0 && m.is_finite()) {
                return Err(Error::Invalid("--block-minutes must be positive".into()).into());
            }
            ((m * 60.0 / ds.grid.delta_t).round() as u32).max(1)
        }
        (None, None) => {
            return Err(
                Error::Invalid("--block-minutes or --block-ticks is required".into()).into(),
            )
        }
    };
    let params = PreprocessParams {
        ticks_per_block,
        cell_side: a.grid_m,
        mu: a.mu,
        d_cont: a.d_cont,
    };
    let pkg = preprocess(&ds, &params, &a.out)?;
    let m = pkg.meta();
    println!(
        "wrote {}: blocks={} C={} H={} mu={} objects={} tau_last={}",
        a.out.display(),
        m.n_blocks,
        m.ticks_per_block,
        m.cell_side,
        m.mu,
        m.n_objects,
        m.tau_last
    );
    Ok(())
}

fn cmd_query(a: QueryArgs) -> Outcome {
    let pkg = open_index(&a.index)?;
    let q = DecayQuery {
        source: ObjectId(a.source),
        target: ObjectId(a.target),
        decay: DecayParams::new(a.w, a.d, a.nu).map_err(Error::from)?,
        tau_start: a.interval.from,
        tau_end: a.interval.to,
    };
    let started = Instant::now();
    let mut session = pkg.session();
    let (variant, ans) = if a.baseline {
        ("baseline", answer_baseline(&mut session, &q)?)
    } else {
        ("decay", answer(&mut session, &q)?)
    };
    print_json(&RunReport::new(
        variant,
        &q,
        &ans,
        started.elapsed().as_secs_f64() * 1e3,
    ))
}

fn cmd_topk(a: TopKArgs) -> Outcome {
    let pkg = open_index(&a.index)?;
    let sources = a
        .sources
        .iter()
        .map(|&(id, w, d)| Ok((ObjectId(id), DecayParams::new(w, d, a.nu)?)))
        .collect::<Result<Vec<_>, Error>>()?;
    let q = TopKQuery {
        sources,
        tau_start: a.interval.from,
        tau_end: a.interval.to,
        k: a.k,
    };
    let started = Instant::now();
    let ans = answer_topk_with(
        &mut pkg.session(),
        &q,
        TopKOptions {
            early_termination: !a.no_early_stop,
        },
    )?;
    print_json(&TopKReport::new(
        &q,
        &ans,
        started.elapsed().as_secs_f64() * 1e3,
    ))
}

fn cmd_verify(a: VerifyArgs) -> Outcome {
    let pkg = open_index(&a.index)?;
    let ds = read_dataset(&a.dataset)?;
    let meetings = reference_meetings(&pkg, &ds)?;
    let grid = TimeGrid::new(ds.grid.delta_t, ds.grid.tau_per_tick).map_err(Error::from)?;
    let spec = DecayWorkload {
        count: a.queries as usize,
        seed: a.seed,
        ..Default::default()
    };
    let queries = decay_queries(ds.n_objects(), &grid, ds.last_tau(), &spec)?;
    let decay = check_decay(&pkg, &meetings, &queries)?;
    let topk = if a.topk > 0 {
        let spec = TopKWorkload {
            count: a.topk,
            seed: a.seed,
            ..Default::default()
        };
        check_topk(&pkg, &meetings, &topk_queries(&ds, &spec)?)?
    } else {
        Vec::new()
    };
    let mut err = std::io::stderr().lock();
    for c in &decay {
        if !c.engine_matches() || !c.baseline_matches() || !c.superset_holds {
            let _ = writeln!(err, "mismatch: {:?}\n  engine   {:?}\n  baseline {:?}\n  oracle   {:?}\n  superset_holds {}", c.query, c.engine, c.baseline, c.oracle, c.superset_holds);
        }
    }
    for c in &topk {
        if !c.matches() || !c.bound_violations.is_empty() {
            let _ = writeln!(
                err,
                "top-k mismatch: {:?}\n  engine {:?}\n  oracle {:?}\n  bound violations {:?}",
                c.query, c.ranked, c.oracle, c.bound_violations
            );
        }
    }
    let summary = VerifySummary::new(&decay, &topk);
    print_json(&summary)?;
    if summary.passed() {
        Ok(())
    } else {
        Err(Failure::Mismatch)
    }
}

fn cmd_tune(a: TuneArgs) -> Outcome {
    let ds = a.input.load()?;
    let space = TuneSpace {
        ticks_per_block: a.block_ticks,
        cell_side: a.grid_m,
        mu: a.mu,
        d_cont: a.d_cont,
        prefix_fraction: a.prefix_fraction,
    };
    if !(space.prefix_fraction > 0.0 && space.prefix_fraction <= 1.0) {
        return Err(Error::Invalid("--prefix-fraction must lie in (0, 1]".into()).into());
    }
    let prefix = ds.prefix(prefix_ticks(ds.n_ticks(), space.prefix_fraction));
    let span = prefix.last_tau() as f64 * ds.grid.delta_t / ds.grid.tau_per_tick as f64;
    let spec = DecayWorkload {
        count: a.queries,
        seed: a.seed,
        length_s: (0.1 * span, span),
        ..Default::default()
    };
    let queries = decay_queries(ds.n_objects(), &ds.grid, prefix.last_tau(), &spec)?;
    print_json(&tune(&ds, &space, &queries)?)
}

fn cmd_bench(a: BenchArgs) -> Outcome {
    let pkg = open_index(&a.index)?;
    let rows = run_bench(
        &pkg,
        &BenchConfig {
            queries: a.queries,
            seed: a.seed,
            ..Default::default()
        },
    )?;
    match a.out {
        Some(path) => {
            let file = std::fs::File::create(&path).map_err(|e| Error::Io {
                path: path.clone(),
                source: e,
            })?;
            write_csv(&rows, file)?;
        }
        None => write_csv(&rows, std::io::stdout().lock())?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    ExitCode::SUCCESS
                }
                _ => ExitCode::from(EXIT_USAGE),
            };
        }
    };
    let outcome = match cli.command {
        Command::Generate(a) => cmd_generate(a),
        Command::Preprocess(a) => cmd_preprocess(a),
        Command::Query(a) => cmd_query(a),
        Command::Topk(a) => cmd_topk(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Tune(a) => cmd_tune(a),
        Command::Bench(a) => cmd_bench(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Mismatch) => {
            eprintln!("verification failed");
            ExitCode::from(EXIT_MISMATCH)
        }
        Err(Failure::Error(e)) => {
            eprintln!("error: {e}");
            match e {
                Error::Invalid(_) | Error::Model(_) => ExitCode::from(EXIT_USAGE),
                _ => ExitCode::from(EXIT_DATA),
            }
        }
    }
}
