use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use transmission_core::{ContinuousIndex, DistanceOracle, ReachabilityOracle};
use transmission_harness::bench::{fit_slopes, run_bench, BenchConfig};
use transmission_harness::fuzz::{run_fuzz, FuzzConfig};
use transmission_harness::instance::{generate, load, parse_queries, save, to_text, Generator, Query};

#[derive(Parser)]
#[command(name = "transmission", about = "Reachability and hop-distance oracles for transmission graphs")]
struct Cli {
    /// Output format for tabular results.
    #[arg(long, value_enum, default_value_t = Format::Csv, global = true)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Reach,
    Dist,
    Creach,
    Cdist,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random instance.
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Largest over smallest transmission radius.
        #[arg(long, default_value_t = 1.0)]
        psi: f64,
        #[arg(long, default_value = "uniform")]
        generator: Generator,
        /// Output file; standard output if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build the oracles for an instance and report their size.
    Build {
        #[arg(long = "in")]
        input: PathBuf,
        /// Also build the distance oracle with this epsilon.
        #[arg(long)]
        eps: Option<f64>,
    },
    /// Answer a file of queries.
    Query {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        queries: PathBuf,
        #[arg(long, value_enum)]
        mode: Mode,
        #[arg(long, default_value_t = 0.5)]
        eps: f64,
    },
    /// Compare all oracles with brute force on random instances.
    Fuzz {
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 128)]
        max_n: usize,
        #[arg(long, value_delimiter = ',', default_values_t = vec![0.1, 0.5, 1.0])]
        eps: Vec<f64>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Continuous targets per instance.
        #[arg(long, default_value_t = 20)]
        targets: usize,
        /// Directory for shrunk failing instances.
        #[arg(long)]
        dump_dir: Option<PathBuf>,
    },
    /// Measure build time, query time and storage over instance sizes.
    Bench {
        #[arg(long, value_delimiter = ',', default_values_t = vec![1024, 2048, 4096, 8192, 16384])]
        sizes: Vec<usize>,
        /// Benchmark the distance oracle with this epsilon instead of the
        /// reachability oracle.
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long, default_value_t = 5)]
        reps: usize,
        #[arg(long, default_value_t = 1.0)]
        psi: f64,
        /// Write the per-run records to this CSV file; the slope summary
        /// goes to standard output.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Separator statistics for every level of the hierarchy.
    Stats {
        #[arg(long = "in")]
        input: PathBuf,
    },
}

fn emit<T: Serialize>(rows: &[T], format: Format, out: &mut dyn Write) -> Result<()> {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            for r in rows {
                w.serialize(r)?;
            }
            w.flush()?;
        }
        Format::Json => {
            serde_json::to_writer_pretty(&mut *out, rows)?;
            writeln!(out)?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct BuildRow {
    oracle: &'static str,
    n: usize,
    eps: Option<f64>,
    build_ms: f64,
    stored_entries: u64,
    separator_clique_count: usize,
    recursion_depth: usize,
    levels: usize,
}

#[derive(Serialize)]
struct QueryRow {
    s: usize,
    t: Option<usize>,
    tx: Option<f64>,
    ty: Option<f64>,
    answer: String,
}

#[derive(Serialize)]
struct StatsRow {
    depth: usize,
    n: usize,
    cliques: usize,
    weight: f64,
    separator_size: usize,
    part_a: usize,
    part_b: usize,
    /// Larger part over n.
    balance: f64,
    paths: usize,
    degenerate: bool,
    stored_entries: u64,
}

fn fmt_dist(d: f64) -> String {
    if d.is_finite() {
        d.to_string()
    } else {
        "inf".to_string()
    }
}

fn cmd_build(input: &Path, eps: Option<f64>, format: Format) -> Result<()> {
    let inst = load(input)?;
    let mut rows = Vec::new();
    let start = Instant::now();
    let r = ReachabilityOracle::build(&inst.points)?;
    rows.push(BuildRow {
        oracle: "reach",
        n: inst.len(),
        eps: None,
        build_ms: start.elapsed().as_secs_f64() * 1e3,
        stored_entries: r.stored_entries(),
        separator_clique_count: r.root_clique_count(),
        recursion_depth: r.recursion_depth(),
        levels: r.level_stats().len(),
    });
    if let Some(eps) = eps {
        let start = Instant::now();
        let d = DistanceOracle::build(&inst.points, eps)?;
        rows.push(BuildRow {
            oracle: "dist",
            n: inst.len(),
            eps: Some(eps),
            build_ms: start.elapsed().as_secs_f64() * 1e3,
            stored_entries: d.stored_entries(),
            separator_clique_count: d.level_stats().first().filter(|l| l.depth == 0).map_or(0, |l| l.cliques),
            recursion_depth: d.recursion_depth(),
            levels: d.level_stats().len(),
        });
    }
    emit(&rows, format, &mut io::stdout().lock())
}

fn cmd_query(input: &Path, queries: &Path, mode: Mode, eps: f64, format: Format) -> Result<()> {
    let inst = load(input)?;
    let text = std::fs::read_to_string(queries).with_context(|| format!("reading {}", queries.display()))?;
    let qs = parse_queries(&text)?;
    let continuous = matches!(mode, Mode::Creach | Mode::Cdist);
    let reach = matches!(mode, Mode::Reach | Mode::Creach).then(|| ReachabilityOracle::build(&inst.points)).transpose()?;
    let dist = matches!(mode, Mode::Dist | Mode::Cdist).then(|| DistanceOracle::build(&inst.points, eps)).transpose()?;
    let index = continuous.then(|| ContinuousIndex::build(&inst.points));
    let mut rows = Vec::with_capacity(qs.len());
    for q in qs {
        let row = match (q, continuous) {
            (Query::Discrete { s, t }, false) => {
                let answer = match (&reach, &dist) {
                    (Some(r), _) => r.query(s, t)?.to_string(),
                    (_, Some(d)) => fmt_dist(d.query(s, t)?),
                    _ => unreachable!("an oracle is built for every mode"),
                };
                QueryRow { s, t: Some(t), tx: None, ty: None, answer }
            }
            (Query::Continuous { s, t }, true) => {
                let idx = index.as_ref().expect("built for continuous modes");
                let answer = match (&reach, &dist) {
                    (Some(r), _) => idx.query_reach(r, s, t)?.to_string(),
                    (_, Some(d)) => fmt_dist(idx.query_dist(d, s, t)?),
                    _ => unreachable!("an oracle is built for every mode"),
                };
                QueryRow { s, t: None, tx: Some(t.x), ty: Some(t.y), answer }
            }
            (Query::Discrete { .. }, true) => bail!("mode needs '<s> <tx> <ty>' queries"),
            (Query::Continuous { .. }, false) => bail!("mode needs '<s> <t>' queries"),
        };
        rows.push(row);
    }
    emit(&rows, format, &mut io::stdout().lock())
}

fn cmd_stats(input: &Path, format: Format) -> Result<()> {
    let inst = load(input)?;
    let r = ReachabilityOracle::build(&inst.points)?;
    let rows: Vec<StatsRow> = r
        .level_stats()
        .iter()
        .map(|l| StatsRow {
            depth: l.depth,
            n: l.n,
            cliques: l.cliques,
            weight: l.weight,
            separator_size: l.separator_size,
            part_a: l.part_a,
            part_b: l.part_b,
            balance: l.part_a.max(l.part_b) as f64 / l.n as f64,
            paths: l.paths,
            degenerate: l.degenerate,
            stored_entries: l.stored_entries,
        })
        .collect();
    emit(&rows, format, &mut io::stdout().lock())
}

fn run(cli: Cli) -> Result<bool> {
    let format = cli.format;
    match cli.command {
        Command::Gen { n, seed, psi, generator, out } => {
            let inst = generate(n, seed, generator, psi)?;
            match out {
                Some(path) => save(&inst, &path)?,
                None => io::stdout().lock().write_all(to_text(&inst).as_bytes())?,
            }
        }
        Command::Build { input, eps } => cmd_build(&input, eps, format)?,
        Command::Query { input, queries, mode, eps } => cmd_query(&input, &queries, mode, eps, format)?,
        Command::Fuzz { trials, max_n, eps, seed, targets, dump_dir } => {
            if max_n < 2 {
                bail!("--max-n must be at least 2");
            }
            let cfg = FuzzConfig { trials, max_n, eps, seed, targets, dump_dir, ..FuzzConfig::default() };
            let report = run_fuzz(&cfg)?;
            let mut out = io::stdout().lock();
            match format {
                Format::Csv => {
                    emit(&[&report.counts], format, &mut out)?;
                    for f in &report.failures {
                        let dump = f.dump.as_ref().map_or("-".into(), |p| p.display().to_string());
                        writeln!(out, "# failure trial={} seed={} n={} shrunk_n={} dump={dump}", f.trial, f.seed, f.n, f.shrunk_n)?;
                    }
                }
                Format::Json => {
                    serde_json::to_writer_pretty(&mut out, &report)?;
                    writeln!(out)?;
                }
            }
            return Ok(report.counts.failures() == 0);
        }
        Command::Bench { sizes, eps, reps, psi, csv } => {
            let cfg = BenchConfig { sizes, eps, reps, psi, generator: Generator::Uniform };
            let records = run_bench(&cfg)?;
            let slopes = fit_slopes(&records);
            let mut out = io::stdout().lock();
            match csv {
                Some(path) => {
                    let mut f = std::fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
                    emit(&records, Format::Csv, &mut f)?;
                }
                None => emit(&records, format, &mut out)?,
            }
            emit(&[slopes], format, &mut out)?;
        }
        Command::Stats { input } => cmd_stats(&input, format)?,
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
