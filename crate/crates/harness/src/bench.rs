//! Build/query/storage measurements and log-log slope fits.

use std::hint::black_box;
use std::time::Instant;

use anyhow::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use transmission_core::{DistanceOracle, ReachabilityOracle};

use crate::instance::{generate, Generator};

/// Queries per timed batch and number of batches.
const BATCH: usize = 64;
const BATCHES: usize = 101;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRecord {
    pub n: usize,
    pub seed: u64,
    pub build_ms: f64,
    pub query_ns_median: f64,
    pub stored_entries: u64,
    pub separator_clique_count: usize,
    pub recursion_depth: usize,
    pub eps: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub sizes: Vec<usize>,
    /// Benchmarks the distance oracle when set, the reachability oracle
    /// otherwise.
    pub eps: Option<f64>,
    pub reps: usize,
    pub psi: f64,
    pub generator: Generator,
}

/// Median over batches of the mean time per query.
fn median_query_ns(n: usize, seed: u64, mut query: impl FnMut(usize, usize)) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xBE4C);
    let pairs: Vec<(usize, usize)> = (0..BATCH * BATCHES).map(|_| (rng.gen_range(0..n), rng.gen_range(0..n))).collect();
    let mut times: Vec<f64> = pairs
        .chunks(BATCH)
        .map(|batch| {
            let start = Instant::now();
            for &(s, t) in batch {
                query(s, t);
            }
            start.elapsed().as_nanos() as f64 / batch.len() as f64
        })
        .collect();
    times.sort_by(f64::total_cmp);
    times[times.len() / 2]
}

pub fn bench_one(n: usize, seed: u64, cfg: &BenchConfig) -> Result<BenchRecord> {
    let inst = generate(n, seed, cfg.generator, cfg.psi)?;
    let start = Instant::now();
    let rec = match cfg.eps {
        None => {
            let o = ReachabilityOracle::build(&inst.points)?;
            let build_ms = start.elapsed().as_secs_f64() * 1e3;
            let q = median_query_ns(n, seed, |s, t| {
                black_box(o.query(s, t).expect("ids in range"));
            });
            BenchRecord {
                n,
                seed,
                build_ms,
                query_ns_median: q,
                stored_entries: o.stored_entries(),
                separator_clique_count: o.root_clique_count(),
                recursion_depth: o.recursion_depth(),
                eps: None,
            }
        }
        Some(eps) => {
            let o = DistanceOracle::build(&inst.points, eps)?;
            let build_ms = start.elapsed().as_secs_f64() * 1e3;
            let q = median_query_ns(n, seed, |s, t| {
                black_box(o.query(s, t).expect("ids in range"));
            });
            BenchRecord {
                n,
                seed,
                build_ms,
                query_ns_median: q,
                stored_entries: o.stored_entries(),
                separator_clique_count: o.level_stats().first().filter(|l| l.depth == 0).map_or(0, |l| l.cliques),
                recursion_depth: o.recursion_depth(),
                eps: Some(eps),
            }
        }
    };
    Ok(rec)
}

/// Runs sequentially so that timings do not compete for cores.
pub fn run_bench(cfg: &BenchConfig) -> Result<Vec<BenchRecord>> {
    let mut out = Vec::new();
    for &n in &cfg.sizes {
        for rep in 0..cfg.reps {
            out.push(bench_one(n, rep as u64, cfg)?);
        }
    }
    Ok(out)
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Slopes {
    pub stored_entries: f64,
    pub query_ns: f64,
    pub separator_cliques: f64,
}

/// Slopes over the per-size means of the records.
pub fn fit_slopes(records: &[BenchRecord]) -> Slopes {
    let mut sizes: Vec<usize> = records.iter().map(|r| r.n).collect();
    sizes.sort_unstable();
    sizes.dedup();
    let mean = |n: usize, f: &dyn Fn(&BenchRecord) -> f64| {
        let v: Vec<f64> = records.iter().filter(|r| r.n == n).map(f).collect();
        v.iter().sum::<f64>() / v.len() as f64
    };
    let series = |f: &dyn Fn(&BenchRecord) -> f64| -> Vec<(f64, f64)> {
        sizes.iter().map(|&n| (n as f64, mean(n, f))).collect()
    };
    Slopes {
        stored_entries: log_log_slope(&series(&|r| r.stored_entries as f64)),
        query_ns: log_log_slope(&series(&|r| r.query_ns_median)),
        separator_cliques: log_log_slope(&series(&|r| r.separator_clique_count as f64)),
    }
}
