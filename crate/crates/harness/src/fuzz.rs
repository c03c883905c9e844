//! Randomized comparison of every oracle against brute force, with
//! shrinking of failing instances.

use std::path::{Path, PathBuf};

use anyhow::Result;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use transmission_core::geometry::sector_contains;
use transmission_core::graph::Direction;
use transmission_core::via::ViaPathReachOracle;
use transmission_core::{ConeIndex, ContinuousIndex, DistanceOracle, Point, ReachabilityOracle, TransmissionGraph};

use crate::instance::{generate, save, Generator, Instance};

/// Radius ratios cycled through by the fuzzer.
pub const PSI_VALUES: [f64; 4] = [1.0, 2.0, 10.0, 1e4];

#[derive(Debug, Clone)]
pub struct FuzzConfig {
    pub trials: usize,
    pub min_n: usize,
    pub max_n: usize,
    pub eps: Vec<f64>,
    /// Random continuous targets per instance (0 skips continuous checks).
    pub targets: usize,
    /// Trial `i` builds its oracles with `base_cutoffs[i % len]`.
    pub base_cutoffs: Vec<usize>,
    pub seed: u64,
    /// Where shrunk failing instances are written; nothing is written if unset.
    pub dump_dir: Option<PathBuf>,
}

impl Default for FuzzConfig {
    fn default() -> Self {
        FuzzConfig {
            trials: 100,
            min_n: 2,
            max_n: 128,
            eps: vec![0.1, 0.5, 1.0],
            targets: 20,
            base_cutoffs: vec![64, 4],
            seed: 1,
            dump_dir: None,
        }
    }
}

/// Counters of one or more trials. All `*_violations` and `*_mismatches`
/// must be zero.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct FuzzCounts {
    pub instances: usize,
    pub ordered_pairs: u64,
    pub reach_mismatches: u64,
    pub reachable_pairs: u64,
    /// Distance checks, one per (pair, eps).
    pub dist_checks: u64,
    pub dist_violations: u64,
    /// Reachable (pair, eps) checks within `(1 + eps) d + 1`.
    pub dist_within_plus_one: u64,
    pub dist_reachable_checks: u64,
    pub continuous_queries: u64,
    pub candidate_overflow: u64,
    pub candidate_radius_mismatches: u64,
    pub continuous_reach_mismatches: u64,
    pub candidate_sandwich_violations: u64,
    pub continuous_dist_violations: u64,
}

impl FuzzCounts {
    fn add(&mut self, o: &FuzzCounts) {
        self.instances += o.instances;
        self.ordered_pairs += o.ordered_pairs;
        self.reach_mismatches += o.reach_mismatches;
        self.reachable_pairs += o.reachable_pairs;
        self.dist_checks += o.dist_checks;
        self.dist_violations += o.dist_violations;
        self.dist_within_plus_one += o.dist_within_plus_one;
        self.dist_reachable_checks += o.dist_reachable_checks;
        self.continuous_queries += o.continuous_queries;
        self.candidate_overflow += o.candidate_overflow;
        self.candidate_radius_mismatches += o.candidate_radius_mismatches;
        self.continuous_reach_mismatches += o.continuous_reach_mismatches;
        self.candidate_sandwich_violations += o.candidate_sandwich_violations;
        self.continuous_dist_violations += o.continuous_dist_violations;
    }

    pub fn failures(&self) -> u64 {
        self.reach_mismatches
            + self.dist_violations
            + self.candidate_overflow
            + self.candidate_radius_mismatches
            + self.continuous_reach_mismatches
            + self.candidate_sandwich_violations
            + self.continuous_dist_violations
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FuzzFailure {
    pub trial: usize,
    pub seed: u64,
    pub generator: Generator,
    pub psi: f64,
    pub n: usize,
    pub base_cutoff: usize,
    pub shrunk_n: usize,
    pub dump: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct FuzzReport {
    pub counts: FuzzCounts,
    pub failures: Vec<FuzzFailure>,
}

/// Parameters of trial `i`, derived only from the base seed and `i`.
pub struct TrialSpec {
    pub seed: u64,
    pub n: usize,
    pub generator: Generator,
    pub psi: f64,
    pub base_cutoff: usize,
}

pub fn trial_spec(cfg: &FuzzConfig, i: usize) -> TrialSpec {
    let seed = cfg.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(i as u64);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    TrialSpec {
        seed,
        n: rng.gen_range(cfg.min_n..=cfg.max_n.max(cfg.min_n)),
        generator: Generator::ALL[i % 3],
        psi: PSI_VALUES[(i / 3) % PSI_VALUES.len()],
        base_cutoff: cfg.base_cutoffs[i % cfg.base_cutoffs.len()],
    }
}

/// Row-major exact hop distances.
pub fn apsp(g: &TransmissionGraph) -> Vec<Vec<Option<u32>>> {
    (0..g.len())
        .into_par_iter()
        .map(|s| {
            g.all_hop_distances(s, Direction::Forward)
                .expect("source in range")
                .into_iter()
                .map(|d| d.hops())
                .collect()
        })
        .collect()
}

/// Random targets spread over the instance's disks, with some misses.
fn sample_targets(inst: &Instance, count: usize, rng: &mut ChaCha8Rng) -> Vec<Point> {
    let (mut lo_x, mut lo_y, mut hi_x, mut hi_y) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in &inst.points {
        lo_x = lo_x.min(p.pos.x - p.radius);
        lo_y = lo_y.min(p.pos.y - p.radius);
        hi_x = hi_x.max(p.pos.x + p.radius);
        hi_y = hi_y.max(p.pos.y + p.radius);
    }
    (0..count)
        .map(|k| {
            if k % 2 == 0 {
                Point::new(rng.gen_range(lo_x..=hi_x), rng.gen_range(lo_y..=hi_y))
            } else {
                // near some site, inside or just outside its disk
                let p = inst.points.choose(rng).expect("non-empty instance");
                let a = rng.gen_range(0.0..std::f64::consts::TAU);
                let d = p.radius * rng.gen_range(0.0..1.2);
                Point::new(p.pos.x + d * a.cos(), p.pos.y + d * a.sin())
            }
        })
        .collect()
}

/// Runs every check on one instance.
pub fn check_instance(inst: &Instance, eps: &[f64], targets: &[Point], base_cutoff: usize) -> Result<FuzzCounts> {
    let pts = &inst.points;
    let n = pts.len();
    let g = TransmissionGraph::build(pts)?;
    let d = apsp(&g);
    let mut c = FuzzCounts { instances: 1, ..FuzzCounts::default() };

    let reach = ReachabilityOracle::build_with_cutoff(pts, base_cutoff)?;
    for s in 0..n {
        for t in 0..n {
            c.ordered_pairs += 1;
            let truth = d[s][t].is_some();
            c.reachable_pairs += u64::from(truth);
            if reach.query(s, t)? != truth {
                c.reach_mismatches += 1;
            }
        }
    }

    let index = ContinuousIndex::build(pts);
    let mut candidates = Vec::with_capacity(targets.len());
    for &t in targets {
        let q = index.query_candidates(t);
        if q.len() > 6 {
            c.candidate_overflow += 1;
        }
        for cone in ConeIndex::ALL {
            let scan = pts.iter().filter(|p| sector_contains(p, cone, t)).map(|p| p.radius).min_by(f64::total_cmp);
            if index.candidate(cone, t).map(|p| p.radius) != scan {
                c.candidate_radius_mismatches += 1;
            }
        }
        // brute-force continuous distance: min over q with t in D_q of d(s, q) + 1
        let covering: Vec<usize> = pts.iter().filter(|p| p.reaches(t)).map(|p| p.id).collect();
        for s in 0..n {
            c.continuous_queries += 1;
            let brute = covering.iter().filter_map(|&q| d[s][q]).min().map(|h| h + 1);
            let via_q = q.iter().filter_map(|p| d[s][p.id]).min().map(|h| h + 1);
            if index.query_reach(&reach, s, t)? != brute.is_some() {
                c.continuous_reach_mismatches += 1;
            }
            match (brute, via_q) {
                (None, None) => {}
                (Some(h), Some(v)) if h <= v && v <= h + 1 => {}
                _ => c.candidate_sandwich_violations += 1,
            }
        }
        candidates.push(brute_continuous(&covering, &d));
    }

    for &e in eps {
        let dist = DistanceOracle::build_with_cutoff(pts, e, base_cutoff)?;
        for s in 0..n {
            for t in 0..n {
                c.dist_checks += 1;
                let q = dist.query(s, t)?;
                match d[s][t] {
                    None => c.dist_violations += u64::from(q != f64::INFINITY),
                    Some(h) => {
                        let h = f64::from(h);
                        c.dist_reachable_checks += 1;
                        if !(h <= q && q <= (1.0 + e) * h + 2.0) {
                            c.dist_violations += 1;
                        }
                        c.dist_within_plus_one += u64::from(q <= (1.0 + e) * h + 1.0);
                    }
                }
            }
        }
        for (k, &t) in targets.iter().enumerate() {
            for s in 0..n {
                let q = index.query_dist(&dist, s, t)?;
                let ok = match candidates[k][s] {
                    None => q == f64::INFINITY,
                    Some(h) => {
                        let h = f64::from(h);
                        h <= q && q <= (1.0 + e) * h + 3.0
                    }
                };
                c.continuous_dist_violations += u64::from(!ok);
            }
        }
    }
    Ok(c)
}

fn brute_continuous(covering: &[usize], d: &[Vec<Option<u32>>]) -> Vec<Option<u32>> {
    d.iter().map(|row| covering.iter().filter_map(|&q| row[q]).min().map(|h| h + 1)).collect()
}

/// Repeatedly keeps one half of the points while `fails` still holds.
pub fn shrink(inst: &Instance, fails: impl Fn(&Instance) -> bool) -> Instance {
    let mut cur = inst.clone();
    loop {
        let n = cur.len();
        if n <= 1 {
            return cur;
        }
        let idx: Vec<usize> = (0..n).collect();
        let (front, back) = idx.split_at(n / 2);
        let next = [front, back].into_iter().map(|h| cur.subset(h)).find(|c| !c.is_empty() && fails(c));
        match next {
            Some(c) => cur = c,
            None => return cur,
        }
    }
}

fn dump(dir: &Path, trial: usize, inst: &Instance) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(format!("fuzz-failure-{trial}.txt"));
    save(inst, &path)?;
    Ok(path)
}

pub fn run_fuzz(cfg: &FuzzConfig) -> Result<FuzzReport> {
    let outcomes: Vec<(FuzzCounts, Option<FuzzFailure>)> = (0..cfg.trials)
        .into_par_iter()
        .map(|i| -> Result<_> {
            let trial = trial_spec(cfg, i);
            let inst = generate(trial.n, trial.seed, trial.generator, trial.psi)?;
            let mut rng = ChaCha8Rng::seed_from_u64(trial.seed ^ 0x5EED);
            let targets = sample_targets(&inst, cfg.targets, &mut rng);
            let counts = check_instance(&inst, &cfg.eps, &targets, trial.base_cutoff)?;
            if counts.failures() == 0 {
                return Ok((counts, None));
            }
            let fails = |c: &Instance| {
                let t = sample_targets(c, cfg.targets, &mut ChaCha8Rng::seed_from_u64(trial.seed ^ 0x5EED));
                check_instance(c, &cfg.eps, &t, trial.base_cutoff).map_or(true, |k| k.failures() > 0)
            };
            let small = shrink(&inst, fails);
            let dump = cfg.dump_dir.as_deref().map(|d| dump(d, i, &small)).transpose()?;
            let failure = FuzzFailure {
                trial: i,
                seed: trial.seed,
                generator: trial.generator,
                psi: trial.psi,
                n: trial.n,
                base_cutoff: trial.base_cutoff,
                shrunk_n: small.len(),
                dump,
            };
            Ok((counts, Some(failure)))
        })
        .collect::<Result<_>>()?;
    let mut report = FuzzReport::default();
    for (c, f) in outcomes {
        report.counts.add(&c);
        report.failures.extend(f);
    }
    Ok(report)
}

/// Via-path checks on one instance: every path emitted while building the
/// reachability oracle must be transitive, and its flat oracle must agree
/// with brute force on all ordered pairs of that level.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ViaPathCounts {
    pub paths: u64,
    pub pair_checks: u64,
    pub mismatches: u64,
    pub non_transitive: u64,
}

pub fn check_via_paths(inst: &Instance, base_cutoff: usize) -> Result<ViaPathCounts> {
    let acc = std::sync::Mutex::new(ViaPathCounts::default());
    let visit = |lv: &transmission_core::hierarchy::LevelTrace<'_>| {
        let g = lv.graph;
        let d = apsp(g);
        let mut c = ViaPathCounts::default();
        for path in lv.paths {
            c.paths += 1;
            c.non_transitive += u64::from(!path.is_transitive_in(g));
            let o = ViaPathReachOracle::build(g, path);
            for s in 0..g.len() {
                for t in 0..g.len() {
                    c.pair_checks += 1;
                    let brute = path.nodes().iter().any(|&q| d[s][q].is_some() && d[q][t].is_some());
                    c.mismatches += u64::from(o.query(s, t) != brute);
                }
            }
        }
        let mut a = acc.lock().expect("no panics while holding the lock");
        a.paths += c.paths;
        a.pair_checks += c.pair_checks;
        a.mismatches += c.mismatches;
        a.non_transitive += c.non_transitive;
    };
    ReachabilityOracle::build_traced(&inst.points, base_cutoff, &visit)?;
    Ok(acc.into_inner().expect("no panics while holding the lock"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_fuzz_is_clean_and_deterministic() {
        let cfg = FuzzConfig { trials: 12, max_n: 40, targets: 5, ..FuzzConfig::default() };
        let a = run_fuzz(&cfg).unwrap();
        assert_eq!(a.counts.failures(), 0, "{a:?}");
        assert!(a.failures.is_empty());
        assert_eq!(a.counts.instances, 12);
        assert_eq!(a, run_fuzz(&cfg).unwrap());
    }

    #[test]
    fn shrink_halves_until_predicate_fails() {
        let inst = generate(37, 3, Generator::Uniform, 2.0).unwrap();
        // "fails" while the first point of the original is still present
        let first = inst.points[0].pos;
        let small = shrink(&inst, |c| c.points.iter().any(|p| p.pos == first));
        assert_eq!(small.len(), 1);
        assert_eq!(small.points[0].pos, first);
        assert_eq!(small.points[0].id, 0);
    }

    #[test]
    fn via_paths_clean() {
        let inst = generate(60, 9, Generator::Clustered, 10.0).unwrap();
        let c = check_via_paths(&inst, 4).unwrap();
        assert!(c.paths > 0);
        assert_eq!((c.mismatches, c.non_transitive), (0, 0));
    }
}
