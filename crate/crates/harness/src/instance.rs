//! Seeded instance generators and the line-oriented instance and query
//! file formats.

use std::fmt::{self, Write as _};
use std::path::Path;
use std::str::FromStr;

use anyhow::{anyhow, bail, ensure, Context, Result};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;
use transmission_core::{Point, TransmissionPoint};

pub const HEADER: &str = "transmission-instance v1";

/// Expected number of other centers inside a unit disk for the default
/// square side.
pub const DEFAULT_DEGREE: f64 = 1.9;

/// Side of the square holding `n` points such that a unit disk holds
/// `degree` other centers on average.
pub fn square_side(n: usize, degree: f64) -> f64 {
    (std::f64::consts::PI * n as f64 / degree).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Generator {
    Uniform,
    Clustered,
    Grid,
}

impl Generator {
    pub const ALL: [Generator; 3] = [Generator::Uniform, Generator::Clustered, Generator::Grid];
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Generator::Uniform => "uniform",
            Generator::Clustered => "clustered",
            Generator::Grid => "grid",
        })
    }
}

impl FromStr for Generator {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(Generator::Uniform),
            "clustered" => Ok(Generator::Clustered),
            "grid" => Ok(Generator::Grid),
            _ => bail!("unknown generator {s:?} (expected uniform, clustered or grid)"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Meta {
    pub seed: u64,
    pub generator: Generator,
    pub psi: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub points: Vec<TransmissionPoint>,
    /// Absent for instances read from files without a metadata line.
    pub meta: Option<Meta>,
}

impl Instance {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Largest over smallest radius (1 for an empty instance).
    pub fn radius_ratio(&self) -> f64 {
        let (lo, hi) = self
            .points
            .iter()
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), p| (lo.min(p.radius), hi.max(p.radius)));
        if self.points.is_empty() {
            1.0
        } else {
            hi / lo
        }
    }

    /// Keeps the given points, renumbered `0..k` in order.
    pub fn subset(&self, keep: &[usize]) -> Instance {
        let points = keep.iter().enumerate().map(|(i, &j)| TransmissionPoint { id: i, ..self.points[j] }).collect();
        Instance { points, meta: self.meta.clone() }
    }
}

/// Deterministic in `(n, seed, generator, psi)`. Radii are log-uniform in
/// `[1, psi]`.
pub fn generate(n: usize, seed: u64, generator: Generator, psi: f64) -> Result<Instance> {
    generate_with_degree(n, seed, generator, psi, DEFAULT_DEGREE)
}

/// [`generate`] with the point density set by the expected unit-disk degree.
pub fn generate_with_degree(n: usize, seed: u64, generator: Generator, psi: f64, degree: f64) -> Result<Instance> {
    ensure!(n >= 1, "n must be at least 1");
    ensure!(degree.is_finite() && degree > 0.0, "degree must be positive, got {degree}");
    ensure!(psi.is_finite() && psi >= 1.0, "psi must be a finite number >= 1, got {psi}");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let side = square_side(n, degree);
    let positions: Vec<(f64, f64)> = match generator {
        Generator::Uniform => (0..n).map(|_| (rng.gen_range(0.0..side), rng.gen_range(0.0..side))).collect(),
        Generator::Clustered => {
            let blobs = ((n as f64).sqrt() / 3.0).ceil().max(1.0) as usize;
            let centers: Vec<(f64, f64)> =
                (0..blobs).map(|_| (rng.gen_range(0.0..side), rng.gen_range(0.0..side))).collect();
            let sigma = side / (2.0 * (blobs as f64).sqrt());
            let normal = Normal::new(0.0, sigma).expect("positive sigma");
            (0..n)
                .map(|_| {
                    let c = centers[rng.gen_range(0..blobs)];
                    (c.0 + normal.sample(&mut rng), c.1 + normal.sample(&mut rng))
                })
                .collect()
        }
        Generator::Grid => {
            let cols = (n as f64).sqrt().ceil() as usize;
            let step = side / cols as f64;
            (0..n)
                .map(|i| {
                    let (cx, cy) = ((i % cols) as f64, (i / cols) as f64);
                    (
                        (cx + 0.5 + rng.gen_range(-0.3..0.3)) * step,
                        (cy + 0.5 + rng.gen_range(-0.3..0.3)) * step,
                    )
                })
                .collect()
        }
    };
    let ln_psi = psi.ln();
    let points = positions
        .into_iter()
        .enumerate()
        .map(|(i, (x, y))| {
            let r = (rng.gen_range(0.0..=1.0) * ln_psi).exp().clamp(1.0, psi);
            TransmissionPoint::at(i, x, y, r)
        })
        .collect::<std::result::Result<Vec<_>, _>>()?;
    Ok(Instance { points, meta: Some(Meta { seed, generator, psi }) })
}

/// Text rendering: header, one `x y r` line per point, then an optional
/// `# meta` line. Numbers carry 17 significant digits.
pub fn to_text(inst: &Instance) -> String {
    let mut s = format!("{HEADER} {}\n", inst.len());
    for p in &inst.points {
        writeln!(s, "{:.16e} {:.16e} {:.16e}", p.pos.x, p.pos.y, p.radius).expect("writing to a String");
    }
    if let Some(m) = &inst.meta {
        writeln!(s, "# meta seed={} generator={} psi={:.16e}", m.seed, m.generator, m.psi).expect("writing to a String");
    }
    s
}

fn parse_meta(line: &str) -> Result<Meta> {
    let mut seed = None;
    let mut generator = None;
    let mut psi = None;
    for field in line.split_whitespace() {
        let (k, v) = field.split_once('=').ok_or_else(|| anyhow!("bad meta field {field:?}"))?;
        match k {
            "seed" => seed = Some(v.parse()?),
            "generator" => generator = Some(v.parse()?),
            "psi" => psi = Some(v.parse()?),
            _ => bail!("unknown meta field {k:?}"),
        }
    }
    Ok(Meta {
        seed: seed.context("meta line lacks seed")?,
        generator: generator.context("meta line lacks generator")?,
        psi: psi.context("meta line lacks psi")?,
    })
}

pub fn from_text(text: &str) -> Result<Instance> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().context("empty instance file")?;
    let n: usize = header
        .strip_prefix(HEADER)
        .map(str::trim)
        .context("missing 'transmission-instance v1 <n>' header")?
        .parse()
        .context("bad point count in header")?;
    let mut points = Vec::with_capacity(n);
    let mut meta = None;
    for (no, line) in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            if let Some(m) = rest.trim().strip_prefix("meta") {
                meta = Some(parse_meta(m).with_context(|| format!("line {}", no + 1))?);
            }
            continue;
        }
        let nums: Vec<f64> = line
            .split_whitespace()
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .with_context(|| format!("line {}: expected three numbers", no + 1))?;
        ensure!(nums.len() == 3, "line {}: expected 'x y r', got {} fields", no + 1, nums.len());
        let p = TransmissionPoint::at(points.len(), nums[0], nums[1], nums[2]).with_context(|| format!("line {}", no + 1))?;
        points.push(p);
    }
    ensure!(points.len() == n, "header announces {n} points, found {}", points.len());
    Ok(Instance { points, meta })
}

pub fn save(inst: &Instance, path: &Path) -> Result<()> {
    std::fs::write(path, to_text(inst)).with_context(|| format!("writing {}", path.display()))
}

pub fn load(path: &Path) -> Result<Instance> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    from_text(&text).with_context(|| format!("parsing {}", path.display()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Query {
    Discrete { s: usize, t: usize },
    Continuous { s: usize, t: Point },
}

/// Lines `<s> <t>` or `<s> <tx> <ty>`; blank lines and `#` comments are
/// skipped.
pub fn parse_queries(text: &str) -> Result<Vec<Query>> {
    let mut out = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let f: Vec<&str> = line.split_whitespace().collect();
        let ctx = || format!("query line {}", no + 1);
        let s: usize = f[0].parse().with_context(ctx)?;
        out.push(match f.len() {
            2 => Query::Discrete { s, t: f[1].parse().with_context(ctx)? },
            3 => Query::Continuous {
                s,
                t: Point::try_new(f[1].parse().with_context(ctx)?, f[2].parse().with_context(ctx)?)
                    .with_context(ctx)?,
            },
            k => bail!("query line {}: expected 2 or 3 fields, got {k}", no + 1),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn psi_and_determinism() {
        for g in Generator::ALL {
            let a = generate(100, 42, g, 10.0).unwrap();
            assert!(a.radius_ratio() <= 10.0);
            assert_eq!(a, generate(100, 42, g, 10.0).unwrap());
            assert_ne!(a, generate(100, 43, g, 10.0).unwrap());
            assert_eq!(generate(1, 7, g, 2.0).unwrap().len(), 1);
            assert!(generate(50, 1, g, 1.0).unwrap().points.iter().all(|p| p.radius == 1.0));
        }
        assert!(generate(0, 1, Generator::Uniform, 2.0).is_err());
        assert!(generate(5, 1, Generator::Uniform, 0.5).is_err());
    }

    #[test]
    fn parse_errors() {
        assert!(from_text("").is_err());
        assert!(from_text("transmission-instance v1 2\n0 0 1\n").is_err());
        assert!(from_text("transmission-instance v1 1\n0 0 -1\n").is_err());
        assert!(from_text("transmission-instance v1 1\n0 0\n").is_err());
        assert!(from_text("something else 1\n0 0 1\n").is_err());
        let inst = from_text("transmission-instance v1 1\n1.5 2 3\n").unwrap();
        assert_eq!(inst.meta, None);
        assert_eq!(inst.points[0], TransmissionPoint::at(0, 1.5, 2.0, 3.0).unwrap());
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("inst.txt");
        let inst = generate(40, 9, Generator::Clustered, 10.0).unwrap();
        save(&inst, &path).unwrap();
        let back = load(&path).unwrap();
        assert_eq!(back.points, inst.points);
        assert_eq!(back.meta, inst.meta);
        assert!(load(&dir.path().join("missing.txt")).is_err());
    }

    #[test]
    fn queries() {
        let q = parse_queries("# c\n0 1\n\n2 0.5 -1e3\n").unwrap();
        assert_eq!(q, vec![Query::Discrete { s: 0, t: 1 }, Query::Continuous { s: 2, t: Point::new(0.5, -1000.0) }]);
        assert!(parse_queries("1 2 3 4\n").is_err());
        assert!(parse_queries("x 2\n").is_err());
    }

    proptest! {
        #[test]
        fn round_trip(n in 1usize..60, seed: u64, g in 0usize..3, psi in 1.0f64..1e4) {
            let inst = generate(n, seed, Generator::ALL[g], psi).unwrap();
            prop_assert_eq!(from_text(&to_text(&inst)).unwrap(), inst);
        }

        #[test]
        fn round_trip_arbitrary_bits(pts in proptest::collection::vec((-1e300f64..1e300, -1e-300f64..1e-300, 1e-300f64..1e300), 1..20)) {
            let points = pts.iter().enumerate().map(|(i, &(x, y, r))| TransmissionPoint::at(i, x, y, r).unwrap()).collect();
            let inst = Instance { points, meta: None };
            prop_assert_eq!(from_text(&to_text(&inst)).unwrap(), inst);
        }
    }
}
