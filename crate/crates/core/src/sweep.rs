//! Parameter sweeps over the `(a, b)` rectangle of the three-rule example,
//! with CSV, plot-data and containment outputs.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matexpr::{make_example_spec, PlmiSpec};
use crate::oracle::{region_containment, soundness_at, ContainmentSummary, Region, SoundnessReport};
use crate::relax::{count_constraints, LmiSet, Method, DEFAULT_CAP};
use crate::sdp::{
    export_sdpa, solve_feasibility, stabilization_problem, FeasibilityProblem, FeasibilityResult, SolverOptions, Status,
};

pub const SCHEMA_VERSION: u32 = 1;
pub const CSV_HEADER: [&str; 9] = [
    "a",
    "b",
    "method",
    "q",
    "status",
    "margin",
    "constraints",
    "solve_ms",
    "flag",
];

/// A relaxation and the fold it is applied at.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MethodFold {
    pub method: Method,
    pub q: usize,
}

impl MethodFold {
    pub fn new(method: Method, q: usize) -> Self {
        Self { method, q }
    }

    /// `method:q`, e.g. `polya:3`.
    pub fn label(&self) -> String {
        format!("{}:{}", self.method, self.q)
    }

    pub fn parse(s: &str) -> Result<Self> {
        let (m, q) = s
            .split_once(':')
            .ok_or_else(|| Error::Config(format!("`{s}` is not of the form method:q")))?;
        let q = q
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("`{s}`: fold must be a positive integer")))?;
        Ok(Self::new(m.trim().parse()?, q))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub a_range: [f64; 2],
    pub b_range: [f64; 2],
    pub grid_n: usize,
    pub methods: Vec<MethodFold>,
    /// Ordered pairs `[first, second]` of `method:q` labels to compare.
    pub pairs: Vec<[String; 2]>,
    pub seed: u64,
    pub cap: u64,
    /// Simplex samples per feasible point, on top of vertices and edge midpoints.
    pub soundness_samples: usize,
    pub csv: String,
    pub plot: String,
    pub containment: String,
    pub soundness: String,
    pub solver: SolverOptions,
}

impl Default for SweepConfig {
    fn default() -> Self {
        let mf = MethodFold::new;
        Self {
            a_range: [0.0, 10.0],
            b_range: [0.0, 10.0],
            grid_n: 11,
            methods: vec![
                mf(Method::Tuan, 2),
                mf(Method::Kimlee2, 2),
                mf(Method::Polya, 3),
                mf(Method::Amgm, 3),
                mf(Method::Polya, 4),
                mf(Method::Amgm, 4),
            ],
            pairs: vec![
                ["tuan:2".into(), "kimlee2:2".into()],
                ["polya:3".into(), "amgm:3".into()],
                ["polya:4".into(), "amgm:4".into()],
            ],
            seed: 0,
            cap: DEFAULT_CAP as u64,
            soundness_samples: 1000,
            csv: "sweep.csv".into(),
            plot: "plot.json".into(),
            containment: "containment.json".into(),
            soundness: "soundness.json".into(),
            solver: SolverOptions::default(),
        }
    }
}

impl SweepConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.grid_n < 2 {
            return bad(format!("grid_n must be at least 2, got {}", self.grid_n));
        }
        for (name, r) in [("a_range", self.a_range), ("b_range", self.b_range)] {
            if !(r[0].is_finite() && r[1].is_finite() && r[0] < r[1]) {
                return bad(format!("{name} must be a nonempty interval, got [{}, {}]", r[0], r[1]));
            }
        }
        if self.methods.is_empty() {
            return bad("methods must not be empty".into());
        }
        self.solver.validate()?;
        let labels: Vec<String> = self.methods.iter().map(MethodFold::label).collect();
        for (i, m) in self.methods.iter().enumerate() {
            if labels[..i].contains(&labels[i]) {
                return bad(format!("method {} is listed twice", labels[i]));
            }
            if let Some(expected) = m.method.required_fold() {
                if expected != m.q {
                    return Err(Error::WrongFold {
                        method: m.method.name(),
                        expected,
                        got: m.q,
                    });
                }
            }
            if m.q < 2 {
                return bad(format!("{}: the example needs q >= 2", labels[i]));
            }
            let count = count_constraints(m.method, m.q, 3)?;
            if count > self.cap as u128 {
                return Err(Error::CapExceeded {
                    what: "constraint count",
                    count,
                    cap: self.cap as u128,
                });
            }
        }
        for [x, y] in &self.pairs {
            for l in [x, y] {
                if !labels.contains(l) {
                    return bad(format!("pair member `{l}` is not among the configured methods"));
                }
            }
        }
        Ok(())
    }

    fn axis(range: [f64; 2], n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| {
                if i + 1 == n {
                    range[1]
                } else {
                    range[0] + (range[1] - range[0]) * i as f64 / (n - 1) as f64
                }
            })
            .collect()
    }

    /// Grid points, `a` major and `b` minor.
    pub fn grid(&self) -> Vec<(f64, f64)> {
        let bs = Self::axis(self.b_range, self.grid_n);
        Self::axis(self.a_range, self.grid_n)
            .into_iter()
            .flat_map(|a| bs.iter().map(move |&b| (a, b)))
            .collect()
    }
}

/// Builds the solver problem for a generated family: the Lyapunov side
/// constraint is attached when the spec names one.
pub fn build_problem(spec: &PlmiSpec, set: LmiSet, ball_radius: f64) -> Result<FeasibilityProblem> {
    if spec.lyapunov().is_some() {
        stabilization_problem(spec, set, ball_radius)
    } else {
        FeasibilityProblem::new(set, vec![], spec.registry().len(), ball_radius)
    }
}

/// Everything needed to pose one grid cell.
pub fn point_problem(a: f64, b: f64, mf: MethodFold, cfg: &SweepConfig) -> Result<(PlmiSpec, FeasibilityProblem)> {
    let spec = make_example_spec(a, b, mf.q)?;
    let set = mf.method.generate(&spec, cfg.cap as u128)?;
    let problem = build_problem(&spec, set, cfg.solver.ball_radius)?;
    Ok((spec, problem))
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub a: f64,
    pub b: f64,
    pub method: MethodFold,
    pub status: Status,
    pub margin: f64,
    /// Generated constraints, not counting the side constraint.
    pub constraints: usize,
    pub solve_ms: f64,
    pub flag: String,
    pub witness: Option<Vec<f64>>,
}

fn solve_point(a: f64, b: f64, mf: MethodFold, cfg: &SweepConfig) -> Result<SweepRow> {
    let (_, problem) = point_problem(a, b, mf, cfg)?;
    let constraints = problem.set.len();
    let start = Instant::now();
    let (status, margin, flag, witness) = match solve_feasibility(&problem, &cfg.solver) {
        Ok(FeasibilityResult {
            status,
            margin,
            witness,
            ..
        }) => (status, margin, String::new(), witness),
        Err(Error::NumericalFailure(m)) => (Status::Inconclusive, f64::NAN, format!("numerical_failure: {m}"), None),
        Err(e) => return Err(e),
    };
    Ok(SweepRow {
        a,
        b,
        method: mf,
        status,
        margin,
        constraints,
        solve_ms: start.elapsed().as_secs_f64() * 1e3,
        flag,
        witness,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointSoundness {
    pub a: f64,
    pub b: f64,
    pub method: String,
    pub report: SoundnessReport,
}

#[derive(Clone, Debug)]
pub struct SweepOutput {
    pub config: SweepConfig,
    pub rows: Vec<SweepRow>,
    pub containment: Vec<ContainmentSummary>,
    pub soundness: Vec<PointSoundness>,
}

impl SweepOutput {
    pub fn soundness_violations(&self) -> usize {
        self.soundness.iter().map(|s| s.report.violations).sum()
    }
}

fn point_seed(seed: u64, cell: usize, method: usize) -> u64 {
    seed ^ ((cell as u64) << 16 | method as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15)
}

/// Runs every (point, method) cell. Rows come back in grid order, methods in
/// configured order within a point, regardless of scheduling.
pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepOutput> {
    cfg.validate()?;
    let grid = cfg.grid();
    let cells: Vec<(usize, usize)> = (0..grid.len())
        .flat_map(|p| (0..cfg.methods.len()).map(move |m| (p, m)))
        .collect();
    let results: Vec<Result<(SweepRow, Option<PointSoundness>)>> = cells
        .par_iter()
        .map(|&(p, m)| {
            let (a, b) = grid[p];
            let mf = cfg.methods[m];
            let row = solve_point(a, b, mf, cfg)?;
            let sound = match (&row.status, &row.witness) {
                (Status::FeasibleWithMargin, Some(x)) => {
                    let spec = make_example_spec(a, b, mf.q)?;
                    let mut rng = ChaCha8Rng::seed_from_u64(point_seed(cfg.seed, p, m));
                    Some(PointSoundness {
                        a,
                        b,
                        method: mf.label(),
                        report: soundness_at(&spec, x, cfg.soundness_samples, &mut rng)?,
                    })
                }
                _ => None,
            };
            Ok((row, sound))
        })
        .collect();
    let mut rows = Vec::with_capacity(results.len());
    let mut soundness = Vec::new();
    for r in results {
        let (row, s) = r?;
        rows.push(row);
        soundness.extend(s);
    }
    let containment = containment_from_rows(cfg, &rows)?;
    Ok(SweepOutput {
        config: cfg.clone(),
        rows,
        containment,
        soundness,
    })
}

/// One [`Region`] per configured method, over the configured grid.
pub fn regions_from_rows(cfg: &SweepConfig, rows: &[SweepRow]) -> Result<Vec<Region>> {
    let grid = cfg.grid();
    let mut by_method: BTreeMap<String, BTreeMap<usize, Status>> = BTreeMap::new();
    let index: BTreeMap<(u64, u64), usize> = grid
        .iter()
        .enumerate()
        .map(|(i, (a, b))| ((a.to_bits(), b.to_bits()), i))
        .collect();
    for row in rows {
        let cell = index
            .get(&(row.a.to_bits(), row.b.to_bits()))
            .ok_or_else(|| Error::Config(format!("row at ({}, {}) is off the configured grid", row.a, row.b)))?;
        by_method
            .entry(row.method.label())
            .or_default()
            .insert(*cell, row.status);
    }
    cfg.methods
        .iter()
        .map(|mf| {
            let label = mf.label();
            let cells = by_method.remove(&label).unwrap_or_default();
            if cells.len() != grid.len() {
                return Err(Error::Config(format!(
                    "method {label} has {} of {} grid points",
                    cells.len(),
                    grid.len()
                )));
            }
            Ok(Region {
                method: label,
                grid: grid.clone(),
                status: cells.into_values().collect(),
            })
        })
        .collect()
}

pub fn containment_from_rows(cfg: &SweepConfig, rows: &[SweepRow]) -> Result<Vec<ContainmentSummary>> {
    let regions = regions_from_rows(cfg, rows)?;
    let find = |l: &str| regions.iter().find(|r| r.method == l).expect("validated pair");
    cfg.pairs
        .iter()
        .map(|[x, y]| region_containment(find(x), find(y)))
        .collect()
}

fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else {
        format!("{x}")
    }
}

fn parse_f64(s: &str) -> Result<f64> {
    if s == "nan" {
        return Ok(f64::NAN);
    }
    s.parse().map_err(|_| Error::Parse(format!("`{s}` is not a number")))
}

pub fn write_csv<W: std::io::Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| Error::Parse(format!("csv: {e}"));
    w.write_record(CSV_HEADER).map_err(csv_err)?;
    for r in rows {
        w.write_record([
            fmt_f64(r.a),
            fmt_f64(r.b),
            r.method.method.to_string(),
            r.method.q.to_string(),
            r.status.label().to_string(),
            format!("{:.12e}", r.margin),
            r.constraints.to_string(),
            format!("{:.3}", r.solve_ms),
            r.flag.clone(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn parse_status(s: &str) -> Result<Status> {
    match s {
        "feasible" => Ok(Status::FeasibleWithMargin),
        "infeasible" => Ok(Status::Infeasible),
        "inconclusive" => Ok(Status::Inconclusive),
        other => Err(Error::Parse(format!("unknown status `{other}`"))),
    }
}

/// Reads rows written by [`write_csv`]. Witnesses are not stored in the CSV.
pub fn read_csv<R: std::io::Read>(input: R) -> Result<Vec<SweepRow>> {
    let mut rd = csv::Reader::from_reader(input);
    let headers = rd.headers().map_err(|e| Error::Parse(format!("csv: {e}")))?.clone();
    if headers.iter().collect::<Vec<_>>() != CSV_HEADER {
        return Err(Error::Parse(format!(
            "csv: unexpected header {:?}",
            headers.iter().collect::<Vec<_>>()
        )));
    }
    let mut rows = Vec::new();
    for (n, rec) in rd.records().enumerate() {
        let rec = rec.map_err(|e| Error::Parse(format!("csv: {e}")))?;
        let at = |e: Error| Error::Parse(format!("csv row {}: {e}", n + 2));
        let q = rec[3]
            .parse()
            .map_err(|_| at(Error::Parse(format!("bad q `{}`", &rec[3]))))?;
        rows.push(SweepRow {
            a: parse_f64(&rec[0]).map_err(at)?,
            b: parse_f64(&rec[1]).map_err(at)?,
            method: MethodFold::new(rec[2].parse().map_err(at)?, q),
            status: parse_status(&rec[4]).map_err(at)?,
            margin: parse_f64(&rec[5]).map_err(at)?,
            constraints: rec[6]
                .parse()
                .map_err(|_| at(Error::Parse("bad constraint count".into())))?,
            solve_ms: parse_f64(&rec[7]).map_err(at)?,
            flag: rec[8].to_string(),
            witness: None,
        });
    }
    Ok(rows)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlotSeries {
    pub method: String,
    pub feasible: Vec<(f64, f64)>,
    pub infeasible: Vec<(f64, f64)>,
    pub inconclusive: Vec<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlotData {
    pub schema_version: u32,
    pub config: SweepConfig,
    pub series: Vec<PlotSeries>,
}

pub fn plot_data(cfg: &SweepConfig, rows: &[SweepRow]) -> PlotData {
    let series = cfg
        .methods
        .iter()
        .map(|mf| {
            let mut s = PlotSeries {
                method: mf.label(),
                feasible: vec![],
                infeasible: vec![],
                inconclusive: vec![],
            };
            for r in rows.iter().filter(|r| r.method == *mf) {
                let list = match r.status {
                    Status::FeasibleWithMargin => &mut s.feasible,
                    Status::Infeasible => &mut s.infeasible,
                    Status::Inconclusive => &mut s.inconclusive,
                };
                list.push((r.a, r.b));
            }
            s
        })
        .collect();
    PlotData {
        schema_version: SCHEMA_VERSION,
        config: cfg.clone(),
        series,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContainmentReport {
    pub schema_version: u32,
    pub pairs: Vec<ContainmentSummary>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SoundnessFile {
    pub schema_version: u32,
    pub samples_per_point: usize,
    pub violations: usize,
    pub points: Vec<PointSoundness>,
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Parse(e.to_string()))?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}

/// Writes the CSV, plot data, containment and soundness reports, and the
/// effective configuration into `dir`.
pub fn write_outputs(out: &SweepOutput, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let cfg = &out.config;
    write_csv(&out.rows, std::fs::File::create(dir.join(&cfg.csv))?)?;
    write_json(&dir.join(&cfg.plot), &plot_data(cfg, &out.rows))?;
    write_json(
        &dir.join(&cfg.containment),
        &ContainmentReport {
            schema_version: SCHEMA_VERSION,
            pairs: out.containment.clone(),
        },
    )?;
    write_json(
        &dir.join(&cfg.soundness),
        &SoundnessFile {
            schema_version: SCHEMA_VERSION,
            samples_per_point: cfg.soundness_samples,
            violations: out.soundness_violations(),
            points: out.soundness.clone(),
        },
    )?;
    std::fs::write(dir.join("effective_config.toml"), cfg.to_toml())?;
    Ok(())
}

pub fn read_containment(path: &Path) -> Result<ContainmentReport> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

/// Exports the SDPA file of one cell to `dir/<method>_q<q>_a<a>_b<b>.dat-s`.
pub fn export_cell(a: f64, b: f64, mf: MethodFold, cfg: &SweepConfig, dir: &Path) -> Result<std::path::PathBuf> {
    std::fs::create_dir_all(dir)?;
    let (_, problem) = point_problem(a, b, mf, cfg)?;
    let path = dir.join(format!("{}_q{}_a{}_b{}.dat-s", mf.method, mf.q, a, b));
    export_sdpa(&problem, &path)?;
    Ok(path)
}

/// Human-readable per-method status counts.
pub fn summary(cfg: &SweepConfig, rows: &[SweepRow]) -> String {
    let mut s = String::new();
    for mf in &cfg.methods {
        let mine: Vec<&SweepRow> = rows.iter().filter(|r| r.method == *mf).collect();
        let count = |st: Status| mine.iter().filter(|r| r.status == st).count();
        let _ = writeln!(
            s,
            "{:<10} feasible {:>4}  infeasible {:>4}  inconclusive {:>4}",
            mf.label(),
            count(Status::FeasibleWithMargin),
            count(Status::Infeasible),
            count(Status::Inconclusive)
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_hits_both_ends() {
        let cfg = SweepConfig::default();
        let g = cfg.grid();
        assert_eq!(g.len(), 121);
        assert_eq!(g[0], (0.0, 0.0));
        assert_eq!(g[1], (0.0, 1.0));
        assert_eq!(g[120], (10.0, 10.0));
    }

    #[test]
    fn config_round_trip_and_validation() {
        let cfg = SweepConfig::default();
        assert_eq!(SweepConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
        assert!(matches!(SweepConfig::from_toml("grid_n = 1"), Err(Error::Config(_))));
        assert!(matches!(
            SweepConfig::from_toml("a_range = [3.0, 3.0]"),
            Err(Error::Config(_))
        ));
        assert!(matches!(SweepConfig::from_toml("bogus = 1"), Err(Error::Config(_))));
        let wrong = "pairs = []\nmethods = [{ method = \"tuan\", q = 3 }]";
        assert!(matches!(SweepConfig::from_toml(wrong), Err(Error::WrongFold { .. })));
        let capped = "pairs = []\ncap = 10\nmethods = [{ method = \"amgm\", q = 4 }]";
        assert!(matches!(SweepConfig::from_toml(capped), Err(Error::CapExceeded { .. })));
    }

    #[test]
    fn method_labels() {
        let mf = MethodFold::parse("polya:3").unwrap();
        assert_eq!(mf, MethodFold::new(Method::Polya, 3));
        assert_eq!(mf.label(), "polya:3");
        assert!(MethodFold::parse("polya").is_err());
    }

    #[test]
    fn csv_round_trip() {
        let rows = vec![SweepRow {
            a: 0.5,
            b: 10.0,
            method: MethodFold::new(Method::Amgm, 3),
            status: Status::Inconclusive,
            margin: f64::NAN,
            constraints: 48,
            solve_ms: 1.25,
            flag: "numerical_failure: x, y".into(),
            witness: None,
        }];
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        let back = read_csv(buf.as_slice()).unwrap();
        assert_eq!(back[0].flag, rows[0].flag);
        assert!(back[0].margin.is_nan());
        assert_eq!((back[0].a, back[0].b, back[0].constraints), (0.5, 10.0, 48));
    }
}
