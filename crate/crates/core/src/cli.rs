//! The `plmi` command line.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::combinat::multiplicity_factorial;
use crate::error::{Error, Result};
use crate::matexpr::{make_example_spec, PlmiSpec, SpecFile};
use crate::oracle::{identity_case, integer_checks, IdentityCase, IntegerCheck};
use crate::relax::{count_constraints, Method};
use crate::sdp::{export_sdpa, parse_sdpa, solve_feasibility, write_sdpa, SdpaProblem, SolverOptions};
use crate::sweep::{
    build_problem, containment_from_rows, read_containment, read_csv, run_sweep, summary, write_outputs, SweepConfig,
    SCHEMA_VERSION,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "plmi",
    version,
    about = "Finite LMI relaxations of nested fuzzy-summation PLMIs"
)]
pub struct Cli {
    /// TOML configuration (sweep keys plus a [solver] table).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (defaults to the number of CPUs).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[arg(long, global = true, default_value = "out")]
    pub out_dir: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the summation identities and the exact integer identities.
    Identities(IdentitiesArgs),
    /// Generate a constraint family and list it.
    Generate(ProblemArgs),
    /// Generate a constraint family and decide its feasibility.
    Solve(ProblemArgs),
    /// Sweep the example over the (a, b) grid.
    Sweep,
    /// Recompute containment from a sweep CSV.
    Compare(CompareArgs),
}

#[derive(Debug, Args)]
pub struct IdentitiesArgs {
    #[arg(long, default_value_t = 5)]
    pub q_max: usize,
    #[arg(long, default_value_t = 4)]
    pub r_max: usize,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, default_value_t = 8)]
    pub int_q_max: usize,
    #[arg(long, default_value_t = 12)]
    pub int_r_max: usize,
    /// Replace every symmetry factor by 1 (negative control).
    #[arg(long, hide = true)]
    pub corrupt_mu: bool,
}

#[derive(Debug, Args)]
pub struct ProblemArgs {
    /// JSON spec file; the built-in example is used when absent.
    #[arg(long, conflicts_with = "example")]
    pub spec: Option<PathBuf>,
    /// Built-in example at `a,b`.
    #[arg(long, value_parser = parse_pair)]
    pub example: Option<(f64, f64)>,
    #[arg(long, default_value = "amgm")]
    pub method: Method,
    /// Fold count; defaults to the spec's own fold, or the method's, or 3.
    #[arg(long)]
    pub q: Option<usize>,
    /// Write the SDPA problem to this path.
    #[arg(long)]
    pub export_sdpa: Option<PathBuf>,
    /// Print one line per constraint with its provenance.
    #[arg(long)]
    pub list: bool,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Sweep CSV; defaults to the configured name inside --out-dir.
    pub csv: Option<PathBuf>,
    /// Ordered pairs `first,second` of `method:q` labels; defaults to the configured pairs.
    #[arg(long = "pair", value_parser = parse_label_pair)]
    pub pairs: Vec<[String; 2]>,
}

fn parse_pair(s: &str) -> std::result::Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or("expected a,b")?;
    let f = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("`{t}`: {e}"));
    Ok((f(a)?, f(b)?))
}

fn parse_label_pair(s: &str) -> std::result::Result<[String; 2], String> {
    let (a, b) = s.split_once(',').ok_or("expected first,second")?;
    Ok([a.trim().to_string(), b.trim().to_string()])
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NumericalFailure(_) => EXIT_NUMERICAL,
        _ => EXIT_CONFIG,
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn load_config(cli: &Cli) -> Result<SweepConfig> {
    let mut cfg = match &cli.config {
        Some(p) => SweepConfig::load(p)?,
        None => SweepConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

pub fn run(cli: &Cli) -> Result<i32> {
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(j) = cli.jobs {
        if j == 0 {
            return Err(Error::Config("--jobs must be at least 1".into()));
        }
        pool = pool.num_threads(j);
    }
    let pool = pool.build().map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    pool.install(|| match &cli.command {
        Command::Identities(a) => cmd_identities(cli, a),
        Command::Generate(a) => cmd_problem(cli, a, false),
        Command::Solve(a) => cmd_problem(cli, a, true),
        Command::Sweep => cmd_sweep(cli),
        Command::Compare(a) => cmd_compare(cli, a),
    })
}

#[derive(Debug, Serialize)]
struct IdentityReport {
    schema_version: u32,
    seed: u64,
    trials: usize,
    passed: bool,
    integer: Vec<IntegerCheck>,
    summation: Vec<IdentityCase>,
}

fn cmd_identities(cli: &Cli, args: &IdentitiesArgs) -> Result<i32> {
    use rayon::prelude::*;
    let seed = cli.seed.unwrap_or(0);
    let integer = integer_checks(args.int_q_max, args.int_r_max)?;
    let corrupt = |_: &crate::combinat::Partition| 1u128;
    let mu: &(dyn Fn(&crate::combinat::Partition) -> u128 + Sync) = if args.corrupt_mu {
        &corrupt
    } else {
        &multiplicity_factorial
    };
    let summation = if args.trials == 0 {
        Vec::new()
    } else {
        let cases: Vec<(usize, usize)> = (1..=args.q_max)
            .flat_map(|q| (1..=args.r_max).map(move |r| (q, r)))
            .collect();
        cases
            .par_iter()
            .map(|&(q, r)| identity_case(q, r, args.trials, seed ^ ((q as u64) << 32 | r as u64), mu))
            .collect::<Result<Vec<_>>>()?
    };
    let passed = integer.iter().all(IntegerCheck::passed) && summation.iter().all(|c| c.passed);
    for c in &integer {
        if !c.passed() {
            println!("FAIL integer q={} r={}: {:?}", c.q, c.r, c);
        }
    }
    println!(
        "integer identities: {}/{} cases pass (q <= {}, r <= {})",
        integer.iter().filter(|c| c.passed()).count(),
        integer.len(),
        args.int_q_max,
        args.int_r_max
    );
    for c in &summation {
        println!(
            "{} q={} r={} trials={} max_residual={:.3e} exact={}{}",
            if c.passed { "ok  " } else { "FAIL" },
            c.q,
            c.r,
            c.trials,
            c.max_residual,
            c.exact_zero,
            c.worst_seed
                .filter(|_| !c.passed)
                .map(|s| format!(" replay_seed={s}"))
                .unwrap_or_default()
        );
    }
    std::fs::create_dir_all(&cli.out_dir)?;
    let report = IdentityReport {
        schema_version: SCHEMA_VERSION,
        seed,
        trials: args.trials,
        passed,
        integer,
        summation,
    };
    let path = cli.out_dir.join("identities.json");
    std::fs::write(
        &path,
        serde_json::to_string_pretty(&report).expect("serializable") + "\n",
    )?;
    println!("report: {}", path.display());
    Ok(if passed { EXIT_OK } else { EXIT_CHECK_FAILED })
}

fn load_spec(args: &ProblemArgs) -> Result<PlmiSpec> {
    match (&args.spec, args.example) {
        (Some(path), _) => {
            let spec = SpecFile::load(path)?.to_spec()?;
            match args.q {
                Some(q) if q != spec.q() => spec.with_fold(q),
                _ => Ok(spec),
            }
        }
        (None, ex) => {
            let (a, b) = ex.unwrap_or((0.0, 0.0));
            let q = args.q.or(args.method.required_fold()).unwrap_or(3);
            make_example_spec(a, b, q)
        }
    }
}

fn solver_options(cli: &Cli) -> Result<SolverOptions> {
    Ok(load_config(cli)?.solver)
}

fn check_round_trip(problem: &crate::sdp::FeasibilityProblem, path: &Path) -> Result<()> {
    export_sdpa(problem, path)?;
    let text = std::fs::read_to_string(path)?;
    let parsed = parse_sdpa(&text)?;
    if parsed != SdpaProblem::from_problem(problem) || write_sdpa(&parsed) != text {
        return Err(Error::NumericalFailure(format!(
            "{} does not round-trip",
            path.display()
        )));
    }
    Ok(())
}

fn cmd_problem(cli: &Cli, args: &ProblemArgs, solve: bool) -> Result<i32> {
    let cfg = load_config(cli)?;
    let opts = solver_options(cli)?;
    let spec = load_spec(args)?;
    let count = count_constraints(args.method, spec.q(), spec.r())?;
    let set = args.method.generate(&spec, cfg.cap as u128)?;
    println!(
        "method {} q={} r={} dim={}: {} constraints (closed form {}), {} variables",
        args.method,
        spec.q(),
        spec.r(),
        spec.dim(),
        set.len(),
        count,
        spec.registry().len()
    );
    if args.list {
        for (i, (_, p)) in set.iter().enumerate() {
            println!("{i:>6}  {p}");
        }
    }
    let problem = build_problem(&spec, set, opts.ball_radius)?;
    if problem.len() > problem.set.len() {
        println!("side constraints: {}", problem.len() - problem.set.len());
    }
    if let Some(path) = &args.export_sdpa {
        check_round_trip(&problem, path)?;
        println!("sdpa: {}", path.display());
    }
    if !solve {
        return Ok(EXIT_OK);
    }
    let res = solve_feasibility(&problem, &opts)?;
    println!(
        "status {} margin {:.9e} lower_bound {:.9e} epsilon {:.3e} ({} outer, {} newton, {:.1} ms)",
        res.status,
        res.margin,
        res.lower_bound,
        res.epsilon,
        res.outer_iterations,
        res.newton_steps,
        res.wall_time.as_secs_f64() * 1e3
    );
    if let Some(x) = &res.witness {
        for (s, v) in spec.registry().scalars().iter().zip(x) {
            println!("  {} = {v:.12e}", s.name);
        }
    }
    Ok(EXIT_OK)
}

fn cmd_sweep(cli: &Cli) -> Result<i32> {
    let cfg = load_config(cli)?;
    let out = run_sweep(&cfg)?;
    write_outputs(&out, &cli.out_dir)?;
    print!("{}", summary(&cfg, &out.rows));
    for c in &out.containment {
        println!(
            "{} feasible but not {}: {} points ({} inconclusive)",
            c.first,
            c.second,
            c.first_not_second.len(),
            c.inconclusive.len()
        );
    }
    let violations = out.soundness_violations();
    println!(
        "soundness: {} feasible points sampled, {} violating samples",
        out.soundness.len(),
        violations
    );
    println!("outputs: {}", cli.out_dir.display());
    Ok(if violations == 0 { EXIT_OK } else { EXIT_CHECK_FAILED })
}

fn cmd_compare(cli: &Cli, args: &CompareArgs) -> Result<i32> {
    let mut cfg = load_config(cli)?;
    if !args.pairs.is_empty() {
        cfg.pairs = args.pairs.clone();
        cfg.validate()?;
    }
    let csv_path = args.csv.clone().unwrap_or_else(|| cli.out_dir.join(&cfg.csv));
    let rows = read_csv(
        std::fs::File::open(&csv_path)
            .map_err(|e| Error::Config(format!("cannot open {}: {e}", csv_path.display())))?,
    )?;
    let recomputed = containment_from_rows(&cfg, &rows)?;
    print!("{}", summary(&cfg, &rows));
    let mut code = EXIT_OK;
    for c in &recomputed {
        println!("{} feasible but not {}: {:?}", c.first, c.second, c.first_not_second);
        println!("{} feasible but not {}: {:?}", c.second, c.first, c.second_not_first);
        if !c.inconclusive.is_empty() {
            println!("inconclusive: {:?}", c.inconclusive);
        }
        if !c.first_not_second.is_empty() {
            code = EXIT_CHECK_FAILED;
        }
    }
    let stored = csv_path.with_file_name(&cfg.containment);
    if args.pairs.is_empty() && stored.exists() {
        let report = read_containment(&stored)?;
        if report.pairs == recomputed {
            println!("{} matches the recomputation", stored.display());
        } else {
            println!("{} differs from the recomputation", stored.display());
            code = EXIT_CHECK_FAILED;
        }
    }
    Ok(code)
}
