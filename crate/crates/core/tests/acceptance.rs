//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Criteria whose failure reproduces a documented finding about the source
//! claims are listed in `RECORDED_FINDINGS`; they still print FAIL, but only
//! an unrecorded failure makes this target exit nonzero.

mod common;

use std::collections::BTreeMap;
use std::process::Command;
use std::time::{Duration, Instant};

use plmi::combinat::multiplicity_factorial;
use plmi::matexpr::{make_example_spec, MembershipVector};
use plmi::oracle::{identity_case, integer_checks};
use plmi::relax::{
    count_constraints, gen_amgm, gen_amgm3, gen_amgm4, gen_kimlee2, gen_polya, same_constraints, Method,
};
use plmi::sdp::{lambda_max, solve_feasibility, Status};
use plmi::sweep::{export_cell, plot_data, point_problem, run_sweep, MethodFold, SweepConfig, SweepOutput};
use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const RECORDED_FINDINGS: [u32; 2] = [5, 6];

struct Outcome {
    id: u32,
    title: &'static str,
    pass: bool,
    detail: String,
    elapsed: Duration,
}

fn timed(id: u32, title: &'static str, f: impl FnOnce() -> (bool, String)) -> Outcome {
    let start = Instant::now();
    let (pass, detail) = f();
    let o = Outcome {
        id,
        title,
        pass,
        detail,
        elapsed: start.elapsed(),
    };
    println!(
        "{} criterion {}: {} ({:.2} s) {}",
        if o.pass { "PASS" } else { "FAIL" },
        o.id,
        o.title,
        o.elapsed.as_secs_f64(),
        o.detail
    );
    o
}

fn criterion_1() -> (bool, String) {
    let start = Instant::now();
    let checks = integer_checks(8, 12).expect("integer checks run");
    let elapsed = start.elapsed();
    let failed: Vec<_> = checks.iter().filter(|c| !c.passed()).map(|c| (c.q, c.r)).collect();
    (
        failed.is_empty() && checks.len() == 8 * 12 && elapsed < Duration::from_secs(1),
        format!(
            "{} cases, failing {failed:?}, {:.3} s (limit 1 s)",
            checks.len(),
            elapsed.as_secs_f64()
        ),
    )
}

fn criterion_2() -> (bool, String) {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut failed = Vec::new();
    for q in 3..=5 {
        for r in 2..=4 {
            let case =
                identity_case(q, r, 100, 2024 + (q * 10 + r) as u64, &multiplicity_factorial).expect("suite runs");
            worst = worst.max(case.max_residual);
            if !case.passed {
                failed.push((q, r, case.max_residual, case.exact_zero));
            }
        }
    }
    let elapsed = start.elapsed();
    (
        failed.is_empty() && elapsed < Duration::from_secs(30),
        format!(
            "max relative residual {worst:.2e} (tol 1e-10), exact mode zero, failing {failed:?}, {:.2} s (limit 30 s)",
            elapsed.as_secs_f64()
        ),
    )
}

fn criterion_3() -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let mut cases = Vec::new();
    for r in 2..=4 {
        let spec = common::random_spec(2, r, 2, &mut rng);
        cases.push((
            format!("q=2 r={r}"),
            same_constraints(&gen_amgm(&spec).unwrap(), &gen_kimlee2(&spec).unwrap()),
        ));
        let spec = common::random_spec(3, r, 2, &mut rng);
        cases.push((
            format!("q=3 r={r}"),
            same_constraints(&gen_amgm(&spec).unwrap(), &gen_amgm3(&spec).unwrap()),
        ));
    }
    for r in 2..=3 {
        let spec = common::random_spec(4, r, 2, &mut rng);
        cases.push((
            format!("q=4 r={r}"),
            same_constraints(&gen_amgm(&spec).unwrap(), &gen_amgm4(&spec).unwrap()),
        ));
    }
    // 4·2^18 constraints per family; a scalar variable-free spec keeps this in memory
    let spec = common::random_constant_spec(4, 4, &mut rng);
    cases.push((
        "q=4 r=4 (scalar)".into(),
        same_constraints(&gen_amgm(&spec).unwrap(), &gen_amgm4(&spec).unwrap()),
    ));
    let bad: Vec<_> = cases.iter().filter(|c| !c.1).map(|c| c.0.clone()).collect();
    (
        bad.is_empty(),
        format!("{} spec pairs set-equal, mismatches {bad:?}", cases.len() - bad.len()),
    )
}

fn criterion_4() -> (bool, String) {
    let mut notes = Vec::new();
    let mut ok = true;
    let mut check = |label: String, emitted: usize, expected: u128| {
        if emitted as u128 != expected {
            ok = false;
            notes.push(format!("{label}: {emitted} != {expected}"));
        }
    };
    for (q, want_amgm, want_polya) in [(3usize, 48u128, 10u128), (4, 192, 15)] {
        let spec = make_example_spec(1.0, 2.0, q).unwrap();
        let a = gen_amgm(&spec).unwrap().len();
        let p = gen_polya(&spec).unwrap().len();
        check(format!("amgm q={q}"), a, want_amgm);
        check(
            format!("amgm q={q} closed form"),
            a,
            count_constraints(Method::Amgm, q, 3).unwrap(),
        );
        check(format!("polya q={q}"), p, want_polya);
        check(
            format!("polya q={q} closed form"),
            p,
            count_constraints(Method::Polya, q, 3).unwrap(),
        );
    }
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for r in 1..=6 {
        let spec = common::random_spec(2, r, 1, &mut rng);
        let k = gen_kimlee2(&spec).unwrap().len();
        check(format!("kimlee2 r={r}"), k, (r as u128) << (r - 1));
        check(
            format!("kimlee2 r={r} closed form"),
            k,
            count_constraints(Method::Kimlee2, 2, r).unwrap(),
        );
    }
    let detail = if ok {
        "amgm 48/192, polya 10/15, kimlee2 r*2^(r-1) for r <= 6".to_string()
    } else {
        notes.join("; ")
    };
    (ok, detail)
}

fn criterion_5(sweep: &SweepOutput) -> (bool, String) {
    let mut per_method: BTreeMap<String, (usize, usize, f64)> = BTreeMap::new();
    let mut cross_checked = true;
    for p in &sweep.soundness {
        let e = per_method.entry(p.method.clone()).or_insert((0, 0, f64::NEG_INFINITY));
        e.0 += 1;
        if p.report.violations > 0 {
            e.1 += 1;
            e.2 = e.2.max(p.report.max_lambda);
            // confirm the worst sample through the symbolic evaluation path
            let row = sweep
                .rows
                .iter()
                .find(|r| r.a == p.a && r.b == p.b && r.method.label() == p.method)
                .expect("row for every soundness report");
            let spec = make_example_spec(p.a, p.b, row.method.q).unwrap();
            let h = MembershipVector::new(p.report.worst_h.clone()).unwrap();
            let direct = lambda_max(&spec.eval_plmi(&h, row.witness.as_ref().unwrap()).unwrap()).unwrap();
            cross_checked &= (direct - p.report.max_lambda).abs() <= 1e-8 * (1.0 + direct.abs());
        }
    }
    let feasible = sweep
        .rows
        .iter()
        .filter(|r| r.status == Status::FeasibleWithMargin)
        .count();
    let violations = sweep.soundness_violations();
    let summary: Vec<String> = per_method
        .iter()
        .map(|(m, (n, bad, worst))| {
            if *bad > 0 {
                format!("{m}: {bad}/{n} points violate (worst lambda_max {worst:.3})")
            } else {
                format!("{m}: 0/{n}")
            }
        })
        .collect();
    (
        violations == 0 && sweep.soundness.len() == feasible,
        format!(
            "{} feasible cells, {} samples each plus vertices and midpoints, {violations} violating samples; {}; direct re-evaluation agrees: {cross_checked}",
            feasible,
            sweep.config.soundness_samples,
            summary.join(", ")
        ),
    )
}

fn criterion_6() -> (bool, String) {
    let cfg = SweepConfig {
        methods: vec![MethodFold::new(Method::Polya, 3)],
        pairs: vec![],
        soundness_samples: 0,
        ..SweepConfig::default()
    };
    let start = Instant::now();
    let out = run_sweep(&cfg).expect("sweep runs");
    let elapsed = start.elapsed();
    let count = |s: Status| out.rows.iter().filter(|r| r.status == s).count();
    let feasible: Vec<(f64, f64)> = out
        .rows
        .iter()
        .filter(|r| r.status == Status::FeasibleWithMargin)
        .map(|r| (r.a, r.b))
        .collect();
    let margins: Vec<String> = out
        .rows
        .iter()
        .filter(|r| r.status == Status::FeasibleWithMargin)
        .map(|r| format!("{:.3}", r.margin))
        .collect();
    (
        count(Status::Infeasible) == 121 && elapsed < Duration::from_secs(120),
        format!(
            "infeasible {}/121, inconclusive {}, feasible at {feasible:?} with margins {margins:?}, {:.1} s (limit 120 s)",
            count(Status::Infeasible),
            count(Status::Inconclusive),
            elapsed.as_secs_f64()
        ),
    )
}

fn criterion_7(sweep: &SweepOutput, elapsed: Duration) -> (bool, String) {
    let find = |x: &str, y: &str| {
        sweep
            .containment
            .iter()
            .find(|c| c.first == x && c.second == y)
            .expect("configured pair")
    };
    let pa = find("polya:4", "amgm:4");
    let tk = find("tuan:2", "kimlee2:2");
    let amgm3 = sweep
        .rows
        .iter()
        .filter(|r| r.method.label() == "amgm:3" && r.status == Status::FeasibleWithMargin)
        .count();
    (
        pa.first_not_second.is_empty() && tk.first_not_second.is_empty() && amgm3 > 0 && elapsed < Duration::from_secs(600),
        format!(
            "polya:4 not amgm:4 {:?}, tuan:2 not kimlee2:2 {:?}, amgm:3 feasible at {amgm3}/121, inconclusive cells {}+{}, sweep {:.1} s (limit 600 s)",
            pa.first_not_second,
            tk.first_not_second,
            pa.inconclusive.len(),
            tk.inconclusive.len(),
            elapsed.as_secs_f64()
        ),
    )
}

fn criterion_8(sweep: &SweepOutput) -> (bool, String) {
    let plot = plot_data(&sweep.config, &sweep.rows);
    let complete = plot
        .series
        .iter()
        .all(|s| s.feasible.len() + s.infeasible.len() + s.inconclusive.len() == 121);
    (
        complete && plot.series.len() == sweep.config.methods.len(),
        "point-exact figure reproduction is out of scope; plot data lists every grid point per method and status"
            .into(),
    )
}

fn criterion_9(sweep: &SweepOutput) -> (bool, String) {
    let script = concat!(env!("CARGO_MANIFEST_DIR"), "/../../scripts/sdpa_check.py");
    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let picks: Vec<_> = sweep.rows.choose_multiple(&mut rng, 5).cloned().collect();
    let mut compared = 0;
    let mut excluded = 0;
    let mut disagreements = Vec::new();
    let mut notes = Vec::new();
    for row in &picks {
        let file = export_cell(row.a, row.b, row.method, &sweep.config, dir.path()).unwrap();
        let (_, problem) = point_problem(row.a, row.b, row.method, &sweep.config).unwrap();
        let res = solve_feasibility(&problem, &sweep.config.solver).unwrap();
        let out = match Command::new("python3").arg(script).arg(&file).output() {
            Ok(o) if o.status.success() => o,
            Ok(o) => {
                return (
                    false,
                    format!("external solver failed: {}", String::from_utf8_lossy(&o.stderr)),
                )
            }
            Err(e) => return (false, format!("python3 unavailable: {e}")),
        };
        let v: serde_json::Value = serde_json::from_slice(&out.stdout).expect("script prints JSON");
        let Some(t) = v["objective"].as_f64() else {
            return (
                false,
                format!("external solver gave no objective for {}", file.display()),
            );
        };
        let ext = if t < -res.epsilon {
            Status::FeasibleWithMargin
        } else if t > res.epsilon {
            Status::Infeasible
        } else {
            Status::Inconclusive
        };
        notes.push(format!(
            "{}@({},{}) {} t*={t:.4e} ours {:.4e}",
            row.method.label(),
            row.a,
            row.b,
            v["solver"].as_str().unwrap_or("?"),
            res.margin
        ));
        if ext == Status::Inconclusive || row.status == Status::Inconclusive {
            excluded += 1;
            continue;
        }
        compared += 1;
        if ext != row.status {
            disagreements.push(format!("{}@({},{})", row.method.label(), row.a, row.b));
        }
    }
    (
        disagreements.is_empty() && compared > 0,
        format!(
            "{compared} compared, {excluded} in the band, disagreements {disagreements:?}; {}",
            notes.join("; ")
        ),
    )
}

fn main() {
    // let `cargo test -- <filter>` and `--list` behave sensibly
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.iter().any(|a| a == "--list") {
        println!("acceptance: test");
        return;
    }
    if args
        .iter()
        .any(|a| !a.starts_with('-') && !"acceptance".contains(a.as_str()))
    {
        return;
    }

    let mut outcomes = vec![
        timed(1, "combinatorial exactness", criterion_1),
        timed(2, "summation identities", criterion_2),
        timed(3, "specialization equivalence", criterion_3),
        timed(4, "constraint counts", criterion_4),
    ];

    let cfg = SweepConfig::default();
    let start = Instant::now();
    let sweep = run_sweep(&cfg).expect("default sweep runs");
    let sweep_time = start.elapsed();

    outcomes.push(timed(5, "solver soundness on the sweep", || criterion_5(&sweep)));
    outcomes.push(timed(6, "Polya 3-fold emptiness", criterion_6));
    outcomes.push(timed(7, "AM-GM dominance and nonempty 3-fold region", || {
        criterion_7(&sweep, sweep_time)
    }));
    outcomes.push(timed(8, "figure reproduction scope", || criterion_8(&sweep)));
    outcomes.push(timed(9, "external SDPA cross-check", || criterion_9(&sweep)));
    outcomes.sort_by_key(|o| o.id);

    let failed: Vec<u32> = outcomes.iter().filter(|o| !o.pass).map(|o| o.id).collect();
    let unexpected: Vec<u32> = failed
        .iter()
        .copied()
        .filter(|id| !RECORDED_FINDINGS.contains(id))
        .collect();
    println!(
        "acceptance: {} of {} criteria pass; failing {failed:?} (recorded findings {RECORDED_FINDINGS:?})",
        outcomes.len() - failed.len(),
        outcomes.len()
    );
    if !unexpected.is_empty() {
        println!("acceptance: unexpected failures {unexpected:?}");
        std::process::exit(1);
    }
}
