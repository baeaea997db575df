//! Solves one relaxation at one grid point and samples the original
//! summation at the witness over the simplex.
//!
//! cargo run --release --example soundness -- [method] [q] [a] [b] [samples]

use plmi::matexpr::{make_example_spec, MembershipVector};
use plmi::oracle::soundness_sample;
use plmi::relax::{Method, DEFAULT_CAP};
use plmi::sdp::{lambda_max, solve_feasibility, stabilization_problem, SolverOptions};
use rand::SeedableRng;

fn main() -> plmi::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let method: Method = args.first().map_or("amgm", String::as_str).parse()?;
    let q: usize = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(4);
    let a: f64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(0.0);
    let b: f64 = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(0.0);
    let n: usize = args.get(4).and_then(|s| s.parse().ok()).unwrap_or(1000);

    let spec = make_example_spec(a, b, q)?;
    let opts = SolverOptions::default();
    let problem = stabilization_problem(&spec, method.generate(&spec, DEFAULT_CAP)?, opts.ball_radius)?;
    let res = solve_feasibility(&problem, &opts)?;
    println!("{method} q={q} at ({a}, {b}): {} margin {:.4e}", res.status, res.margin);
    let Some(x) = res.witness.clone() else {
        return Ok(());
    };

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
    let report = soundness_sample(&spec, &res, n, &mut rng)?;
    println!(
        "{} points, {} with lambda_max >= 0, worst {:.4e} at h = {:?}",
        report.samples, report.violations, report.max_lambda, report.worst_h
    );
    if report.violations > 0 {
        let h = MembershipVector::new(report.worst_h.clone())?;
        let direct = lambda_max(&spec.eval_plmi(&h, &x)?)?;
        println!("direct evaluation at the worst point: {direct:.4e}");
    }
    Ok(())
}
