//! Decides feasibility of one relaxation at one point of the three-rule
//! example and checks the witness on the simplex.
//!
//! cargo run --example solve_point -- [method] [q] [a] [b]

use plmi::matexpr::make_example_spec;
use plmi::relax::{Method, DEFAULT_CAP};
use plmi::sdp::{solve_feasibility, stabilization_problem, SolverOptions};

fn main() -> plmi::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let method: Method = args.first().map_or("amgm", String::as_str).parse()?;
    let q: usize = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(3);
    let a: f64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(0.0);
    let b: f64 = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(0.0);

    let spec = make_example_spec(a, b, q)?;
    let set = method.generate(&spec, DEFAULT_CAP)?;
    let opts = SolverOptions::default();
    let problem = stabilization_problem(&spec, set, opts.ball_radius)?;
    let res = solve_feasibility(&problem, &opts)?;
    println!(
        "{method} q={q} (a,b)=({a},{b}): {} constraints, status {}, margin {:.6e}, lower bound {:.6e}, {} outer / {} newton, {:?}",
        problem.len(),
        res.status,
        res.margin,
        res.lower_bound,
        res.outer_iterations,
        res.newton_steps,
        res.wall_time
    );
    if let Some(x) = &res.witness {
        let names: Vec<String> = spec
            .registry()
            .scalars()
            .iter()
            .zip(x)
            .map(|(s, v)| format!("{}={v:.4}", s.name))
            .collect();
        println!("witness: {}", names.join(" "));
    }
    Ok(())
}
