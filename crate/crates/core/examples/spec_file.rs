//! Loads a user-written summation from JSON, generates a relaxation and
//! solves it.
//!
//! cargo run --example spec_file -- [path] [method]
//!
//! `data/amgm_counterexample.json` is a constant scalar summation whose
//! AM-GM constraints are all negative while the summation itself is
//! positive near h = (0.9, 0.1).

use plmi::matexpr::{MembershipVector, SpecFile};
use plmi::relax::{Method, DEFAULT_CAP};
use plmi::sdp::solve_feasibility;
use plmi::sweep::build_problem;

fn main() -> plmi::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let default = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data/amgm_counterexample.json");
    let path = args.first().map_or(default, String::as_str);
    let method: Method = args.get(1).map_or("amgm", String::as_str).parse()?;

    let spec = SpecFile::load(path.as_ref())?.to_spec()?;
    let set = method.generate(&spec, DEFAULT_CAP)?;
    println!(
        "{path}: q={} r={} dim={}, {method} gives {} constraints",
        spec.q(),
        spec.r(),
        spec.dim(),
        set.len()
    );
    let problem = build_problem(&spec, set, 1e3)?;
    let res = solve_feasibility(&problem, &Default::default())?;
    println!("status {} margin {:.4e}", res.status, res.margin);

    let x = res.witness.unwrap_or_else(|| vec![0.0; spec.registry().len()]);
    for w in [0.1, 0.5, 0.9] {
        let h = MembershipVector::new(vec![w, 1.0 - w])?;
        let v = spec.eval_plmi(&h, &x)?;
        println!("h1 = {w}: largest eigenvalue {:.4e}", plmi::sdp::lambda_max(&v)?);
    }
    Ok(())
}
