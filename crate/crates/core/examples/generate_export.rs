//! Generates every relaxation of the three-rule example, compares counts
//! with the closed forms, and writes one SDPA file.
//!
//! cargo run --example generate_export -- [out.dat-s]

use plmi::matexpr::make_example_spec;
use plmi::relax::{canonicalize, count_constraints, same_constraints, Method, DEFAULT_CAP};
use plmi::sdp::{export_sdpa, parse_sdpa, SdpaProblem};
use plmi::sweep::build_problem;

fn main() -> plmi::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "amgm_q4.dat-s".into());

    for (method, q) in [
        (Method::Vertex, 3),
        (Method::Tuan, 2),
        (Method::Kimlee2, 2),
        (Method::Polya, 3),
        (Method::Polya, 4),
        (Method::Amgm, 3),
        (Method::Amgm, 4),
    ] {
        let spec = make_example_spec(2.0, 3.0, q)?;
        let set = method.generate(&spec, DEFAULT_CAP)?;
        println!(
            "{method:<8} q={q}  emitted {:>4}  closed form {:>4}  distinct {:>4}",
            set.len(),
            count_constraints(method, q, spec.r())?,
            canonicalize(&set).len()
        );
    }

    let spec = make_example_spec(2.0, 3.0, 4)?;
    let general = Method::Amgm.generate(&spec, DEFAULT_CAP)?;
    let direct = Method::Amgm4.generate(&spec, DEFAULT_CAP)?;
    println!("amgm (q=4) equals amgm4: {}", same_constraints(&general, &direct));
    for (c, p) in general.iter().take(3) {
        println!("  {p}: {} terms", c.terms().len());
    }

    let problem = build_problem(&spec, general, 1e3)?;
    export_sdpa(&problem, out.as_ref())?;
    let back = parse_sdpa(&std::fs::read_to_string(&out)?)?;
    println!(
        "wrote {out}: {} blocks, round trip exact: {}",
        back.block_sizes.len(),
        back == SdpaProblem::from_problem(&problem)
    );
    Ok(())
}
