//! A coarse sweep of the (a, b) rectangle for a few relaxations, written
//! to an output directory.
//!
//! cargo run --release --example sweep_grid -- [grid_n] [out_dir]

use plmi::relax::Method;
use plmi::sweep::{run_sweep, summary, write_outputs, MethodFold, SweepConfig};

fn main() -> plmi::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let grid_n: usize = args.first().and_then(|s| s.parse().ok()).unwrap_or(4);
    let out_dir = args.get(1).cloned().unwrap_or_else(|| "sweep_out".into());

    let cfg = SweepConfig {
        grid_n,
        methods: vec![
            MethodFold::new(Method::Tuan, 2),
            MethodFold::new(Method::Kimlee2, 2),
            MethodFold::new(Method::Polya, 3),
            MethodFold::new(Method::Amgm, 3),
        ],
        pairs: vec![
            ["tuan:2".into(), "kimlee2:2".into()],
            ["polya:3".into(), "amgm:3".into()],
        ],
        soundness_samples: 200,
        ..SweepConfig::default()
    };
    let out = run_sweep(&cfg)?;
    write_outputs(&out, out_dir.as_ref())?;
    print!("{}", summary(&cfg, &out.rows));
    for c in &out.containment {
        println!("{} but not {}: {:?}", c.first, c.second, c.first_not_second);
    }
    println!("soundness violations: {}", out.soundness_violations());
    Ok(())
}
