//! Calibrates κ, η and ν from a synthetic ramp-and-hold relaxation test and
//! reports the recovered relaxation modulus.
//!
//! `cargo run --release --example calibrate_maxwell -- [iterations] [noise]`

use fracpinn::app::{run_fm, synthesize_fm};
use fracpinn::io::{Recovered, RunConfig, Scores};

fn main() -> fracpinn::Result<()> {
    let mut args = std::env::args().skip(1);
    let iterations = args.next().map_or(Ok(5000), |a| a.parse()).expect("iterations");
    let noise = args.next().map_or(Ok(0.0), |a| a.parse()).expect("noise level");

    let mut cfg = RunConfig::from_toml("[generate_fm]\npoints = 256\n")?;
    cfg.generate_fm.noise = noise;
    cfg.train_fm.iterations = iterations;
    let (ds, truth) = synthesize_fm(&cfg)?;
    let bundle = run_fm(&cfg, &ds, Some(&truth))?;

    if let Recovered::Fm { kappa, eta, nu } = bundle.metrics.recovered {
        println!("kappa {kappa:.4} (true {}), eta {eta:.4} (true {}), nu {nu:.4} (true {})", truth.kappa, truth.eta, truth.nu);
    }
    if let Some(Scores::Fm(s)) = bundle.metrics.errors {
        println!("G(t) relative L2 error {:.3e}", s.modulus_relative_l2);
    }
    let g = &bundle.curve;
    for i in (0..g.x.len()).step_by(g.x.len() / 8) {
        println!("  G({:.2}) = {:.5}", g.x[i], g.y[i]);
    }
    Ok(())
}
