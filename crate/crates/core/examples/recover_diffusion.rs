//! Recovers the fractional order and the concentration-dependent diffusion
//! coefficient from a small synthetic dataset.
//!
//! `cargo run --release --example recover_diffusion -- [iterations] [noise]`

use fracpinn::app::{run_ad, synthesize_ad};
use fracpinn::io::{Recovered, RunConfig, Scores};

fn main() -> fracpinn::Result<()> {
    let mut args = std::env::args().skip(1);
    let iterations = args.next().map_or(Ok(2000), |a| a.parse()).expect("iterations");
    let noise = args.next().map_or(Ok(0.0), |a| a.parse()).expect("noise level");

    let mut cfg = RunConfig::from_toml("[generate_ad]\nn = 21\nstride = 2\nsteps = 10\n")?;
    cfg.generate_ad.noise = noise;
    cfg.train_ad.iterations = iterations;
    let (ds, truth) = synthesize_ad(&cfg)?;
    println!("{} samples, {} locations, {} time levels", ds.len(), ds.n_locations(), ds.n_times());

    let bundle = run_ad(&cfg, &ds, Some(&truth))?;
    for r in bundle.history.iter().step_by((iterations / 10).max(1)) {
        println!("{:>7} total {:.4e} data {:.4e} consistency {:.4e}", r.iteration, r.total, r.data, r.consistency);
    }
    if let Recovered::Ad { alpha } = bundle.metrics.recovered {
        println!("alpha = {alpha:.4} (true {})", truth.alpha);
    }
    if let Some(Scores::Ad(s)) = bundle.metrics.errors {
        println!("relative errors: alpha {:.3e}, D {:.3e}", s.alpha_relative, s.diffusion_relative_l2);
    }
    let c = &bundle.curve;
    for i in (0..c.x.len()).step_by(c.x.len() / 8) {
        println!("  D({:.3}) = {:.5}  true {:.5}", c.x[i], c.y[i], truth.diffusion.value(c.x[i]));
    }
    Ok(())
}
