//! Forward simulation of the benchmark sub-diffusion problem: peak height
//! over time for several fractional orders.

use fracpinn::fraccalc::FracOrder;
use fracpinn::sim::{gaussian_bump, max_stable_dt, solve_frac_diffusion, DiffusionSpec, Grid2D};

fn main() -> fracpinn::Result<()> {
    let grid = Grid2D::unit_square(41)?;
    let spec = DiffusionSpec::benchmark();
    let c0 = gaussian_bump(&grid, (0.5, 0.5), 0.02);
    let dt = 0.95 * max_stable_dt(&grid, FracOrder::new(0.6)?, 0.1)?;
    let steps = 200;
    println!("dt = {dt:.3e}, {steps} steps");
    println!("{:>8} {:>10} {:>10} {:>10}", "t", "a=0.6", "a=0.8", "a=1.0");
    let runs = [0.6, 0.8, 1.0]
        .iter()
        .map(|&a| solve_frac_diffusion(&grid, FracOrder::new(a)?, &spec, &c0, dt, steps))
        .collect::<fracpinn::Result<Vec<_>>>()?;
    for k in (0..=steps).step_by(25) {
        let peaks: Vec<String> = runs
            .iter()
            .map(|s| format!("{:>10.5}", s.fields[k].iter().copied().fold(f64::MIN, f64::max)))
            .collect();
        println!("{:>8.4} {}", runs[0].times[k], peaks.join(" "));
    }
    Ok(())
}
