//! Stress response of a fractional Maxwell element to step and
//! ramp-and-hold strain, compared with ε₀ G(t) for the step.

use fracpinn::fraccalc::{relaxation_modulus, MittagLefflerOrder};
use fracpinn::sim::{gen_fm_response, gen_relaxation_test, ramp_hold_strain};

fn main() -> fracpinn::Result<()> {
    let (kappa, eta, eps0) = (2.0, 1.0, 0.1);
    let nu = MittagLefflerOrder::new(0.5)?;
    let n = 2001;
    let times: Vec<f64> = (0..n).map(|k| 10.0 * k as f64 / (n - 1) as f64).collect();
    let step = gen_relaxation_test(kappa, eta, nu, eps0, &times)?;
    let ramp = gen_fm_response(&ramp_hold_strain(eps0, 0.5, &times), kappa, eta, nu, times[1])?;
    println!("{:>6} {:>12} {:>12} {:>12}", "t", "step", "eps0 G(t)", "ramp-hold");
    for k in (0..n).step_by(200) {
        let g = eps0 * relaxation_modulus(kappa, eta, nu, times[k])?;
        println!("{:>6.2} {:>12.6} {:>12.6} {:>12.6}", times[k], step.stress[k], g, ramp[k]);
    }
    Ok(())
}
