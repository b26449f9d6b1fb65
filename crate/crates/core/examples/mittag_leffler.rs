//! Mittag-Leffler function and the fractional Maxwell relaxation modulus.

use fracpinn::fraccalc::{mittag_leffler, relaxation_modulus, MittagLefflerOrder};

fn main() -> fracpinn::Result<()> {
    println!("{:>6} {:>14} {:>14} {:>14}", "z", "nu=0.3", "nu=0.5", "nu=0.9");
    for z in [-40.0, -10.0, -3.0, -1.0, 0.0, 1.0, 3.0] {
        let row = [0.3, 0.5, 0.9]
            .iter()
            .map(|&nu| Ok(format!("{:>14.8e}", mittag_leffler(MittagLefflerOrder::new(nu)?, z)?)))
            .collect::<fracpinn::Result<Vec<_>>>()?;
        println!("{z:>6} {}", row.join(" "));
    }

    let nu = MittagLefflerOrder::new(0.5)?;
    println!("\nG(t) for kappa = 2, eta = 1, nu = 0.5");
    for t in [0.0, 0.1, 1.0, 10.0, 100.0] {
        println!("  t = {t:>5}: {:.7}", relaxation_modulus(2.0, 1.0, nu, t)?);
    }
    Ok(())
}
