//! L1 approximation of the Caputo derivative of t² at t = 1 and its
//! observed convergence order.

use fracpinn::fraccalc::{caputo_l1, gamma_fn, FracOrder, L1Stencil};

fn main() -> fracpinn::Result<()> {
    for alpha in [0.3, 0.5, 0.8] {
        let exact = 2.0 / gamma_fn(3.0 - alpha)?;
        println!("alpha = {alpha}, exact {exact:.10}");
        let mut prev: Option<f64> = None;
        for n in [16, 32, 64, 128, 256] {
            let dt = 1.0 / n as f64;
            let f: Vec<f64> = (0..=n).map(|k| (k as f64 * dt).powi(2)).collect();
            let st = L1Stencil::new(FracOrder::new(alpha)?, dt, n - 1)?;
            let err = (caputo_l1(&f, &st)? - exact).abs();
            match prev {
                Some(p) => println!("  dt = 1/{n:<4} error {err:.3e}  order {:.3}", (p / err).log2()),
                None => println!("  dt = 1/{n:<4} error {err:.3e}"),
            }
            prev = Some(err);
        }
    }
    Ok(())
}
