//! Fractional Maxwell stress responses `τ + η D^ν τ = κ D^ν ε`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fraccalc::{history_term, l1_coefficients, l1_prefactor, relaxation_modulus, FracOrder, MittagLefflerOrder};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RheoProvenance {
    RelaxationClosedForm,
    L1Integrated,
}

/// Stress and strain on a uniform time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RheoSeries {
    pub times: Vec<f64>,
    pub strain: Vec<f64>,
    pub stress: Vec<f64>,
    pub provenance: RheoProvenance,
}

fn check_material(kappa: f64, eta: f64) -> Result<()> {
    if !(kappa.is_finite() && kappa > 0.0 && eta.is_finite() && eta > 0.0) {
        return Err(Error::Domain(format!("κ and η must be positive and finite, got κ={kappa}, η={eta}")));
    }
    Ok(())
}

/// Step strain ε⁰ held from t = 0: τ(t) = G(t) ε⁰ with the closed-form modulus.
pub fn gen_relaxation_test(kappa: f64, eta: f64, nu: MittagLefflerOrder, eps0: f64, times: &[f64]) -> Result<RheoSeries> {
    check_material(kappa, eta)?;
    if times.windows(2).any(|w| w[1] <= w[0]) || times.first().is_some_and(|&t| t < 0.0) {
        return Err(Error::Domain("relaxation times must be non-negative and increasing".into()));
    }
    let stress = times
        .iter()
        .map(|&t| Ok(relaxation_modulus(kappa, eta, nu, t)? * eps0))
        .collect::<Result<Vec<_>>>()?;
    Ok(RheoSeries {
        times: times.to_vec(),
        strain: vec![eps0; times.len()],
        stress,
        provenance: RheoProvenance::RelaxationClosedForm,
    })
}

/// Stress produced by an arbitrary strain history under the L1-discretized law.
///
/// With C = 1/(dt^ν Γ(2-ν)) and the history split of the stress operator,
/// every step solves `τ_{k+1} (1 + η C) = κ L ε(t_{k+1}) + η C h(τ, t_k)`.
/// The initial stress is the quasi-static value (κ/η) ε(t_0).
pub fn gen_fm_response(strain: &[f64], kappa: f64, eta: f64, nu: MittagLefflerOrder, dt: f64) -> Result<Vec<f64>> {
    check_material(kappa, eta)?;
    if strain.is_empty() {
        return Ok(Vec::new());
    }
    let order = FracOrder::new(nu.value())?;
    let steps = strain.len() - 1;
    let c = l1_prefactor(order, dt)?;
    let coeffs = l1_coefficients(order, steps);
    let mut stress = Vec::with_capacity(strain.len());
    stress.push(kappa / eta * strain[0]);
    for k in 0..steps {
        let l_eps = c * (strain[k + 1] - history_term(&strain[..=k], &coeffs)?);
        let h = history_term(&stress, &coeffs)?;
        let tau = (kappa * l_eps + eta * c * h) / (1.0 + eta * c);
        if !tau.is_finite() {
            return Err(Error::numeric("gen_fm_response", format!("non-finite stress at step {}", k + 1)));
        }
        stress.push(tau);
    }
    Ok(stress)
}

/// Fractional Maxwell response to an arbitrary strain sampled at t_k = k·dt.
pub fn gen_fm_series(strain: Vec<f64>, kappa: f64, eta: f64, nu: MittagLefflerOrder, dt: f64) -> Result<RheoSeries> {
    let stress = gen_fm_response(&strain, kappa, eta, nu, dt)?;
    Ok(RheoSeries {
        times: (0..strain.len()).map(|k| k as f64 * dt).collect(),
        strain,
        stress,
        provenance: RheoProvenance::L1Integrated,
    })
}

/// Smooth ramp-and-hold strain ε⁰ (1 - exp(-t/t_ramp)).
pub fn ramp_hold_strain(eps0: f64, t_ramp: f64, times: &[f64]) -> Vec<f64> {
    times.iter().map(|&t| eps0 * -(-t / t_ramp).exp_m1()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ml(nu: f64) -> MittagLefflerOrder {
        MittagLefflerOrder::new(nu).unwrap()
    }

    #[test]
    fn zero_strain_gives_zero_stress() {
        let s = gen_fm_response(&[0.0; 50], 2.0, 1.0, ml(0.5), 0.1).unwrap();
        assert!(s.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn relaxation_examples() {
        let r = gen_relaxation_test(2.0, 1.0, ml(0.5), 0.1, &[0.0, 1.0]).unwrap();
        assert_eq!(r.stress[0], 0.2);
        assert!((r.stress[1] - 0.085516715231161400882).abs() < 1e-12);
        let e = gen_relaxation_test(3.0, 2.0, ml(1.0), 0.5, &[0.0, 0.7, 2.0]).unwrap();
        for (t, s) in e.times.iter().zip(&e.stress) {
            assert!((s - 0.5 * 1.5 * (-t / 2.0).exp()).abs() < 1e-14);
        }
        assert!(gen_relaxation_test(2.0, 1.0, ml(0.5), 0.1, &[1.0, 0.5]).is_err());
    }

    #[test]
    fn one_step_hand_solve() {
        let (kappa, eta, nu, dt, e1) = (2.0, 0.7, 0.4, 0.05, 0.3);
        let s = gen_fm_response(&[0.0, e1], kappa, eta, ml(nu), dt).unwrap();
        let c = 1.0 / (dt.powf(nu) * crate::fraccalc::gamma_fn(2.0 - nu).unwrap());
        let want = kappa * c * e1 / (1.0 + eta * c);
        assert_eq!(s[0], 0.0);
        assert!((s[1] - want).abs() <= 1e-15 * want);
    }
}
