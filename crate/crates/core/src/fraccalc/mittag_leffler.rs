//! One-parameter Mittag-Leffler function E_ν(z) = Σ zⁿ / Γ(νn + 1) for real z
//! and 0 < ν ≤ 1.
//!
//! Evaluation strategy:
//!
//! * ν = 1: the exponential.
//! * |z| ≤ 1: the power series with compensated summation.
//! * z > 1: the power series with terms formed in log space. The sum grows
//!   like e^{z^{1/ν}}/ν, so arguments with z^{1/ν} > 700 are rejected.
//! * z < -1: the real integral representation obtained from the spectral
//!   density of the completely monotone function E_ν(-x),
//!
//!   ```text
//!   E_ν(-x) = 1/(νπ) ∫_0^{νπ} exp(-(x sin ψ / sin(νπ - ψ))^{1/ν}) dψ
//!   ```
//!
//!   whose integrand is positive and bounded, so the quadrature carries no
//!   cancellation however large x is.

use std::f64::consts::PI;

use super::gamma::{gamma_fn, ln_gamma_unchecked};
use super::l1::CompensatedSum;
use super::quad;
use crate::error::{Error, Result};

/// Most negative argument accepted.
pub const ML_MIN_ARG: f64 = -1.0e6;

const SERIES_TOL: f64 = 1e-17;
const MAX_TERMS: usize = 2_000_000;
const QUAD_REL_TOL: f64 = 1e-13;
const QUAD_MAX_PANELS: usize = 4000;

/// Order ν ∈ (0, 1] of the Mittag-Leffler function.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct MittagLefflerOrder(f64);

impl MittagLefflerOrder {
    pub fn new(nu: f64) -> Result<Self> {
        if !(nu > 0.0 && nu <= 1.0) {
            return Err(Error::Domain(format!("Mittag-Leffler order must lie in (0, 1], got {nu}")));
        }
        Ok(MittagLefflerOrder(nu))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// E_ν(z).
pub fn mittag_leffler(nu: MittagLefflerOrder, z: f64) -> Result<f64> {
    let nu = nu.value();
    if !z.is_finite() {
        return Err(Error::Range(format!("Mittag-Leffler argument must be finite, got {z}")));
    }
    if z < ML_MIN_ARG {
        return Err(Error::Range(format!("Mittag-Leffler argument {z} below supported minimum {ML_MIN_ARG}")));
    }
    if z == 0.0 {
        return Ok(1.0);
    }
    if nu == 1.0 {
        let e = z.exp();
        if !e.is_finite() {
            return Err(Error::Range(format!("E_1({z}) overflows f64")));
        }
        return Ok(e);
    }
    if z.abs() <= 1.0 {
        small_argument_series(nu, z)
    } else if z > 0.0 {
        positive_series(nu, z)
    } else {
        negative_integral(nu, -z)
    }
}

fn small_argument_series(nu: f64, z: f64) -> Result<f64> {
    let mut acc = CompensatedSum::default();
    acc.add(1.0);
    let mut power = 1.0;
    for n in 1..MAX_TERMS {
        power *= z;
        let arg = nu * n as f64 + 1.0;
        // 1/Γ(arg) underflows long before arg reaches the gamma overflow bound
        if arg > 170.0 {
            return Ok(acc.value());
        }
        let term = power / gamma_fn(arg)?;
        acc.add(term);
        // Γ(νn+1) is increasing once νn+1 exceeds its minimum near 1.46
        if arg > 2.0 && term.abs() < SERIES_TOL * acc.value().abs() {
            return Ok(acc.value());
        }
    }
    Err(Error::Range(format!("E_{nu}({z}) series did not converge")))
}

fn positive_series(nu: f64, z: f64) -> Result<f64> {
    let ln_z = z.ln();
    if ln_z / nu > 700.0_f64.ln() {
        return Err(Error::Range(format!("E_{nu}({z}) overflows f64")));
    }
    let mut acc = CompensatedSum::default();
    acc.add(1.0);
    let mut prev = 1.0;
    for n in 1..MAX_TERMS {
        let nf = n as f64;
        let term = (nf * ln_z - ln_gamma_unchecked(nu * nf + 1.0)).exp();
        acc.add(term);
        if term < prev && term < SERIES_TOL * acc.value() {
            let v = acc.value();
            if !v.is_finite() {
                return Err(Error::Range(format!("E_{nu}({z}) overflows f64")));
            }
            return Ok(v);
        }
        prev = term;
    }
    Err(Error::Range(format!("E_{nu}({z}) series did not converge")))
}

fn negative_integral(nu: f64, x: f64) -> Result<f64> {
    let span = nu * PI;
    let inv_nu = 1.0 / nu;
    // sin(νπ - ψ) = sin((1-ν)π + ψ); the second form keeps full relative
    // precision when ν is close to 1
    let complement = (1.0 - nu) * PI;
    let integrand = |psi: f64| {
        let denom = if nu > 0.5 { (complement + psi).sin() } else { (span - psi).sin() };
        let u = x * psi.sin() / denom;
        (-u.powf(inv_nu)).exp()
    };
    let q = quad::integrate(integrand, 0.0, span, QUAD_REL_TOL, QUAD_MAX_PANELS);
    if !q.converged {
        return Err(Error::Range(format!(
            "E_{nu}({}) quadrature did not reach tolerance (estimate {:e})",
            -x, q.error
        )));
    }
    Ok(q.value / span)
}

/// Fractional-Maxwell relaxation modulus G(t) = (κ/η) E_ν(-t^ν/η).
pub fn relaxation_modulus(kappa: f64, eta: f64, nu: MittagLefflerOrder, t: f64) -> Result<f64> {
    if !(kappa > 0.0 && kappa.is_finite() && eta > 0.0 && eta.is_finite()) {
        return Err(Error::Domain(format!("kappa and eta must be positive, got {kappa}, {eta}")));
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("relaxation time must be non-negative, got {t}")));
    }
    let z = -t.powf(nu.value()) / eta;
    Ok(kappa / eta * mittag_leffler(nu, z)?)
}
