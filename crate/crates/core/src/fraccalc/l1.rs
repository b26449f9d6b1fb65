//! The L1 finite-difference approximation of the Caputo derivative.
//!
//! On a uniform grid t_j = j·dt the operator reads
//!
//! ```text
//! L f(t_{k+1}) = 1/(dt^α Γ(2-α)) · Σ_{j=0..k} b_j (f(t_{k+1-j}) - f(t_{k-j}))
//! b_j = (j+1)^{1-α} - j^{1-α}
//! ```
//!
//! Sums are accumulated with Neumaier compensation so that the algebraic
//! endpoint identities (telescoping at α = 0, backward difference at α = 1)
//! hold to round-off relative to the result rather than to the summands.

use super::gamma::{digamma, gamma_fn};
use crate::error::{Error, Result};

/// Fractional order α ∈ [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct FracOrder(f64);

impl FracOrder {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::Domain(format!("fractional order must lie in [0, 1], got {alpha}")));
        }
        Ok(FracOrder(alpha))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Neumaier-compensated running sum.
#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(self) -> f64 {
        self.sum + self.carry
    }
}

/// b_j = (j+1)^{1-α} - j^{1-α} for j = 0..=k.
pub fn l1_coefficients(alpha: FracOrder, k: usize) -> Vec<f64> {
    let p = 1.0 - alpha.value();
    (0..=k)
        .map(|j| {
            let j = j as f64;
            (j + 1.0).powf(p) - if j == 0.0 { 0.0 } else { j.powf(p) }
        })
        .collect()
}

/// ∂b_j/∂α for j = 0..=k (b_0 is constant, so the first entry is zero).
pub fn l1_coefficient_alpha_derivatives(alpha: FracOrder, k: usize) -> Vec<f64> {
    let p = 1.0 - alpha.value();
    (0..=k)
        .map(|j| {
            let j = j as f64;
            let upper = (j + 1.0).powf(p) * (j + 1.0).ln();
            let lower = if j == 0.0 { 0.0 } else { j.powf(p) * j.ln() };
            lower - upper
        })
        .collect()
}

/// 1 / (dt^α Γ(2-α)).
pub fn l1_prefactor(alpha: FracOrder, dt: f64) -> Result<f64> {
    check_dt(dt)?;
    Ok(1.0 / (dt.powf(alpha.value()) * gamma_fn(2.0 - alpha.value())?))
}

/// ∂/∂α of ln(1 / (dt^α Γ(2-α))) = ψ(2-α) - ln dt.
pub fn l1_prefactor_log_alpha_derivative(alpha: FracOrder, dt: f64) -> Result<f64> {
    check_dt(dt)?;
    Ok(digamma(2.0 - alpha.value())? - dt.ln())
}

fn check_dt(dt: f64) -> Result<()> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::Domain(format!("time step must be finite and positive, got {dt}")));
    }
    Ok(())
}

/// Precomputed L1 coefficients b_0..b_K for a fixed order and step.
#[derive(Debug, Clone, PartialEq)]
pub struct L1Stencil {
    alpha: FracOrder,
    dt: f64,
    coeffs: Vec<f64>,
    prefactor: f64,
}

impl L1Stencil {
    /// Stencil able to evaluate the operator at t_{k+1}, i.e. holding b_0..b_k.
    pub fn new(alpha: FracOrder, dt: f64, k: usize) -> Result<Self> {
        let prefactor = l1_prefactor(alpha, dt)?;
        Ok(L1Stencil {
            alpha,
            dt,
            coeffs: l1_coefficients(alpha, k),
            prefactor,
        })
    }

    pub fn alpha(&self) -> FracOrder {
        self.alpha
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn prefactor(&self) -> f64 {
        self.prefactor
    }

    /// Index k of the last step this stencil covers (samples needed: k + 2).
    pub fn last_step(&self) -> usize {
        self.coeffs.len() - 1
    }
}

/// L1 Caputo derivative at the last sample, in the history-split form
///
/// `b_0 f_{k+1} - b_0 f_k + Σ_{j<k} b_{j+1} f_{k-j} - Σ_{1≤j≤k} b_j f_{k-j}`.
///
/// `samples` holds f(t_0)..f(t_{k+1}) and must be exactly one longer than the
/// stencil's coefficient list.
pub fn caputo_l1(samples: &[f64], stencil: &L1Stencil) -> Result<f64> {
    let b = stencil.coeffs();
    if samples.len() != b.len() + 1 {
        return Err(Error::Shape(format!(
            "caputo_l1 needs {} samples for a stencil of {} coefficients, got {}",
            b.len() + 1,
            b.len(),
            samples.len()
        )));
    }
    let k = b.len() - 1;
    let mut acc = CompensatedSum::default();
    acc.add(b[0] * samples[k + 1]);
    acc.add(-b[0] * samples[k]);
    for j in 0..k {
        acc.add(b[j + 1] * samples[k - j]);
    }
    for j in 1..=k {
        acc.add(-b[j] * samples[k - j]);
    }
    Ok(stencil.prefactor() * acc.value())
}

/// Same operator written as a weighted sum of increments
/// `Σ_j b_j (f_{k+1-j} - f_{k-j})`.
pub fn caputo_l1_increments(samples: &[f64], stencil: &L1Stencil) -> Result<f64> {
    let b = stencil.coeffs();
    if samples.len() != b.len() + 1 {
        return Err(Error::Shape(format!(
            "caputo_l1_increments needs {} samples, got {}",
            b.len() + 1,
            samples.len()
        )));
    }
    let k = b.len() - 1;
    let mut acc = CompensatedSum::default();
    for (j, &bj) in b.iter().enumerate() {
        acc.add(bj * (samples[k + 1 - j] - samples[k - j]));
    }
    Ok(stencil.prefactor() * acc.value())
}

/// The explicit history part of the L1 update,
///
/// `h = b_0 c_k - Σ_{j=0..k-1} b_{j+1} c_{k-j} + Σ_{j=1..k} b_j c_{k-j}`,
///
/// so that `L c(t_{k+1}) = prefactor · (c_{k+1} - h)` whenever b_0 = 1.
/// `samples` holds c(t_0)..c(t_k).
pub fn history_term(samples: &[f64], coeffs: &[f64]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::Shape("history_term needs at least one sample".into()));
    }
    let k = samples.len() - 1;
    if coeffs.len() < k + 1 {
        return Err(Error::Shape(format!(
            "history_term over {} samples needs {} coefficients, got {}",
            samples.len(),
            k + 1,
            coeffs.len()
        )));
    }
    let mut acc = CompensatedSum::default();
    acc.add(coeffs[0] * samples[k]);
    for j in 0..k {
        acc.add(-coeffs[j + 1] * samples[k - j]);
    }
    for j in 1..=k {
        acc.add(coeffs[j] * samples[k - j]);
    }
    Ok(acc.value())
}

/// Adds `w · ∂h/∂c_j` to `adjoint[j]` for j = 0..=k, where h is
/// [`history_term`] over c_0..c_k.
pub(crate) fn history_adjoint(coeffs: &[f64], k: usize, w: f64, adjoint: &mut [f64]) {
    if k == 0 {
        adjoint[0] += w * coeffs[0];
        return;
    }
    // h = Σ_i a_i c_{k-i}: a_0 = b_0 - b_1, a_i = b_i - b_{i+1}, a_k = b_k
    adjoint[k] += w * (coeffs[0] - coeffs[1]);
    for m in 1..k {
        adjoint[k - m] += w * (coeffs[m] - coeffs[m + 1]);
    }
    adjoint[0] += w * coeffs[k];
}

/// ∂h/∂α of [`history_term`] over c_0..c_k given ∂b_j/∂α.
pub(crate) fn history_alpha_derivative(dcoeffs: &[f64], samples: &[f64], k: usize) -> f64 {
    let mut dh = 0.0;
    for m in 1..=k {
        dh -= dcoeffs[m] * (samples[k + 1 - m] - samples[k - m]);
    }
    dh
}
