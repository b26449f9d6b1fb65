//! Error measures used by the losses and by result scoring.

use crate::error::{Error, Result};
use crate::fraccalc::CompensatedSum;

/// mean((pred - reference)²) / σ².
pub fn scaled_mse(pred: &[f64], reference: &[f64], sigma: f64) -> Result<f64> {
    if pred.len() != reference.len() || pred.is_empty() {
        return Err(Error::Shape(format!(
            "scaled_mse needs equal non-empty inputs, got {} and {}",
            pred.len(),
            reference.len()
        )));
    }
    let norm = pred.len() as f64 * sigma * sigma;
    let mut acc = CompensatedSum::default();
    for (p, r) in pred.iter().zip(reference) {
        acc.add((p - r) * (p - r) / norm);
    }
    Ok(acc.value())
}

/// ‖pred - reference‖₂ / ‖reference‖₂.
pub fn relative_error(pred: &[f64], reference: &[f64]) -> Result<f64> {
    if pred.len() != reference.len() {
        return Err(Error::Shape(format!(
            "relative_error needs aligned samples, got {} and {}",
            pred.len(),
            reference.len()
        )));
    }
    let mut num = CompensatedSum::default();
    let mut den = CompensatedSum::default();
    for (p, r) in pred.iter().zip(reference) {
        num.add((p - r) * (p - r));
        den.add(r * r);
    }
    let den = den.value();
    if !(den > 0.0) {
        return Err(Error::Domain("relative error is undefined for an all-zero reference".into()));
    }
    Ok((num.value() / den).sqrt())
}
