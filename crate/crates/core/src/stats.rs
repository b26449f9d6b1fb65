//! Small descriptive statistics shared by the dataset types.

use crate::fraccalc::CompensatedSum;

pub(crate) fn mean(values: &[f64]) -> f64 {
    let mut acc = CompensatedSum::default();
    for &v in values {
        acc.add(v);
    }
    acc.value() / values.len() as f64
}

/// Population standard deviation (divides by n).
///
/// Values are shifted by the first sample first, so constant data gives
/// exactly zero.
pub(crate) fn population_std(values: &[f64]) -> f64 {
    let Some(&v0) = values.first() else {
        return 0.0;
    };
    let shifted: Vec<f64> = values.iter().map(|v| v - v0).collect();
    let m = mean(&shifted);
    let mut acc = CompensatedSum::default();
    for &d in &shifted {
        acc.add((d - m) * (d - m));
    }
    (acc.value() / values.len() as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn std_of_known_values() {
        assert_eq!(population_std(&[2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0]), 2.0);
        assert_eq!(population_std(&[3.0; 5]), 0.0);
        assert_eq!(population_std(&[0.1; 3]), 0.0);
        assert_eq!(population_std(&[]), 0.0);
    }
}
