//! σ-relative Gaussian noise.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::stats::population_std;

/// Adds i.i.d. N(0, (level·σ)²) to every value, where σ is the population
/// standard deviation of the clean values.
pub fn add_noise(values: &[f64], level: f64, seed: u64) -> Result<Vec<f64>> {
    if !(0.0..=1.0).contains(&level) {
        return Err(Error::Config(format!("noise level must lie in [0, 1], got {level}")));
    }
    if level == 0.0 {
        return Ok(values.to_vec());
    }
    let sigma = level * population_std(values);
    let normal = Normal::new(0.0, sigma)
        .map_err(|e| Error::Config(format!("noise distribution with std {sigma}: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(values.iter().map(|&v| v + normal.sample(&mut rng)).collect())
}
