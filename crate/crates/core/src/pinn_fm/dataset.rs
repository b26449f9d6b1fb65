use crate::error::{Error, Result};
use crate::pinn_ad::uniform_step;
use crate::sim::RheoSeries;
use crate::stats::population_std;

/// Stress and strain samples on a uniform time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RheoDataset {
    times: Vec<f64>,
    dt: f64,
    stress: Vec<f64>,
    strain: Vec<f64>,
    sigma_tau: f64,
    sigma_eps: f64,
}

impl RheoDataset {
    pub fn new(times: Vec<f64>, stress: Vec<f64>, strain: Vec<f64>) -> Result<Self> {
        if times.len() != stress.len() || times.len() != strain.len() {
            return Err(Error::Shape(format!(
                "{} times, {} stresses and {} strains",
                times.len(),
                stress.len(),
                strain.len()
            )));
        }
        if times.len() < 2 {
            return Err(Error::Domain(format!("need at least two samples, got {}", times.len())));
        }
        for (name, v) in [("time", &times), ("stress", &stress), ("strain", &strain)] {
            if let Some(i) = v.iter().position(|x| !x.is_finite()) {
                return Err(Error::Domain(format!("{name} sample {i} is not finite")));
            }
        }
        if let Some(k) = times.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::Domain(format!("times are not strictly increasing at index {}", k + 1)));
        }
        let dt = uniform_step(&times)?;
        let sigma_tau = population_std(&stress);
        let sigma_eps = population_std(&strain);
        if !(sigma_tau > 0.0) {
            return Err(Error::Domain("stress samples have zero spread (σ_τ = 0)".into()));
        }
        if !(sigma_eps > 0.0) {
            return Err(Error::Domain("strain samples have zero spread (σ_ε = 0)".into()));
        }
        Ok(RheoDataset {
            times,
            dt,
            stress,
            strain,
            sigma_tau,
            sigma_eps,
        })
    }

    pub fn from_series(series: &RheoSeries) -> Result<Self> {
        Self::new(series.times.clone(), series.stress.clone(), series.strain.clone())
    }

    /// `(t, τ, ε)` triples in time order.
    pub fn records(&self) -> Vec<[f64; 3]> {
        (0..self.len()).map(|k| [self.times[k], self.stress[k], self.strain[k]]).collect()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn stress(&self) -> &[f64] {
        &self.stress
    }

    pub fn strain(&self) -> &[f64] {
        &self.strain
    }

    pub fn sigma_tau(&self) -> f64 {
        self.sigma_tau
    }

    pub fn sigma_eps(&self) -> f64 {
        self.sigma_eps
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn t_max(&self) -> f64 {
        self.times[self.times.len() - 1]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validates_grid_and_spread() {
        let t = vec![0.0, 0.5, 1.0];
        let d = RheoDataset::new(t.clone(), vec![1.0, 0.5, 0.2], vec![0.0, 0.1, 0.1]).unwrap();
        assert_eq!(d.dt(), 0.5);
        assert!(d.sigma_tau() > 0.0);
        let msg = |r: Result<RheoDataset>| r.unwrap_err().to_string();
        assert!(msg(RheoDataset::new(vec![0.0, 0.5, 0.4], vec![1.0, 0.5, 0.2], vec![0.0, 0.1, 0.1])).contains("strictly"));
        assert!(msg(RheoDataset::new(vec![0.0, 0.5, 1.2], vec![1.0, 0.5, 0.2], vec![0.0, 0.1, 0.1])).contains("not uniform"));
        assert!(msg(RheoDataset::new(t.clone(), vec![1.0; 3], vec![0.0, 0.1, 0.1])).contains("σ_τ"));
        assert!(msg(RheoDataset::new(t.clone(), vec![1.0, 0.5, 0.2], vec![0.1; 3])).contains("σ_ε"));
        assert!(msg(RheoDataset::new(t, vec![1.0, f64::NAN, 0.2], vec![0.0, 0.1, 0.1])).contains("not finite"));
    }
}
