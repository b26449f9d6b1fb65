use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::sim::FieldSeries;
use crate::stats::population_std;

/// Relative tolerance on time-step uniformity.
pub const DT_REL_TOL: f64 = 1e-9;

/// Concentration samples c(t_k, x_p, y_p) with a full time history at every
/// location.
///
/// Values are stored location-major: `values[p * n_times + k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AdDataset {
    times: Vec<f64>,
    dt: f64,
    locations: Vec<(f64, f64)>,
    values: Vec<f64>,
    sigma_c: f64,
}

/// Checks that sorted distinct times are uniformly spaced and returns dt.
pub(crate) fn uniform_step(times: &[f64]) -> Result<f64> {
    if times.len() < 2 {
        return Ok(1.0);
    }
    let span = times[times.len() - 1] - times[0];
    let dt = span / (times.len() - 1) as f64;
    for (k, w) in times.windows(2).enumerate() {
        let step = w[1] - w[0];
        if ((step - dt) / dt).abs() > DT_REL_TOL {
            return Err(Error::Domain(format!(
                "time grid is not uniform: step {k} is {step:e}, expected {dt:e}"
            )));
        }
    }
    Ok(dt)
}

impl AdDataset {
    /// Builds a dataset from `(t, x, y, c)` records in any order.
    pub fn from_records(records: &[[f64; 4]]) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::Domain("dataset has no records".into()));
        }
        if let Some(i) = records.iter().position(|r| r.iter().any(|v| !v.is_finite())) {
            return Err(Error::Domain(format!("record {i} has a non-finite value")));
        }
        let mut times: Vec<f64> = records.iter().map(|r| r[0]).collect();
        times.sort_by(f64::total_cmp);
        times.dedup();
        let dt = uniform_step(&times)?;
        let n_times = times.len();
        let mut by_location: BTreeMap<(u64, u64), Vec<Option<f64>>> = BTreeMap::new();
        let mut order: Vec<(u64, u64)> = Vec::new();
        for r in records {
            let k = times.partition_point(|&t| t < r[0]);
            let key = (r[1].to_bits(), r[2].to_bits());
            let slot = by_location.entry(key).or_insert_with(|| {
                order.push(key);
                vec![None; n_times]
            });
            if slot[k].replace(r[3]).is_some() {
                return Err(Error::Domain(format!(
                    "duplicate sample at t={}, x={}, y={}",
                    r[0], r[1], r[2]
                )));
            }
        }
        let mut locations = Vec::with_capacity(order.len());
        let mut values = Vec::with_capacity(order.len() * n_times);
        for key in order {
            let (x, y) = (f64::from_bits(key.0), f64::from_bits(key.1));
            let hist = &by_location[&key];
            if let Some(k) = hist.iter().position(Option::is_none) {
                return Err(Error::Domain(format!(
                    "location ({x}, {y}) has no sample at t={}; every location needs the full time history",
                    times[k]
                )));
            }
            locations.push((x, y));
            values.extend(hist.iter().map(|v| v.expect("checked above")));
        }
        Self::from_parts(times, dt, locations, values)
    }

    fn from_parts(times: Vec<f64>, dt: f64, locations: Vec<(f64, f64)>, values: Vec<f64>) -> Result<Self> {
        let sigma_c = population_std(&values);
        if !(sigma_c > 0.0) {
            return Err(Error::Domain("concentration samples have zero spread (σ_c = 0)".into()));
        }
        Ok(AdDataset { times, dt, locations, values, sigma_c })
    }

    /// Every `stride`-th grid node in x and y (boundary rows included when they
    /// fall on the stride) at every time level of a solver run.
    pub fn from_field_series(series: &FieldSeries, stride: usize) -> Result<Self> {
        if stride == 0 {
            return Err(Error::Config("spatial stride must be at least 1".into()));
        }
        let grid = series.grid;
        let mut locations = Vec::new();
        let mut values = Vec::new();
        for j in (0..grid.ny).step_by(stride) {
            for i in (0..grid.nx).step_by(stride) {
                locations.push((grid.x(i), grid.y(j)));
                values.extend(series.node_history(grid.index(i, j)));
            }
        }
        Self::from_parts(series.times.clone(), series.dt, locations, values)
    }

    /// Records in canonical order: time-major, then location order.
    pub fn records(&self) -> Vec<[f64; 4]> {
        let nt = self.n_times();
        let mut out = Vec::with_capacity(self.values.len());
        for (k, &t) in self.times.iter().enumerate() {
            for (p, &(x, y)) in self.locations.iter().enumerate() {
                out.push([t, x, y, self.values[p * nt + k]]);
            }
        }
        out
    }

    /// Same locations and times with concentrations replaced; `c` follows the
    /// canonical record order.
    pub fn with_concentrations(&self, c: &[f64]) -> Result<Self> {
        if c.len() != self.values.len() {
            return Err(Error::Shape(format!("expected {} concentrations, got {}", self.values.len(), c.len())));
        }
        let nt = self.n_times();
        let np = self.locations.len();
        let mut values = vec![0.0; c.len()];
        for k in 0..nt {
            for p in 0..np {
                values[p * nt + k] = c[k * np + p];
            }
        }
        Self::from_parts(self.times.clone(), self.dt, self.locations.clone(), values)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn locations(&self) -> &[(f64, f64)] {
        &self.locations
    }

    /// Location-major concentrations.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn sigma_c(&self) -> f64 {
        self.sigma_c
    }

    pub fn n_times(&self) -> usize {
        self.times.len()
    }

    pub fn n_locations(&self) -> usize {
        self.locations.len()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn history(&self, p: usize) -> &[f64] {
        let nt = self.n_times();
        &self.values[p * nt..(p + 1) * nt]
    }

    pub fn concentration_range(&self) -> (f64, f64) {
        self.values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)))
    }
}
