//! Adam and the cosine learning-rate schedule shared by both inverse solvers.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Cosine decay from `a_max` at step 0 to `a_min` at step `t_max`:
///
/// `A = a_min + 0.5 (a_max - a_min) (1 + cos(π · step / t_max))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CosineSchedule {
    pub a_min: f64,
    pub a_max: f64,
    pub t_max: usize,
}

impl CosineSchedule {
    pub const DEFAULT_A_MAX: f64 = 2.5e-3;
    pub const DEFAULT_A_MIN: f64 = 2.5e-6;

    pub fn new(a_min: f64, a_max: f64, t_max: usize) -> Result<Self> {
        if !(a_min > 0.0 && a_max >= a_min && a_max.is_finite()) {
            return Err(Error::Config(format!(
                "learning-rate bounds need a_max >= a_min > 0, got a_min={a_min}, a_max={a_max}"
            )));
        }
        Ok(CosineSchedule { a_min, a_max, t_max })
    }

    pub fn with_defaults(t_max: usize) -> Self {
        CosineSchedule {
            a_min: Self::DEFAULT_A_MIN,
            a_max: Self::DEFAULT_A_MAX,
            t_max,
        }
    }
}

/// Learning rate at `step`. Steps past `t_max` (and every step of a
/// zero-length schedule) clamp to `a_min`.
pub fn cosine_lr(schedule: &CosineSchedule, step: usize) -> f64 {
    if step >= schedule.t_max {
        return schedule.a_min;
    }
    let phase = step as f64 / schedule.t_max as f64 * std::f64::consts::PI;
    schedule.a_min + 0.5 * (schedule.a_max - schedule.a_min) * (1.0 + phase.cos())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// Moment estimates and step counter.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub config: AdamConfig,
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub step: u64,
}

impl AdamState {
    pub fn new(n: usize, config: AdamConfig) -> Self {
        AdamState {
            config,
            m: vec![0.0; n],
            v: vec![0.0; n],
            step: 0,
        }
    }
}

/// One bias-corrected Adam update of `params` in place.
pub fn adam_step(state: &mut AdamState, params: &mut [f64], grads: &[f64], lr: f64) -> Result<()> {
    if params.len() != grads.len() || params.len() != state.m.len() {
        return Err(Error::Shape(format!(
            "adam_step lengths differ: params {}, grads {}, state {}",
            params.len(),
            grads.len(),
            state.m.len()
        )));
    }
    if let Some(i) = grads.iter().position(|g| !g.is_finite()) {
        return Err(Error::numeric("adam_step", format!("non-finite gradient at index {i}")));
    }
    let AdamConfig { beta1, beta2, eps } = state.config;
    state.step += 1;
    let t = state.step as i32;
    let c1 = 1.0 - beta1.powi(t);
    let c2 = 1.0 - beta2.powi(t);
    for (((p, &g), m), v) in params.iter_mut().zip(grads).zip(&mut state.m).zip(&mut state.v) {
        *m = beta1 * *m + (1.0 - beta1) * g;
        *v = beta2 * *v + (1.0 - beta2) * g * g;
        let m_hat = *m / c1;
        let v_hat = *v / c2;
        *p -= lr * m_hat / (v_hat.sqrt() + eps);
    }
    Ok(())
}

/// Loss components logged at one iteration, before that iteration's update.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossRecord {
    pub iteration: usize,
    pub data: f64,
    pub consistency: f64,
    pub total: f64,
    pub lr: f64,
}

/// Book-keeping of one optimization run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainRun {
    pub seed: u64,
    pub iterations: usize,
    pub schedule: CosineSchedule,
    pub adam: AdamConfig,
    pub history: Vec<LossRecord>,
    /// Losses of the returned parameters.
    pub final_loss: LossRecord,
}
