use serde::{Deserialize, Serialize};

use super::dataset::AdDataset;
use super::model::{losses_at, loss_gradient_at, predict_concentrations, predict_diffusion_curve, theta_inputs, AdArchitecture, AdModel};
use crate::error::{Error, Result};
use crate::optim::{adam_step, cosine_lr, AdamConfig, AdamState, CosineSchedule, LossRecord, TrainRun};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AdTrainConfig {
    pub iterations: usize,
    /// Set by the caller; run configurations carry a single top-level seed.
    #[serde(skip)]
    pub seed: u64,
    pub lr_max: f64,
    pub lr_min: f64,
    pub adam: AdamConfig,
    pub architecture: AdArchitecture,
}

impl Default for AdTrainConfig {
    fn default() -> Self {
        AdTrainConfig {
            iterations: 20_000,
            seed: 0,
            lr_max: CosineSchedule::DEFAULT_A_MAX,
            lr_min: CosineSchedule::DEFAULT_A_MIN,
            adam: AdamConfig::default(),
            architecture: AdArchitecture::default(),
        }
    }
}

/// Full-batch Adam on the total loss with a cosine learning-rate schedule.
pub fn train_ad(dataset: &AdDataset, config: &AdTrainConfig) -> Result<(AdModel, TrainRun)> {
    train_ad_observed(dataset, config, |_, _| {})
}

/// As [`train_ad`], calling `observer` after every logged iteration.
pub fn train_ad_observed(
    dataset: &AdDataset,
    config: &AdTrainConfig,
    mut observer: impl FnMut(&LossRecord, &AdModel),
) -> Result<(AdModel, TrainRun)> {
    let schedule = CosineSchedule::new(config.lr_min, config.lr_max, config.iterations)?;
    let mut model = AdModel::init(&config.architecture, dataset, config.seed)?;
    let inputs = theta_inputs(&model, dataset);
    let mut params = model.trainable();
    let mut adam = AdamState::new(params.len(), config.adam);
    let mut history = Vec::with_capacity(config.iterations);
    let at = |it: usize, e: Error| Error::numeric("train_ad", format!("iteration {it}: {e}"));

    for it in 0..config.iterations {
        let (losses, grad) = loss_gradient_at(&model, dataset, &inputs).map_err(|e| at(it, e))?;
        if !losses.total.is_finite() {
            return Err(Error::numeric(
                "train_ad",
                format!(
                    "non-finite loss at iteration {it}: data={}, consistency={}, alpha={}",
                    losses.data,
                    losses.consistency,
                    model.alpha()
                ),
            ));
        }
        let lr = cosine_lr(&schedule, it);
        let record = LossRecord {
            iteration: it,
            data: losses.data,
            consistency: losses.consistency,
            total: losses.total,
            lr,
        };
        history.push(record);
        observer(&record, &model);
        adam_step(&mut adam, &mut params, &grad, lr).map_err(|e| at(it, e))?;
        model.set_trainable(&params)?;
    }

    let last = losses_at(&model, dataset, &inputs).map_err(|e| at(config.iterations, e))?;
    if !last.total.is_finite() {
        return Err(Error::numeric(
            "train_ad",
            format!("non-finite final loss: data={}, consistency={}", last.data, last.consistency),
        ));
    }
    let run = TrainRun {
        seed: config.seed,
        iterations: config.iterations,
        schedule,
        adam: config.adam,
        history,
        final_loss: LossRecord {
            iteration: config.iterations,
            data: last.data,
            consistency: last.consistency,
            total: last.total,
            lr: cosine_lr(&schedule, config.iterations),
        },
    };
    Ok((model, run))
}

/// Recovered order and coefficient curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdRecovery {
    pub alpha: f64,
    pub c: Vec<f64>,
    pub d: Vec<f64>,
}

/// `n` uniformly spaced concentrations on `[lo, hi]`.
pub fn concentration_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.5 * (lo + hi)],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

/// α and D̃ sampled at `n` points over `range`, or over the range of the
/// θ-network's concentrations at the dataset samples when `range` is `None`.
pub fn recover(model: &AdModel, dataset: &AdDataset, range: Option<(f64, f64)>, n: usize) -> Result<AdRecovery> {
    let (lo, hi) = match range {
        Some(r) => r,
        None => predict_concentrations(model, dataset)?
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v))),
    };
    let c = concentration_grid(lo, hi, n);
    let d = predict_diffusion_curve(model, &c)?;
    Ok(AdRecovery { alpha: model.alpha(), c, d })
}
