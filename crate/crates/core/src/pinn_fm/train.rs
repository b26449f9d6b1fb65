use serde::{Deserialize, Serialize};

use super::dataset::RheoDataset;
use super::model::{loss_gradient_at, losses_at, time_inputs, FmArchitecture, FmModel};
use crate::error::{Error, Result};
use crate::optim::{adam_step, cosine_lr, AdamConfig, AdamState, CosineSchedule, LossRecord, TrainRun};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FmTrainConfig {
    pub iterations: usize,
    /// Set by the caller; run configurations carry a single top-level seed.
    #[serde(skip)]
    pub seed: u64,
    pub lr_max: f64,
    pub lr_min: f64,
    pub adam: AdamConfig,
    pub architecture: FmArchitecture,
}

impl Default for FmTrainConfig {
    fn default() -> Self {
        FmTrainConfig {
            iterations: 20_000,
            seed: 0,
            lr_max: CosineSchedule::DEFAULT_A_MAX,
            lr_min: CosineSchedule::DEFAULT_A_MIN,
            adam: AdamConfig::default(),
            architecture: FmArchitecture::default(),
        }
    }
}

/// Full-batch Adam on the total loss with a cosine learning-rate schedule.
pub fn train_fm(dataset: &RheoDataset, config: &FmTrainConfig) -> Result<(FmModel, TrainRun)> {
    train_fm_observed(dataset, config, |_, _| {})
}

/// As [`train_fm`], calling `observer` after every iteration's loss evaluation.
pub fn train_fm_observed(
    dataset: &RheoDataset,
    config: &FmTrainConfig,
    mut observer: impl FnMut(&LossRecord, &FmModel),
) -> Result<(FmModel, TrainRun)> {
    let schedule = CosineSchedule::new(config.lr_min, config.lr_max, config.iterations)?;
    let mut model = FmModel::init(&config.architecture, dataset, config.seed)?;
    let inputs = time_inputs(&model, dataset);
    let mut params = model.trainable();
    let mut adam = AdamState::new(params.len(), config.adam);
    let mut history = Vec::with_capacity(config.iterations);
    let at = |it: usize, e: Error| Error::numeric("train_fm", format!("iteration {it}: {e}"));

    for it in 0..config.iterations {
        let (losses, grad) = loss_gradient_at(&model, dataset, &inputs).map_err(|e| at(it, e))?;
        if !losses.total.is_finite() {
            let p = model.parameters();
            return Err(Error::numeric(
                "train_fm",
                format!(
                    "non-finite loss at iteration {it}: data={}, consistency={}, kappa={}, eta={}, nu={}",
                    losses.data, losses.consistency, p.kappa, p.eta, p.nu
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
            "train_fm",
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
