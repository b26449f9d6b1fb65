use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::ProblemKind;
use super::tables::{write_table, Curve};
use super::{write_json, AdTruth, FmTruth};
use crate::error::Result;
use crate::fraccalc::{relaxation_modulus, MittagLefflerOrder};
use crate::metrics::relative_error;
use crate::nn::Checkpoint;
use crate::optim::{LossRecord, TrainRun};
use crate::pinn_ad::{recover, AdDataset, AdModel};
use crate::pinn_fm::{predict_relaxation_modulus, FmModel, RheoDataset};

pub const METRICS_SCHEMA_VERSION: u32 = 1;
pub const LOSS_HISTORY_COLUMNS: [&str; 5] = ["iteration", "data", "consistency", "total", "lr"];

/// Points on the recovered D̃(c) curve.
const DIFFUSION_CURVE_POINTS: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FinalLoss {
    pub data: f64,
    pub consistency: f64,
    pub total: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Recovered {
    Ad { alpha: f64 },
    Fm { kappa: f64, eta: f64, nu: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdScores {
    pub alpha_relative: f64,
    pub diffusion_relative_l2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FmScores {
    pub kappa_relative: f64,
    pub eta_relative: f64,
    pub nu_absolute: f64,
    pub modulus_relative_l2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Scores {
    Ad(AdScores),
    Fm(FmScores),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub schema_version: u32,
    pub kind: ProblemKind,
    pub seed: u64,
    pub iterations: usize,
    pub final_loss: FinalLoss,
    pub recovered: Recovered,
    /// Present when a truth file was supplied.
    pub errors: Option<Scores>,
}

/// Everything a training run emits.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultBundle {
    pub metrics: Metrics,
    pub curve: Curve,
    pub checkpoint: Checkpoint,
    pub history: Vec<LossRecord>,
}

impl ResultBundle {
    pub const METRICS: &'static str = "metrics.json";
    pub const CHECKPOINT: &'static str = "checkpoint.json";
    pub const LOSS_HISTORY: &'static str = "loss_history.csv";

    pub fn curve_file(kind: ProblemKind) -> &'static str {
        match kind {
            ProblemKind::Ad => "diffusion_curve.csv",
            ProblemKind::Fm => "relaxation_modulus.csv",
        }
    }
}

fn final_loss(run: &TrainRun) -> FinalLoss {
    FinalLoss {
        data: run.final_loss.data,
        consistency: run.final_loss.consistency,
        total: run.final_loss.total,
    }
}

/// Metrics and the D̃(c) curve; the curve spans the truth's concentration
/// range when a truth file is given.
pub fn ad_metrics(model: &AdModel, run: &TrainRun, dataset: &AdDataset, truth: Option<&AdTruth>) -> Result<(Metrics, Curve)> {
    let range = truth.map(|t| (t.c_range[0], t.c_range[1]));
    let rec = recover(model, dataset, range, DIFFUSION_CURVE_POINTS)?;
    let errors = match truth {
        Some(t) => {
            let reference: Vec<f64> = rec.c.iter().map(|&c| t.diffusion.value(c)).collect();
            Some(Scores::Ad(AdScores {
                alpha_relative: (rec.alpha - t.alpha).abs() / t.alpha,
                diffusion_relative_l2: relative_error(&rec.d, &reference)?,
            }))
        }
        None => None,
    };
    let metrics = Metrics {
        schema_version: METRICS_SCHEMA_VERSION,
        kind: ProblemKind::Ad,
        seed: run.seed,
        iterations: run.iterations,
        final_loss: final_loss(run),
        recovered: Recovered::Ad { alpha: rec.alpha },
        errors,
    };
    Ok((metrics, Curve::new("c", "d", rec.c, rec.d)))
}

/// Metrics and G(t) on the dataset's time grid.
pub fn fm_metrics(model: &FmModel, run: &TrainRun, dataset: &RheoDataset, truth: Option<&FmTruth>) -> Result<(Metrics, Curve)> {
    let times = dataset.times().to_vec();
    let g = predict_relaxation_modulus(model, &times)?;
    let p = model.parameters();
    let errors = match truth {
        Some(t) => {
            let nu = MittagLefflerOrder::new(t.nu)?;
            let reference = times
                .iter()
                .map(|&s| relaxation_modulus(t.kappa, t.eta, nu, s))
                .collect::<Result<Vec<_>>>()?;
            Some(Scores::Fm(FmScores {
                kappa_relative: (p.kappa - t.kappa).abs() / t.kappa,
                eta_relative: (p.eta - t.eta).abs() / t.eta,
                nu_absolute: (p.nu - t.nu).abs(),
                modulus_relative_l2: relative_error(&g, &reference)?,
            }))
        }
        None => None,
    };
    let metrics = Metrics {
        schema_version: METRICS_SCHEMA_VERSION,
        kind: ProblemKind::Fm,
        seed: run.seed,
        iterations: run.iterations,
        final_loss: final_loss(run),
        recovered: Recovered::Fm {
            kappa: p.kappa,
            eta: p.eta,
            nu: p.nu,
        },
        errors,
    };
    Ok((metrics, Curve::new("t", "g", times, g)))
}

pub fn loss_history_rows(history: &[LossRecord]) -> impl Iterator<Item = Vec<f64>> + '_ {
    history
        .iter()
        .map(|r| vec![r.iteration as f64, r.data, r.consistency, r.total, r.lr])
}

/// Writes the four bundle files into `dir` and returns their paths.
pub fn write_bundle(dir: &Path, bundle: &ResultBundle) -> Result<Vec<PathBuf>> {
    let paths = vec![
        dir.join(ResultBundle::METRICS),
        dir.join(ResultBundle::curve_file(bundle.metrics.kind)),
        dir.join(ResultBundle::CHECKPOINT),
        dir.join(ResultBundle::LOSS_HISTORY),
    ];
    write_json(&paths[0], &bundle.metrics)?;
    bundle.curve.write(&paths[1])?;
    write_json(&paths[2], &bundle.checkpoint)?;
    write_table(&paths[3], &LOSS_HISTORY_COLUMNS, loss_history_rows(&bundle.history))?;
    Ok(paths)
}
