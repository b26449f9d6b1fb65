//! The command implementations behind the `fracpinn` binary.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fraccalc::{FracOrder, MittagLefflerOrder};
use crate::io::{
    ad_metrics, fm_metrics, read_ad_dataset, read_json, read_rheo_dataset, write_ad_dataset, write_bundle, write_json,
    write_rheo_dataset, AdTruth, Curve, FmTruth, OutputLock, ProblemKind, ResultBundle, RunConfig,
};
use crate::metrics::relative_error;
use crate::nn::Checkpoint;
use crate::optim::{LossRecord, TrainRun};
use crate::pinn_ad::{train_ad, AdDataset};
use crate::pinn_fm::{predict_relaxation_modulus, train_fm, FmModel, RheoDataset};
use crate::sim::{
    add_noise, gaussian_bump, gen_fm_response, max_stable_dt, ramp_hold_strain, solve_frac_diffusion, Grid2D,
};

pub const DATASET_FILE: &str = "dataset.csv";
pub const TRUTH_FILE: &str = "truth.json";

/// Files written by a `generate-*` command.
#[derive(Debug, Clone, PartialEq)]
pub struct Generated {
    pub dataset: PathBuf,
    pub truth: PathBuf,
    pub rows: usize,
}

/// The clean benchmark dataset described by `cfg.generate_ad`, before noise.
pub fn benchmark_ad_dataset(cfg: &RunConfig) -> Result<AdDataset> {
    let g = &cfg.generate_ad;
    let grid = Grid2D::unit_square(g.n)?;
    let alpha = FracOrder::new(g.alpha)?;
    let (_, d_max) = g.diffusion.range_on(0.0, 1.0);
    let dt = g.dt_fraction * max_stable_dt(&grid, alpha, d_max)?;
    let c0 = gaussian_bump(&grid, (g.bump_center[0], g.bump_center[1]), g.bump_width);
    let series = solve_frac_diffusion(&grid, alpha, &g.diffusion, &c0, dt, g.steps * g.time_stride)?;
    AdDataset::from_field_series(&series.every_nth_level(g.time_stride)?, g.stride)
}

/// Noisy dataset and truth for `cfg.generate_ad`, computed in memory.
pub fn synthesize_ad(cfg: &RunConfig) -> Result<(AdDataset, AdTruth)> {
    let clean = benchmark_ad_dataset(cfg)?;
    let c: Vec<f64> = clean.records().iter().map(|r| r[3]).collect();
    let noisy = clean.with_concentrations(&add_noise(&c, cfg.generate_ad.noise, cfg.seed)?)?;
    let (lo, hi) = clean.concentration_range();
    let truth = AdTruth {
        alpha: cfg.generate_ad.alpha,
        diffusion: cfg.generate_ad.diffusion.clone(),
        c_range: [lo, hi],
        noise: cfg.generate_ad.noise,
        seed: cfg.seed,
    };
    Ok((noisy, truth))
}

/// Noisy ramp-and-hold dataset and truth for `cfg.generate_fm`.
pub fn synthesize_fm(cfg: &RunConfig) -> Result<(RheoDataset, FmTruth)> {
    let f = &cfg.generate_fm;
    let nu = MittagLefflerOrder::new(f.nu)?;
    let n = f.points;
    let times: Vec<f64> = (0..n).map(|k| f.t_end * k as f64 / (n - 1) as f64).collect();
    let fine_n = (n - 1) * f.refine + 1;
    let fine: Vec<f64> = (0..fine_n).map(|k| f.t_end * k as f64 / (fine_n - 1) as f64).collect();
    let stress_fine = gen_fm_response(&ramp_hold_strain(f.eps0, f.t_ramp, &fine), f.kappa, f.eta, nu, fine[1])?;
    let stress: Vec<f64> = stress_fine.iter().step_by(f.refine).copied().collect();
    let strain = ramp_hold_strain(f.eps0, f.t_ramp, &times);
    // independent streams for the two channels
    let stress = add_noise(&stress, f.noise, cfg.seed)?;
    let strain = add_noise(&strain, f.noise, cfg.seed.wrapping_add(1))?;
    let truth = FmTruth {
        kappa: f.kappa,
        eta: f.eta,
        nu: f.nu,
        eps0: f.eps0,
        t_ramp: f.t_ramp,
        noise: f.noise,
        seed: cfg.seed,
    };
    Ok((RheoDataset::new(times, stress, strain)?, truth))
}

pub fn generate_ad(cfg: &RunConfig) -> Result<Generated> {
    let _lock = OutputLock::acquire(&cfg.output)?;
    let (ds, truth) = synthesize_ad(cfg)?;
    let out = Generated {
        dataset: cfg.output.join(DATASET_FILE),
        truth: cfg.output.join(TRUTH_FILE),
        rows: ds.len(),
    };
    write_ad_dataset(&out.dataset, &ds)?;
    write_json(&out.truth, &truth)?;
    Ok(out)
}

pub fn generate_fm(cfg: &RunConfig) -> Result<Generated> {
    let _lock = OutputLock::acquire(&cfg.output)?;
    let (ds, truth) = synthesize_fm(cfg)?;
    let out = Generated {
        dataset: cfg.output.join(DATASET_FILE),
        truth: cfg.output.join(TRUTH_FILE),
        rows: ds.len(),
    };
    write_rheo_dataset(&out.dataset, &ds)?;
    write_json(&out.truth, &truth)?;
    Ok(out)
}

/// Per-iteration losses followed by the evaluation after the last update, so
/// a zero-iteration run still records its initial losses.
fn loss_history(run: TrainRun) -> Vec<LossRecord> {
    let mut h = run.history;
    h.push(run.final_loss);
    h
}

/// Trains on an in-memory dataset and assembles the bundle.
pub fn run_ad(cfg: &RunConfig, dataset: &AdDataset, truth: Option<&AdTruth>) -> Result<ResultBundle> {
    let mut train = cfg.train_ad.clone();
    train.seed = cfg.seed;
    let (model, run) = train_ad(dataset, &train)?;
    let (metrics, curve) = ad_metrics(&model, &run, dataset, truth)?;
    Ok(ResultBundle {
        metrics,
        curve,
        checkpoint: model.to_checkpoint(),
        history: loss_history(run),
    })
}

pub fn run_fm(cfg: &RunConfig, dataset: &RheoDataset, truth: Option<&FmTruth>) -> Result<ResultBundle> {
    let mut train = cfg.train_fm.clone();
    train.seed = cfg.seed;
    let (model, run) = train_fm(dataset, &train)?;
    let (metrics, curve) = fm_metrics(&model, &run, dataset, truth)?;
    Ok(ResultBundle {
        metrics,
        curve,
        checkpoint: model.to_checkpoint(),
        history: loss_history(run),
    })
}

pub fn train_ad_command(cfg: &RunConfig) -> Result<ResultBundle> {
    let dataset = read_ad_dataset(cfg.dataset_path()?)?;
    let truth: Option<AdTruth> = cfg.truth_path()?.map(read_json).transpose()?;
    let _lock = OutputLock::acquire(&cfg.output)?;
    let bundle = run_ad(cfg, &dataset, truth.as_ref())?;
    write_bundle(&cfg.output, &bundle)?;
    Ok(bundle)
}

pub fn train_fm_command(cfg: &RunConfig) -> Result<ResultBundle> {
    let dataset = read_rheo_dataset(cfg.dataset_path()?)?;
    let truth: Option<FmTruth> = cfg.truth_path()?.map(read_json).transpose()?;
    let _lock = OutputLock::acquire(&cfg.output)?;
    let bundle = run_fm(cfg, &dataset, truth.as_ref())?;
    write_bundle(&cfg.output, &bundle)?;
    Ok(bundle)
}

/// G(t) from a trained checkpoint on the `predict` time grid, written to
/// `<output>/relaxation_modulus.csv`.
pub fn predict_g(cfg: &RunConfig) -> Result<(PathBuf, Curve)> {
    let ck_path = cfg
        .predict
        .checkpoint
        .clone()
        .unwrap_or_else(|| cfg.output.join(ResultBundle::CHECKPOINT));
    let model = FmModel::from_checkpoint(&Checkpoint::load(&ck_path)?)?;
    let n = cfg.predict.points;
    let times: Vec<f64> = match n {
        1 => vec![0.0],
        _ => (0..n).map(|k| cfg.predict.t_end * k as f64 / (n - 1) as f64).collect(),
    };
    let g = predict_relaxation_modulus(&model, &times)?;
    let curve = Curve::new("t", "g", times, g);
    let _lock = OutputLock::acquire(&cfg.output)?;
    let path = cfg.output.join(ResultBundle::curve_file(ProblemKind::Fm));
    curve.write(&path)?;
    Ok((path, curve))
}

/// Relative L2 error of one curve against a reference on the same grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub schema_version: u32,
    pub column: String,
    pub points: usize,
    pub relative_error: f64,
}

/// A curve file, or the curve inside a result bundle directory.
fn curve_in(path: &Path) -> Result<PathBuf> {
    if !path.is_dir() {
        return Ok(path.to_path_buf());
    }
    [ProblemKind::Ad, ProblemKind::Fm]
        .iter()
        .map(|&k| path.join(ResultBundle::curve_file(k)))
        .find(|p| p.is_file())
        .ok_or_else(|| Error::Config(format!("{} holds no curve file", path.display())))
}

/// Compares two curve files sample by sample; grids must match exactly.
/// `pred` may also be a result bundle directory.
pub fn eval_curves(pred: &Path, reference: &Path) -> Result<EvalReport> {
    let pred = &curve_in(pred)?;
    let p = Curve::read(pred)?;
    let r = Curve::read(reference)?;
    let misaligned = |detail: String| Error::Dataset {
        path: pred.to_path_buf(),
        detail,
    };
    if p.x_name != r.x_name || p.y_name != r.y_name {
        return Err(misaligned(format!(
            "columns ({}, {}) do not match reference ({}, {})",
            p.x_name, p.y_name, r.x_name, r.y_name
        )));
    }
    if p.x.len() != r.x.len() {
        return Err(misaligned(format!(
            "{} samples against {} in the reference; resampling is not supported",
            p.x.len(),
            r.x.len()
        )));
    }
    if let Some(i) = p.x.iter().zip(&r.x).position(|(a, b)| a != b) {
        return Err(misaligned(format!(
            "grids differ at row {}: {} vs {}; resampling is not supported",
            i + 1,
            p.x[i],
            r.x[i]
        )));
    }
    Ok(EvalReport {
        schema_version: crate::io::METRICS_SCHEMA_VERSION,
        column: p.y_name.clone(),
        points: p.x.len(),
        relative_error: relative_error(&p.y, &r.y)?,
    })
}

/// As [`eval_curves`], also writing `<output>/eval.json`.
pub fn eval_command(cfg: &RunConfig, pred: &Path, reference: &Path) -> Result<EvalReport> {
    let report = eval_curves(pred, reference)?;
    let _lock = OutputLock::acquire(&cfg.output)?;
    write_json(&cfg.output.join("eval.json"), &report)?;
    Ok(report)
}
