mod common;

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use fracpinn::app::{eval_curves, synthesize_ad};
use fracpinn::io::*;
use fracpinn::pinn_ad::AdDataset;
use fracpinn::pinn_fm::RheoDataset;
use fracpinn::sim::{gaussian_bump, max_stable_dt, solve_frac_diffusion, Grid2D};
use fracpinn::fraccalc::FracOrder;
use fracpinn::Error;
use proptest::prelude::*;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_fracpinn"));
    // keep the caller's environment from leaking into the runs
    for (k, _) in std::env::vars().filter(|(k, _)| k.starts_with(ENV_PREFIX)) {
        c.env_remove(k);
    }
    c
}

fn run(args: &[&str], cfg: Option<&Path>) -> Output {
    let mut c = bin();
    c.args(args);
    if let Some(p) = cfg {
        c.arg("--config").arg(p);
    }
    c.output().expect("binary runs")
}

fn ok(out: &Output) {
    assert!(
        out.status.success(),
        "status {:?}\nstdout: {}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("run.toml");
    std::fs::write(&p, text).unwrap();
    p
}

const SMALL_AD: &str = "
[generate_ad]
n = 9
stride = 1
time_stride = 1
steps = 3
noise = 0.1

[train_ad]
iterations = 15
";

const SMALL_FM: &str = "
[generate_fm]
points = 24
refine = 2

[train_fm]
iterations = 15
";

fn arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn generate_ad_writes_full_grid_and_truth() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("gen");
    let cfg = write_config(dir.path(), SMALL_AD);
    ok(&run(&["generate-ad", "--seed", "5", "--out", arg(&out)], Some(&cfg)));

    let ds = read_ad_dataset(&out.join("dataset.csv")).unwrap();
    assert_eq!(ds.len(), 9 * 9 * (3 + 1));
    let truth: AdTruth = read_json(&out.join("truth.json")).unwrap();
    assert_eq!(truth.seed, 5);
    assert_eq!(truth.noise, 0.1);
    assert_eq!(truth.alpha, 0.8);
    assert!(!out.join(OutputLock::FILE_NAME).exists());
}

#[test]
fn default_benchmark_row_count() {
    let cfg = RunConfig::default();
    let (ds, _) = synthesize_ad(&cfg).unwrap();
    let g = &cfg.generate_ad;
    let side = (g.n - 1) / g.stride + 1;
    assert_eq!(ds.len(), side * side * (g.steps + 1));
}

#[test]
fn noiseless_dataset_is_the_solver_field() {
    let cfg = RunConfig::from_toml("[generate_ad]\nn = 9\nstride = 1\ntime_stride = 1\nsteps = 4\n").unwrap();
    let (ds, _) = synthesize_ad(&cfg).unwrap();
    let grid = Grid2D::unit_square(9).unwrap();
    let a = FracOrder::new(0.8).unwrap();
    let dt = 0.95 * max_stable_dt(&grid, a, 0.1).unwrap();
    let s = solve_frac_diffusion(&grid, a, &cfg.generate_ad.diffusion, &gaussian_bump(&grid, (0.5, 0.5), 0.02), dt, 4).unwrap();
    let reference = AdDataset::from_field_series(&s, 1).unwrap();
    assert_eq!(ds, reference);
    assert_eq!(ds.sigma_c(), reference.sigma_c());
}

#[test]
fn train_with_zero_iterations_emits_full_bundle() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    let out = dir.path().join("fit");
    let cfg = write_config(dir.path(), &SMALL_AD.replace("iterations = 15", "iterations = 0"));
    ok(&run(&["generate-ad", "--out", arg(&data)], Some(&cfg)));
    ok(&run(
        &[
            "train-ad",
            "--out",
            arg(&out),
            "--dataset",
            arg(&data.join("dataset.csv")),
            "--truth",
            arg(&data.join("truth.json")),
        ],
        Some(&cfg),
    ));
    for f in ["metrics.json", "diffusion_curve.csv", "checkpoint.json", "loss_history.csv"] {
        assert!(out.join(f).is_file(), "{f} missing");
    }
    let m: Metrics = read_json(&out.join("metrics.json")).unwrap();
    assert_eq!(m.schema_version, METRICS_SCHEMA_VERSION);
    assert_eq!(m.iterations, 0);
    assert_eq!(m.kind, ProblemKind::Ad);
    assert!(matches!(m.errors, Some(Scores::Ad(_))));
    let hist = read_table(&out.join("loss_history.csv"), &LOSS_HISTORY_COLUMNS).unwrap();
    assert_eq!(hist.rows.len(), 1);
    assert_eq!(hist.rows[0][3], m.final_loss.total);
}

#[test]
fn training_is_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    let cfg = write_config(dir.path(), SMALL_AD);
    ok(&run(&["generate-ad", "--seed", "3", "--out", arg(&data)], Some(&cfg)));
    let mut bundles = Vec::new();
    for name in ["a", "b"] {
        let out = dir.path().join(name);
        ok(&run(
            &["train-ad", "--seed", "3", "--out", arg(&out), "--dataset", arg(&data.join("dataset.csv"))],
            Some(&cfg),
        ));
        let files: Vec<Vec<u8>> = ["metrics.json", "diffusion_curve.csv", "checkpoint.json", "loss_history.csv"]
            .iter()
            .map(|f| std::fs::read(out.join(f)).unwrap())
            .collect();
        bundles.push(files);
    }
    assert_eq!(bundles[0], bundles[1]);
    let m: Metrics = read_json(&dir.path().join("a/metrics.json")).unwrap();
    assert!(m.errors.is_none());
    assert_eq!(m.seed, 3);
}

#[test]
fn fm_pipeline_and_eval() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    let fit = dir.path().join("fit");
    let cfg = write_config(dir.path(), SMALL_FM);
    ok(&run(&["generate-fm", "--out", arg(&data)], Some(&cfg)));
    let ds = read_rheo_dataset(&data.join("dataset.csv")).unwrap();
    assert_eq!(ds.len(), 24);
    ok(&run(
        &[
            "train-fm",
            "--out",
            arg(&fit),
            "--dataset",
            arg(&data.join("dataset.csv")),
            "--truth",
            arg(&data.join("truth.json")),
        ],
        Some(&cfg),
    ));
    let m: Metrics = read_json(&fit.join("metrics.json")).unwrap();
    assert!(matches!(m.recovered, Recovered::Fm { .. }));
    assert!(matches!(m.errors, Some(Scores::Fm(_))));

    // a curve scored against itself, by path and by bundle directory
    let curve = fit.join("relaxation_modulus.csv");
    ok(&run(&["eval", "--out", arg(&dir.path().join("e1")), arg(&curve), arg(&curve)], None));
    let rep: fracpinn::app::EvalReport = read_json(&dir.path().join("e1/eval.json")).unwrap();
    assert_eq!(rep.relative_error, 0.0);
    assert_eq!(eval_curves(&fit, &curve).unwrap().relative_error, 0.0);

    ok(&run(&["predict-g", "--out", arg(&fit)], Some(&cfg)));
    let g = Curve::read(&curve).unwrap();
    assert_eq!(g.x.len(), 512);
    assert!(g.y.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn eval_scores_scaled_curve_and_refuses_misalignment() {
    let dir = tempfile::tempdir().unwrap();
    let x: Vec<f64> = (0..50).map(|i| i as f64 * 0.1).collect();
    let y: Vec<f64> = x.iter().map(|t| (-t).exp()).collect();
    let reference = dir.path().join("ref.csv");
    Curve::new("t", "g", x.clone(), y.clone()).write(&reference).unwrap();

    let scaled = dir.path().join("scaled.csv");
    Curve::new("t", "g", x.clone(), y.iter().map(|v| 1.1 * v).collect()).write(&scaled).unwrap();
    assert!((eval_curves(&scaled, &reference).unwrap().relative_error - 0.1).abs() < 1e-12);

    let shifted = dir.path().join("shifted.csv");
    Curve::new("t", "g", x.iter().map(|t| t + 0.05).collect(), y.clone()).write(&shifted).unwrap();
    let out = run(&["eval", "--out", arg(dir.path()), arg(&shifted), arg(&reference)], None);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("resampling is not supported"));

    let short = dir.path().join("short.csv");
    Curve::new("t", "g", x[..10].to_vec(), y[..10].to_vec()).write(&short).unwrap();
    assert!(matches!(eval_curves(&short, &reference), Err(Error::Dataset { .. })));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");

    let bad = write_config(dir.path(), "colour = 1\n");
    assert_eq!(run(&["generate-ad", "--out", arg(&out)], Some(&bad)).status.code(), Some(1));
    assert_eq!(run(&["no-such-command"], None).status.code(), Some(1));
    // training needs an existing dataset
    let missing = run(&["train-ad", "--out", arg(&out), "--dataset", arg(&dir.path().join("none.csv"))], None);
    assert_eq!(missing.status.code(), Some(1));

    // a diverging optimizer is a numeric failure
    let data = dir.path().join("data");
    let cfg = write_config(dir.path(), SMALL_FM);
    ok(&run(&["generate-fm", "--out", arg(&data)], Some(&cfg)));
    let diverge = write_config(dir.path(), "[train_fm]\niterations = 50\nlr_max = 1e300\nlr_min = 1e300\n");
    let r = run(&["train-fm", "--out", arg(&out), "--dataset", arg(&data.join("dataset.csv"))], Some(&diverge));
    assert_eq!(r.status.code(), Some(2), "{}", String::from_utf8_lossy(&r.stderr));
    assert!(!out.join("metrics.json").exists());
}

#[test]
fn env_overrides_reach_the_binary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let cfg = write_config(dir.path(), SMALL_AD);
    let status = bin()
        .args(["generate-ad", "--out", arg(&out), "--config", arg(&cfg)])
        .env("FRACPINN_SEED", "11")
        .env("FRACPINN_GENERATE_AD__STEPS", "2")
        .output()
        .unwrap();
    ok(&status);
    let truth: AdTruth = read_json(&out.join("truth.json")).unwrap();
    assert_eq!(truth.seed, 11);
    assert_eq!(read_ad_dataset(&out.join("dataset.csv")).unwrap().n_times(), 3);
    // the flag wins over the environment
    ok(&bin()
        .args(["generate-ad", "--out", arg(&out), "--config", arg(&cfg), "--seed", "4"])
        .env("FRACPINN_SEED", "11")
        .output()
        .unwrap());
    let truth: AdTruth = read_json(&out.join("truth.json")).unwrap();
    assert_eq!(truth.seed, 4);
}

#[test]
fn busy_output_directory_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let _held = OutputLock::acquire(dir.path()).unwrap();
    let cfg = write_config(dir.path(), SMALL_AD);
    let r = run(&["generate-ad", "--out", arg(dir.path())], Some(&cfg));
    assert_eq!(r.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&r.stderr).contains("in use"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ad_dataset_round_trips_bit_exactly(
        nloc in 1usize..5,
        nt in 2usize..6,
        dt in 1e-4f64..10.0,
        t0 in -5.0f64..5.0,
        seed in any::<u64>(),
    ) {
        let mut rng = common::rng(seed);
        let locs: Vec<(f64, f64)> = (0..nloc).map(|i| (i as f64 * 0.37, common::uniform(&mut rng, -1.0, 1.0))).collect();
        let mut recs = Vec::new();
        for k in 0..nt {
            for &(x, y) in &locs {
                recs.push([t0 + k as f64 * dt, x, y, common::uniform(&mut rng, -1e3, 1e3)]);
            }
        }
        let ds = AdDataset::from_records(&recs).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("d.csv");
        write_ad_dataset(&p, &ds).unwrap();
        let back = read_ad_dataset(&p).unwrap();
        let bits = |d: &AdDataset| d.records().iter().flat_map(|r| r.map(f64::to_bits)).collect::<Vec<_>>();
        prop_assert_eq!(bits(&back), bits(&ds));
    }

    #[test]
    fn rheo_dataset_round_trips_bit_exactly(n in 2usize..40, dt in 1e-3f64..2.0, seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let times: Vec<f64> = (0..n).map(|k| k as f64 * dt).collect();
        let stress: Vec<f64> = (0..n).map(|_| common::uniform(&mut rng, -1.0, 1.0)).collect();
        let strain: Vec<f64> = (0..n).map(|_| common::uniform(&mut rng, 0.0, 1e-3)).collect();
        let ds = RheoDataset::new(times, stress, strain).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.csv");
        write_rheo_dataset(&p, &ds).unwrap();
        let back = read_rheo_dataset(&p).unwrap();
        let bits = |d: &RheoDataset| d.records().iter().flat_map(|r| r.map(f64::to_bits)).collect::<Vec<_>>();
        prop_assert_eq!(bits(&back), bits(&ds));
    }
}
