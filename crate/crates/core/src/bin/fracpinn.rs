use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use fracpinn::app;
use fracpinn::io::{ProblemKind, RunConfig};
use fracpinn::Result;

/// Fractional-order physics-informed inverse solvers.
#[derive(Parser)]
#[command(name = "fracpinn", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML run configuration; FRACPINN_* variables override its keys.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    common: Common,
    /// Dataset CSV (overrides `dataset`).
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// Truth JSON used for scoring (overrides `truth`).
    #[arg(long)]
    truth: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate the sub-diffusion benchmark and write dataset.csv and truth.json.
    GenerateAd(Common),
    /// Simulate a fractional Maxwell relaxation test.
    GenerateFm(Common),
    TrainAd(TrainArgs),
    TrainFm(TrainArgs),
    /// Relaxation modulus G(t) from a trained fractional Maxwell checkpoint.
    PredictG {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        checkpoint: Option<PathBuf>,
    },
    /// Relative L2 error of a predicted curve (or bundle) against a reference CSV.
    Eval {
        #[command(flatten)]
        common: Common,
        pred: PathBuf,
        reference: PathBuf,
    },
}

fn load(common: &Common, kind: Option<ProblemKind>) -> Result<RunConfig> {
    let mut cfg = RunConfig::load(common.config.as_deref())?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &common.out {
        cfg.output = out.clone();
    }
    if let Some(kind) = kind {
        cfg.kind = kind;
    }
    Ok(cfg)
}

fn load_train(args: &TrainArgs, kind: ProblemKind) -> Result<RunConfig> {
    let mut cfg = load(&args.common, Some(kind))?;
    if let Some(d) = &args.dataset {
        cfg.dataset = Some(d.clone());
    }
    if let Some(t) = &args.truth {
        cfg.truth = Some(t.clone());
    }
    Ok(cfg)
}

fn report(paths: &[PathBuf]) {
    for p in paths {
        println!("wrote {}", p.display());
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::GenerateAd(c) => {
            let g = app::generate_ad(&load(&c, Some(ProblemKind::Ad))?)?;
            println!("{} rows", g.rows);
            report(&[g.dataset, g.truth]);
        }
        Command::GenerateFm(c) => {
            let g = app::generate_fm(&load(&c, Some(ProblemKind::Fm))?)?;
            println!("{} rows", g.rows);
            report(&[g.dataset, g.truth]);
        }
        Command::TrainAd(a) => {
            let cfg = load_train(&a, ProblemKind::Ad)?;
            let b = app::train_ad_command(&cfg)?;
            println!("final loss {:.6e}", b.metrics.final_loss.total);
            println!("wrote bundle to {}", cfg.output.display());
        }
        Command::TrainFm(a) => {
            let cfg = load_train(&a, ProblemKind::Fm)?;
            let b = app::train_fm_command(&cfg)?;
            println!("final loss {:.6e}", b.metrics.final_loss.total);
            println!("wrote bundle to {}", cfg.output.display());
        }
        Command::PredictG { common, checkpoint } => {
            let mut cfg = load(&common, Some(ProblemKind::Fm))?;
            if checkpoint.is_some() {
                cfg.predict.checkpoint = checkpoint;
            }
            let (path, _) = app::predict_g(&cfg)?;
            report(&[path]);
        }
        Command::Eval {
            common,
            pred,
            reference,
        } => {
            let cfg = load(&common, None)?;
            let r = app::eval_command(&cfg, &pred, &reference)?;
            println!("{} relative L2 error {:.6e} over {} points", r.column, r.relative_error, r.points);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    // usage errors are configuration errors, not clap's default status 2
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("fracpinn: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
