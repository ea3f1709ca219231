use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use equisampler_bench::config::{ExperimentConfig, ExperimentKind, ModeSelection};
use equisampler_bench::quench::{run_quench_campaign, write_native, NATIVE_FILE};
use equisampler_bench::{emit_campaign, emit_reports, BenchError, Result};

#[derive(Parser)]
#[command(name = "equisampler", version, about = "Equi-energy sampler benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Convergence and acceptance on the rough one-dimensional landscape.
    Bench1d(CommonArgs),
    /// Search for the lowest-energy BLN structure; writes native.xyz.
    Quench(CommonArgs),
    /// EE vs PT folding trajectories from loop-randomized starts.
    Fold(FoldArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// JSON experiment configuration; built-in defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (overrides the config).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Single seed (overrides the config's seed list).
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    mode: Option<ModeSelection>,
}

#[derive(Args)]
struct FoldArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Native structure (overrides the config).
    #[arg(long)]
    native: Option<PathBuf>,
}

fn load(kind: ExperimentKind, args: &CommonArgs) -> Result<ExperimentConfig> {
    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::new(kind),
    };
    if cfg.experiment != kind {
        return Err(BenchError::Config(format!(
            "config describes a {:?} experiment, not {kind:?}",
            cfg.experiment
        )));
    }
    if let Some(seed) = args.seed {
        cfg.seeds = vec![seed];
    }
    if let Some(mode) = args.mode {
        cfg.mode = mode;
    }
    if let Some(out) = &args.out {
        cfg.output_dir = Some(out.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn output_dir(cfg: &ExperimentConfig) -> PathBuf {
    cfg.output_dir.clone().unwrap_or_else(|| PathBuf::from("out"))
}

fn flush_partial(err: &BenchError, dir: &Path) {
    if let BenchError::Aborted { report, .. } = err {
        if let Err(e) = emit_reports(report, dir) {
            log::error!("could not write partial report: {e}");
        } else {
            log::info!("partial report written to {}", dir.display());
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let (kind, common, native) = match &cli.command {
        Command::Bench1d(a) => (ExperimentKind::Bench1d, a, None),
        Command::Quench(a) => (ExperimentKind::QuenchCampaign, a, None),
        Command::Fold(a) => (ExperimentKind::Fold, &a.common, a.native.clone()),
    };
    let mut cfg = load(kind, common)?;
    if native.is_some() {
        cfg.fold.native = native;
    }
    let dir = output_dir(&cfg);
    std::fs::create_dir_all(&dir)?;
    if kind == ExperimentKind::QuenchCampaign {
        let (report, native) = run_quench_campaign(&cfg).inspect_err(|e| flush_partial(e, &dir))?;
        let q = report.quench.as_ref().expect("campaign summary");
        write_native(&native, q.h_min, &dir.join(NATIVE_FILE))?;
        emit_reports(&report, &dir)?;
        println!("h_min {:?}  H_0 {:?}  h_unf {:?}", q.h_min, q.h0, q.h_unf);
        return Ok(());
    }
    let reports = equisampler_bench::run_experiment(&cfg).inspect_err(|e| flush_partial(e, &dir))?;
    emit_campaign(&reports, &dir)?;
    for r in &reports {
        for v in &r.variants {
            let acc = v.mean_ee_acceptance.or(v.mean_swap_acceptance).unwrap_or(f64::NAN);
            println!("seed {} {}: acceptance {acc:.4}", r.seed, v.name);
        }
    }
    println!("reports written to {}", dir.display());
    Ok(())
}

fn init_threads() -> Result<()> {
    let Ok(value) = std::env::var("EQUISAMPLER_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .parse()
        .map_err(|_| BenchError::Config(format!("EQUISAMPLER_THREADS must be a count, got {value:?}")))?;
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| BenchError::Config(e.to_string()))?;
    #[cfg(not(feature = "parallel"))]
    let _ = threads;
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match init_threads().and_then(|_| run(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
