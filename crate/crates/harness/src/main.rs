use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::{error, info};

use qsg_harness::config::{ExperimentConfig, ExperimentKind};
use qsg_harness::error::{HarnessError, Result};
use qsg_harness::experiments::{run_experiment, single_run};
use qsg_harness::fit::{fit_linear, middle_window};
use qsg_harness::output::{read_columns, write_outputs};

/// Lattice sine-Gordon experiments: analytic predictions, DMRG runs, scans and fits.
#[derive(Parser)]
#[command(name = "qsg", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Experiment configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides `[output] dir`.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// RNG seed; overrides the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form predictions only (kinds `predict` and `ctm_asymptotic`).
    Predict,
    /// One ground-state run at the base couplings of the config.
    Dmrg,
    /// Run the configured experiment over its grid.
    Scan,
    /// Straight-line fit of two columns of a CSV table.
    Fit(FitArgs),
    /// QEC against XYZ against CTM (kinds `es_comparison` and `xyz_scan`).
    Compare,
}

#[derive(Args)]
struct FitArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    x: String,
    #[arg(long)]
    y: String,
    #[arg(long)]
    log_x: bool,
    #[arg(long)]
    log_y: bool,
    /// Fit only rows [start, end); the middle-window policy if omitted.
    #[arg(long, num_args = 2, value_names = ["START", "END"])]
    window: Option<Vec<usize>>,
    /// Use every row.
    #[arg(long, conflicts_with = "window")]
    all: bool,
}

fn load(common: &Common) -> Result<ExperimentConfig> {
    let path = common.config.as_ref().ok_or_else(|| HarnessError::Config("--config is required".into()))?;
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn out_dir(common: &Common, cfg: &ExperimentConfig) -> PathBuf {
    common.out_dir.clone().unwrap_or_else(|| cfg.output.dir.clone())
}

fn finish(common: &Common, cfg: &ExperimentConfig, out: qsg_harness::ExperimentOutput, threads: usize) -> Result<bool> {
    let dir = out_dir(common, cfg);
    let s = write_outputs(cfg, &out, &dir, threads)?;
    for q in &s.quantities {
        let mark = match q.pass {
            Some(true) => " [pass]",
            Some(false) => " [FAIL]",
            None => "",
        };
        println!("{:<40} {:>22.12e}{mark}", q.name, q.value);
    }
    for f in &s.failures {
        println!("point {} ({}) failed: {}", f.point, f.params, f.error);
    }
    info!("wrote {}", dir.display());
    Ok(s.pass)
}

fn require(cfg: &ExperimentConfig, kinds: &[ExperimentKind], cmd: &str) -> Result<()> {
    if kinds.contains(&cfg.kind) {
        Ok(())
    } else {
        Err(HarnessError::Config(format!("`{cmd}` does not run experiments of kind {:?}", cfg.kind)))
    }
}

fn fit_csv(args: &FitArgs, dir: Option<&Path>) -> Result<()> {
    let cols = read_columns(&args.input, &[&args.x, &args.y])?;
    let tr = |v: &[f64], log: bool| -> Vec<f64> { v.iter().map(|x| if log { x.ln() } else { *x }).collect() };
    let (xs, ys) = (tr(&cols[0], args.log_x), tr(&cols[1], args.log_y));
    let window = match (&args.window, args.all) {
        (Some(w), _) => w[0]..w[1],
        (None, true) => 0..xs.len(),
        (None, false) => middle_window(xs.len()),
    };
    let f = fit_linear(&xs, &ys, Some(window))?;
    let text = serde_json::to_string_pretty(&f).map_err(|e| HarnessError::Output(e.to_string()))?;
    println!("{text}");
    if let Some(d) = dir {
        std::fs::create_dir_all(d)?;
        std::fs::write(d.join("fit.json"), text)?;
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<bool> {
    let c = &cli.common;
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(c.threads)
        .build_global()
        .map_err(|e| HarnessError::Config(e.to_string()))?;
    let threads = if cfg!(feature = "parallel") && qsg_core::par::is_parallel() {
        #[cfg(feature = "parallel")]
        {
            rayon::current_num_threads()
        }
        #[cfg(not(feature = "parallel"))]
        {
            1
        }
    } else {
        1
    };
    match &cli.command {
        Command::Fit(args) => {
            fit_csv(args, c.out_dir.as_deref())?;
            Ok(true)
        }
        Command::Predict => {
            let cfg = load(c)?;
            require(&cfg, &[ExperimentKind::Predict, ExperimentKind::CtmAsymptotic], "predict")?;
            finish(c, &cfg, run_experiment(&cfg)?, threads)
        }
        Command::Compare => {
            let cfg = load(c)?;
            require(&cfg, &[ExperimentKind::EsComparison, ExperimentKind::XyzScan], "compare")?;
            finish(c, &cfg, run_experiment(&cfg)?, threads)
        }
        Command::Scan => {
            let cfg = load(c)?;
            finish(c, &cfg, run_experiment(&cfg)?, threads)
        }
        Command::Dmrg => {
            let mut cfg = load(c)?;
            // A single run always keeps its state.
            cfg.output.checkpoints = true;
            finish(c, &cfg, single_run(&cfg)?, threads)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            error!("some declared targets failed");
            ExitCode::from(2)
        }
        Err(e) => {
            error!("{e}");
            ExitCode::FAILURE
        }
    }
}
