mod config;
mod csv;
mod validate;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{info, warn};

use qheat::flywheel::{self, FlywheelParams};
use qheat::parallel::Execution;
use qheat::sweep::{self, SweepAxis};

use config::{Assignments, ConfigError, ModelSel, RunConfig};
use csv::CsvWriter;

#[derive(Parser)]
#[command(name = "qheat", version, about = "Quantum heat engine simulations, sweeps and validation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep one parameter and compare simulation against the closed forms
    Sweep(Common),
    /// Run the invariant suites
    Validate {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = Level::Quick)]
        level: Level,
    },
    /// Monte Carlo flywheel walk against its exact moments
    FlywheelMc(Common),
}

#[derive(Args, Clone)]
struct Common {
    /// key = value configuration file
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one key (repeatable, highest precedence)
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
    #[arg(long, value_parser = ["fig2", "fig5"])]
    preset: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: available parallelism)
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Level {
    Quick,
    Full,
}

/// Marks a failed invariant or rejected run; maps to exit code 1.
#[derive(Debug)]
pub struct ValidationFailure(pub String);

impl std::fmt::Display for ValidationFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "validation failed: {}", self.0)
    }
}

impl std::error::Error for ValidationFailure {}

fn load_config(common: &Common) -> Result<RunConfig> {
    let mut a = Assignments::default();
    if let Some(name) = &common.preset {
        a.parse_text(config::preset(name)?, name)?;
    }
    if let Some(path) = &common.config {
        a.parse_file(path)?;
    }
    for s in &common.sets {
        a.parse_override(s)?;
    }
    let mut cfg = a.build()?;
    if let Some(out) = &common.out {
        cfg.out = Some(out.clone());
    }
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if common.jobs.is_some() {
        cfg.jobs = common.jobs;
    }
    Ok(cfg)
}

fn execution(jobs: Option<usize>) -> Result<Execution> {
    match jobs {
        Some(0) => Err(ConfigError("jobs must be at least 1".into()).into()),
        Some(1) => Ok(Execution::Sequential),
        Some(n) => {
            if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                warn!("thread pool already initialised: {e}");
            }
            Ok(Execution::Parallel)
        }
        None => Ok(Execution::Parallel),
    }
}

/// `out.csv` -> `out-<model>.csv` when several models share one output path.
fn output_for(base: &Path, model: ModelSel, several: bool) -> PathBuf {
    if !several {
        return base.to_path_buf();
    }
    let stem = base.file_stem().and_then(|s| s.to_str()).unwrap_or("sweep");
    let ext = base.extension().and_then(|s| s.to_str()).unwrap_or("csv");
    base.with_file_name(format!("{stem}-{model}.{ext}"))
}

const SWEEP_HEADER: [&str; 19] = [
    "axis",
    "value",
    "w_dot",
    "delta_w_dot",
    "sigma_dot",
    "tur_ratio",
    "eta",
    "w_dot_analytic",
    "delta_w_dot_analytic",
    "sigma_dot_analytic",
    "tur_ratio_analytic",
    "eta_analytic",
    "dev_w_dot",
    "dev_delta_w_dot",
    "dev_sigma_dot",
    "dev_tur_ratio",
    "dev_eta",
    "fit_r2",
    "wall_seconds",
];

const FLYWHEEL_TUR_HEADER: [&str; 6] = ["axis", "value", "p0", "tur_coherent", "tur_fock", "tur_ct"];

fn cmd_sweep(cfg: &RunConfig, exec: Execution) -> Result<()> {
    let base = cfg.out.clone().unwrap_or_else(|| PathBuf::from("sweep.csv"));
    let several = cfg.models.len() > 1;
    for &model in &cfg.models {
        let path = output_for(&base, model, several);
        match model {
            ModelSel::Flywheel => flywheel_tur_csv(cfg, &path)?,
            ModelSel::Engine(kind) => {
                let axis = match &cfg.axis {
                    Some(a) => a.clone(),
                    None => {
                        let r = cfg.engine.g / cfg.engine.p;
                        SweepAxis::new("g_over_p", r, r, 1, sweep::Spacing::Linear)?
                    }
                };
                info!("{kind}: {} points -> {}", axis.count, path.display());
                let points = sweep::run_sweep(kind, &cfg.engine, &axis, cfg.window, &cfg.settings, exec)?;
                let mut w = CsvWriter::create(&path, &SWEEP_HEADER)?;
                for (value, point) in axis.values().into_iter().zip(points) {
                    match point {
                        Ok(pt) => {
                            let (s, a) = (&pt.sim, &pt.analytic);
                            w.row(
                                &axis.name,
                                &[
                                    value,
                                    s.w_dot,
                                    s.delta_w_dot,
                                    s.sigma_dot,
                                    s.tur_ratio,
                                    s.eta,
                                    a.w_dot,
                                    a.delta_w_dot,
                                    a.sigma_dot,
                                    a.tur_ratio,
                                    a.eta,
                                    pt.dev_w_dot,
                                    pt.dev_delta_w_dot,
                                    pt.dev_sigma_dot,
                                    pt.dev_tur_ratio,
                                    pt.dev_eta,
                                    s.fit_r2_mean.min(s.fit_r2_var),
                                    pt.wall_seconds,
                                ],
                            )?;
                        }
                        Err(e) => {
                            w.failure(value)?;
                            return Err(anyhow::Error::from(e))
                                .with_context(|| format!("{kind} at {} = {value}", axis.name));
                        }
                    }
                }
                w.finish()?;
            }
        }
    }
    Ok(())
}

fn flywheel_tur_csv(cfg: &RunConfig, path: &Path) -> Result<()> {
    let axis = match &cfg.axis {
        Some(a) => a.clone(),
        None => SweepAxis::new("chi", cfg.flywheel.chi, cfg.flywheel.chi, 1, sweep::Spacing::Linear)?,
    };
    let mut w = CsvWriter::create(path, &FLYWHEEL_TUR_HEADER)?;
    for chi in axis.values() {
        match sweep::flywheel_tur_point(chi, cfg.flywheel.p0) {
            Ok(pt) => w.row("chi", &[chi, pt.p0, pt.coherent, pt.fock, pt.ct])?,
            Err(e) => {
                w.failure(chi)?;
                return Err(anyhow::Error::from(e)).with_context(|| format!("flywheel at chi = {chi}"));
            }
        }
    }
    w.finish()
}

const MC_HEADER: [&str; 19] = [
    "n",
    "trials",
    "mean_alpha",
    "se_mean_alpha",
    "var_alpha",
    "se_var_alpha",
    "mean_n",
    "se_mean_n",
    "mean_n2",
    "se_mean_n2",
    "analytic_mean_alpha",
    "analytic_var_alpha",
    "analytic_mean_n",
    "analytic_mean_n2",
    "z_mean_alpha",
    "z_var_alpha",
    "z_mean_n",
    "z_mean_n2",
    "seed",
];

fn cmd_flywheel_mc(cfg: &RunConfig, exec: Execution) -> Result<()> {
    let f = &cfg.flywheel;
    let params = FlywheelParams::from_chi_p0(f.chi, f.p0, f.d, f.cycles)?;
    let path = cfg.out.clone().unwrap_or_else(|| PathBuf::from("flywheel_mc.csv"));
    let report = flywheel::monte_carlo_walk(&params, f.trials, cfg.seed, &f.checkpoints, exec)?;
    let dist = flywheel::step_distribution(&params);
    let mut w = CsvWriter::create(&path, &MC_HEADER)?;
    for cp in &report.checkpoints {
        let exact = flywheel::moments(&dist, cp.cycles);
        let z = cp.z_scores(&exact);
        w.raw_row(
            &[cp.cycles.to_string(), cp.trials.to_string()],
            &[
                cp.mean_alpha,
                cp.se_mean_alpha,
                cp.var_alpha,
                cp.se_var_alpha,
                cp.mean_n,
                cp.se_mean_n,
                cp.mean_n2,
                cp.se_mean_n2,
                exact.mean_alpha,
                exact.var_alpha,
                exact.mean_n(),
                exact.mean_n2(),
                z[0],
                z[1],
                z[2],
                z[3],
            ],
            &[report.seed.to_string()],
        )?;
    }
    w.finish()?;
    println!("wrote {} checkpoints to {}", report.checkpoints.len(), path.display());
    Ok(())
}

/// Exit code from the error kind: 2 configuration, 1 validation, 3 numerical abort.
fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<ConfigError>().is_some() || err.downcast_ref::<clap::Error>().is_some() {
        return 2;
    }
    if err.downcast_ref::<ValidationFailure>().is_some() {
        return 1;
    }
    match err.downcast_ref::<qheat::Error>() {
        Some(e) if e.is_configuration() => 2,
        Some(e) if e.is_numerical() => 3,
        Some(_) => 1,
        None => 1,
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Sweep(common) => {
            let cfg = load_config(&common)?;
            let exec = execution(cfg.jobs)?;
            cmd_sweep(&cfg, exec)
        }
        Command::Validate { common, level } => {
            let cfg = load_config(&common)?;
            let exec = execution(cfg.jobs)?;
            validate::cmd_validate(&cfg, level, exec)
        }
        Command::FlywheelMc(common) => {
            let cfg = load_config(&common)?;
            let exec = execution(cfg.jobs)?;
            cmd_flywheel_mc(&cfg, exec)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
