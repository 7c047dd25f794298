//! Argument parsing and dispatch.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use strainwave_core::{FitSettings, StudyKind};

use crate::commands::{self, GenData, Progress, SweepPreset};
use crate::config::ScenarioConfig;
use crate::error::{CliError, Result};
use crate::io;

#[derive(Debug, Parser)]
#[command(name = "strainwave", version, about = "Stress waves in strain-limiting elastic bars")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Scenario file (TOML).
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory; overrides `output.directory`.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Upper bound on concurrently running simulations.
    #[arg(long, global = true, value_name = "N")]
    pub jobs: Option<usize>,
    /// Time between snapshots; overrides `output.snapshot_interval`.
    #[arg(long, global = true, value_name = "T")]
    pub snapshot_every: Option<f64>,
    /// Suppress progress output.
    #[arg(long, global = true)]
    pub quiet: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Spatial convergence study with the manufactured solution.
    MmsSpatial,
    /// Temporal convergence study with the manufactured solution.
    MmsTemporal,
    /// Single boundary-driven run with snapshots and a manifest.
    Simulate(SimulateArgs),
    /// Parametric study over b and/or a.
    Sweep(SweepArgs),
    /// Fit (b, a) to stress-strain data.
    Fit(FitArgs),
    /// Write a synthetic stress-strain dataset.
    GenData(GenDataArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Strain-limiting magnitude; overrides `material.b`.
    #[arg(long)]
    pub b: Option<f64>,
    /// Strain-limiting exponent; overrides `material.a`.
    #[arg(long)]
    pub a: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, value_enum, default_value_t = SweepPreset::All)]
    pub preset: SweepPreset,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Two-column (stress, strain) files.
    #[arg(required = true)]
    pub datasets: Vec<PathBuf>,
    #[arg(long, default_value_t = 1.0)]
    pub init_b: f64,
    #[arg(long, default_value_t = 1.0)]
    pub init_a: f64,
    #[arg(long, default_value_t = FitSettings::default().max_iters)]
    pub max_iters: usize,
}

#[derive(Debug, Args)]
pub struct GenDataArgs {
    /// Destination file.
    pub output: PathBuf,
    #[arg(long)]
    pub b: f64,
    #[arg(long)]
    pub a: f64,
    #[arg(long, default_value_t = 50)]
    pub points: usize,
    #[arg(long, default_value_t = 5.0)]
    pub sigma_max: f64,
    /// Noise standard deviation relative to the largest strain.
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

fn load_config(global: &GlobalArgs) -> Result<Option<ScenarioConfig>> {
    let Some(path) = &global.config else {
        return Ok(None);
    };
    let mut c = ScenarioConfig::load(path)?;
    apply_overrides(&mut c, global)?;
    Ok(Some(c))
}

fn apply_overrides(c: &mut ScenarioConfig, global: &GlobalArgs) -> Result<()> {
    if let Some(dir) = &global.out {
        c.output.directory = dir.clone();
    }
    if let Some(t) = global.snapshot_every {
        c.output.snapshot_interval = Some(t);
    }
    c.validate()
}

fn output_dir(global: &GlobalArgs, config: Option<&ScenarioConfig>) -> PathBuf {
    global
        .out
        .clone()
        .or_else(|| config.map(|c| c.output.directory.clone()))
        .unwrap_or_else(|| PathBuf::from("output"))
}

fn label_of(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "data".into())
}

pub fn execute(cli: &Cli) -> Result<()> {
    let global = &cli.global;
    let progress = Progress { quiet: global.quiet };
    match &cli.command {
        Command::MmsSpatial | Command::MmsTemporal => {
            let kind = if matches!(cli.command, Command::MmsSpatial) {
                StudyKind::Spatial
            } else {
                StudyKind::Temporal
            };
            let config = load_config(global)?;
            let settings = commands::mms_settings(config.as_ref());
            let out = output_dir(global, config.as_ref());
            let table = commands::with_jobs(global.jobs, || commands::run_mms(kind, &settings, &out, progress))??;
            if !global.quiet {
                println!("resolution,dofs,l2_error,rate");
                for r in &table.rows {
                    let rate = r.rate.map(|v| format!("{v:.3}")).unwrap_or_else(|| "-".into());
                    println!("{},{},{:.4e},{rate}", r.resolution, r.dofs, r.l2_error);
                }
            }
        }
        Command::Simulate(args) => {
            let mut config = match load_config(global)? {
                Some(c) => c,
                None => {
                    let b = args
                        .b
                        .ok_or_else(|| CliError::Config("material.b is required (use --config or --b)".into()))?;
                    let mut c = ScenarioConfig::with_b(b);
                    apply_overrides(&mut c, global)?;
                    c
                }
            };
            if let Some(b) = args.b {
                config.material.b = b;
            }
            if let Some(a) = args.a {
                config.material.a = a;
            }
            config.validate()?;
            let dir = config.output.directory.clone();
            let summary = commands::run_scenario(&config, &dir, progress)?;
            if !global.quiet {
                println!(
                    "wrote {} snapshots to {} (max |c - c0| = {:.6e}, max newton iterations = {})",
                    summary.snapshot_files.len(),
                    dir.display(),
                    summary.report.max_wave_speed_deviation,
                    summary.report.max_newton_iterations
                );
            }
        }
        Command::Sweep(args) => {
            let base = match load_config(global)? {
                Some(c) => c,
                None => {
                    let mut c = ScenarioConfig::with_b(0.0);
                    apply_overrides(&mut c, global)?;
                    c
                }
            };
            let out = output_dir(global, Some(&base));
            let rows = commands::with_jobs(global.jobs, || commands::run_sweep(&base, args.preset, &out, progress))??;
            if !global.quiet {
                println!("grid,b,a,max_c_deviation,max_newton_iterations,final_max_stress_gradient");
                for r in &rows {
                    println!(
                        "{},{},{},{:.6e},{},{:.6e}",
                        r.grid, r.b, r.a, r.max_c_deviation, r.max_newton_iterations, r.final_max_stress_gradient
                    );
                }
            }
        }
        Command::Fit(args) => {
            let out = output_dir(global, None);
            let data = args
                .datasets
                .iter()
                .map(|p| io::read_dataset(p, &label_of(p)))
                .collect::<Result<Vec<_>>>()?;
            let settings = FitSettings {
                max_iters: args.max_iters,
                ..FitSettings::default()
            };
            let rows = commands::with_jobs(global.jobs, || commands::run_fit(&data, (args.init_b, args.init_a), settings, &out))??;
            if !global.quiet {
                println!("label,b,a,sse,r2,converged");
                for (label, f) in &rows {
                    println!("{label},{:.6e},{:.6e},{:.6e},{:.6},{}", f.b, f.a, f.sse, f.r2, f.converged);
                }
            }
        }
        Command::GenData(args) => {
            let g = GenData {
                b: args.b,
                a: args.a,
                points: args.points,
                sigma_max: args.sigma_max,
                noise: args.noise,
                seed: args.seed,
            };
            let data = commands::generate_dataset(&g, &label_of(&args.output))?;
            if let Some(parent) = args.output.parent().filter(|p| !p.as_os_str().is_empty()) {
                io::ensure_dir(parent)?;
            }
            io::write_dataset(&data, &args.output)?;
            progress.note(format!("wrote {} points to {}", data.len(), args.output.display()));
        }
    }
    Ok(())
}
