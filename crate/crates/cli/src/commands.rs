//! Subcommand implementations, independent of argument parsing.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::Serialize;
use strainwave_core::verification::{study_cases, MmsOutcome};
use strainwave_core::{
    fit_material, reconstruct, sample_solution, synthetic_dataset, ConvergenceTable, FitResult, FitSettings,
    MmsSettings, RunReport, Simulation, SnapshotRecord, StressStrainDataset, StudyKind,
};

use crate::config::ScenarioConfig;
use crate::error::{CliError, Result};
use crate::io;

/// Emits progress lines on stderr unless silenced.
#[derive(Debug, Clone, Copy, Default)]
pub struct Progress {
    pub quiet: bool,
}

impl Progress {
    pub fn note(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            eprintln!("{}", msg.as_ref());
        }
    }
}

/// Run `f` on a pool with at most `jobs` threads (all cores when `None`).
pub fn with_jobs<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = jobs {
        if n == 0 {
            return Err(CliError::Config("--jobs must be at least 1".into()));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::Config(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(f))
}

/// MMS settings with the material, HHT parameter, end time and Newton
/// settings taken from a scenario file when one is given.
pub fn mms_settings(config: Option<&ScenarioConfig>) -> MmsSettings {
    let mut s = MmsSettings::default();
    if let Some(c) = config {
        s.material = c.material();
        s.alpha = c.time.alpha;
        s.t_final = c.time.t_final;
        s.newton = c.newton();
    }
    s
}

/// Run a convergence study with its rows in parallel and write
/// `mms_spatial.csv` or `mms_temporal.csv` into `out`.
pub fn run_mms(kind: StudyKind, settings: &MmsSettings, out: &Path, progress: Progress) -> Result<ConvergenceTable> {
    io::ensure_dir(out)?;
    let cases = study_cases(kind, settings);
    let outcomes: Vec<MmsOutcome> = cases
        .par_iter()
        .map(|case| {
            let start = Instant::now();
            let o = case.run()?;
            progress.note(format!(
                "  cells={:<4} degree={} dt={:.1e}  L2={:.4e}  ({:.1} s)",
                case.n_cells,
                case.degree,
                case.dt,
                o.l2_error,
                start.elapsed().as_secs_f64()
            ));
            Ok(o)
        })
        .collect::<Result<_>>()?;
    let table = ConvergenceTable::from_outcomes(kind, &outcomes);
    let name = match kind {
        StudyKind::Spatial => "mms_spatial.csv",
        StudyKind::Temporal => "mms_temporal.csv",
    };
    io::write_convergence_table(&table, &out.join(name))?;
    Ok(table)
}

/// What a finished `simulate` run produced.
#[derive(Debug, Clone)]
pub struct SimulationSummary {
    pub report: RunReport,
    pub snapshot_files: Vec<PathBuf>,
    /// Reconstructed fields at the final time.
    pub final_record: SnapshotRecord,
    pub wall_time_s: f64,
}

#[derive(Debug, Serialize)]
struct RunSection {
    version: &'static str,
    wall_time_s: f64,
    beta_nm: f64,
    gamma_nm: f64,
    steps: usize,
    final_time: f64,
    snapshots: usize,
    total_newton_iterations: usize,
    max_newton_iterations: usize,
    max_final_residual: f64,
    max_wave_speed_deviation: f64,
    max_boundary_error: f64,
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    #[serde(flatten)]
    config: &'a ScenarioConfig,
    run: RunSection,
}

pub const MANIFEST_FILE: &str = "manifest.toml";

/// Boundary-driven run from rest. Writes every snapshot, the space-time
/// aggregate and a manifest into `dir`.
pub fn run_scenario(config: &ScenarioConfig, dir: &Path, progress: Progress) -> Result<SimulationSummary> {
    config.validate()?;
    io::ensure_dir(dir)?;
    let start = Instant::now();
    let sim_config = config.simulation();
    let n_steps = sim_config.n_steps();
    let stride = sim_config.snapshot_stride();
    let params = sim_config.material;
    let samples = config.output.samples;
    let mut sim = Simulation::new(sim_config)?;
    let mut spacetime = io::SpacetimeWriter::create(dir)?;
    let mut files = Vec::new();
    let mut last_record = None;
    let mut io_error = None;
    let report = sim.run_with(|s| {
        let k = s.step_index();
        if !(k == 0 || k == n_steps || stride.is_some_and(|m| k % m == 0)) {
            return Ok(());
        }
        let st = s.state();
        let record = reconstruct(&sample_solution(s.space(), &st.sigma, &st.sigma_dot, samples)?, &params)?;
        let written = io::write_snapshot(&record, st.t, dir).and_then(|p| {
            spacetime.append(st.t, &record)?;
            Ok(p)
        });
        match written {
            Ok(p) => files.push(p),
            // the observer can only return solver errors, so keep the
            // first i/o failure and stop on it after the loop
            Err(e) => {
                if io_error.is_none() {
                    io_error = Some(e);
                }
            }
        }
        if k == n_steps {
            last_record = Some(record);
        }
        Ok(())
    });
    if let Some(e) = io_error {
        return Err(e);
    }
    let report = report?;
    spacetime.finish()?;
    let wall_time_s = start.elapsed().as_secs_f64();
    let hht = sim.hht();
    let manifest = Manifest {
        config,
        run: RunSection {
            version: env!("CARGO_PKG_VERSION"),
            wall_time_s,
            beta_nm: hht.beta(),
            gamma_nm: hht.gamma(),
            steps: report.steps,
            final_time: report.final_time,
            snapshots: files.len(),
            total_newton_iterations: report.total_newton_iterations,
            max_newton_iterations: report.max_newton_iterations,
            max_final_residual: report.max_final_residual,
            max_wave_speed_deviation: report.max_wave_speed_deviation,
            max_boundary_error: report.max_boundary_error,
        },
    };
    let text = toml::to_string(&manifest).map_err(|e| CliError::Config(e.to_string()))?;
    let path = dir.join(MANIFEST_FILE);
    std::fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
    progress.note(format!(
        "  b={} a={}: {} steps, max |c - c0| = {:.3e}, max newton iterations {} ({:.1} s)",
        config.material.b, config.material.a, report.steps, report.max_wave_speed_deviation, report.max_newton_iterations, wall_time_s
    ));
    Ok(SimulationSummary {
        report,
        snapshot_files: files,
        final_record: last_record.expect("final state is always observed"),
        wall_time_s,
    })
}

/// Named parameter grids of the parametric study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum SweepPreset {
    /// b in {0, 1, 5, 10} with a = 1.5.
    B,
    /// a in {1.5, 3, 5, 10} with b = 1.
    A,
    /// Both grids.
    All,
}

impl SweepPreset {
    /// `(grid name, b, a)` of every member run.
    pub fn members(self) -> Vec<(&'static str, f64, f64)> {
        let b_grid = [0.0, 1.0, 5.0, 10.0].map(|b| ("b", b, 1.5));
        let a_grid = [1.5, 3.0, 5.0, 10.0].map(|a| ("a", 1.0, a));
        match self {
            SweepPreset::B => b_grid.to_vec(),
            SweepPreset::A => a_grid.to_vec(),
            SweepPreset::All => b_grid.into_iter().chain(a_grid).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub grid: &'static str,
    pub b: f64,
    pub a: f64,
    pub max_c_deviation: f64,
    pub max_newton_iterations: usize,
    pub final_max_stress_gradient: f64,
    pub directory: PathBuf,
}

pub const SWEEP_SUMMARY_FILE: &str = "sweep_summary.csv";

/// Run every member of `preset` on top of `base`, each in its own
/// subdirectory of `out`, and write a summary table.
pub fn run_sweep(base: &ScenarioConfig, preset: SweepPreset, out: &Path, progress: Progress) -> Result<Vec<SweepRow>> {
    io::ensure_dir(out)?;
    let rows = preset
        .members()
        .into_par_iter()
        .map(|(grid, b, a)| {
            let mut config = base.clone();
            config.material.b = b;
            config.material.a = a;
            let dir = out.join(format!("{grid}_grid")).join(format!("b{b}_a{a}"));
            config.output.directory = dir.clone();
            let summary = run_scenario(&config, &dir, progress)?;
            Ok(SweepRow {
                grid,
                b,
                a,
                max_c_deviation: summary.report.max_wave_speed_deviation,
                max_newton_iterations: summary.report.max_newton_iterations,
                final_max_stress_gradient: summary.final_record.max_stress_gradient(),
                directory: dir,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    write_sweep_summary(&rows, &out.join(SWEEP_SUMMARY_FILE))?;
    Ok(rows)
}

fn write_sweep_summary(rows: &[SweepRow], path: &Path) -> Result<()> {
    let mut text = String::from("grid,b,a,max_c_deviation,max_newton_iterations,final_max_stress_gradient\n");
    for r in rows {
        text.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.grid,
            io::fmt_f64(r.b),
            io::fmt_f64(r.a),
            io::fmt_f64(r.max_c_deviation),
            r.max_newton_iterations,
            io::fmt_f64(r.final_max_stress_gradient)
        ));
    }
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub const FIT_FILE: &str = "fit.csv";

/// Fit every dataset and write one result row per dataset.
pub fn run_fit(datasets: &[StressStrainDataset], init: (f64, f64), settings: FitSettings, out: &Path) -> Result<Vec<(String, FitResult)>> {
    io::ensure_dir(out)?;
    let rows = datasets
        .par_iter()
        .map(|d| Ok((d.label().to_string(), fit_material(d, init, settings)?)))
        .collect::<Result<Vec<_>>>()?;
    io::write_fit_results(&rows, &out.join(FIT_FILE))?;
    Ok(rows)
}

/// Settings of the synthetic data generator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenData {
    pub b: f64,
    pub a: f64,
    pub points: usize,
    pub sigma_max: f64,
    /// Standard deviation of the additive strain noise as a fraction of the
    /// largest noiseless strain.
    pub noise: f64,
    pub seed: u64,
}

/// Equispaced samples of the model, optionally perturbed by Gaussian noise
/// from a seeded generator.
pub fn generate_dataset(g: &GenData, label: &str) -> Result<StressStrainDataset> {
    if !(g.noise >= 0.0) || !g.noise.is_finite() {
        return Err(CliError::Config("noise level must be non-negative".into()));
    }
    let clean = synthetic_dataset(g.b, g.a, g.points, g.sigma_max, label).map_err(|e| CliError::Config(e.to_string()))?;
    if g.noise == 0.0 {
        return Ok(clean);
    }
    let scale = clean.points().iter().map(|p| p.1.abs()).fold(0.0, f64::max);
    let normal = Normal::new(0.0, g.noise * scale).map_err(|e| CliError::Config(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(g.seed);
    let pts = clean.points().iter().map(|&(s, e)| (s, e + normal.sample(&mut rng))).collect();
    Ok(StressStrainDataset::new(pts, label)?)
}
