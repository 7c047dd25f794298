//! HHT-alpha time stepping with Newton iterations on the stress acceleration.
//!
//! Stress boundary data are imposed exactly: the prescribed value at
//! `t_{n+1}` is converted into the boundary acceleration that the Newmark
//! update maps onto it, and that acceleration is held fixed as a Dirichlet
//! constraint of the Newton system.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use libm::{cos, fabs, sin, sqrt};

use crate::assembly::{AccelerationConstraint, AssembledSystem, SystemAssembler};
use crate::constitutive::MaterialParams;
use crate::error::Error;
use crate::fe_space::{DegreePolicy, FeSpace};
use crate::verification;
use crate::Result;

/// HHT-alpha parameters. `beta` and `gamma` are always derived from `alpha`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HhtParams {
    alpha: f64,
    beta: f64,
    gamma: f64,
    dt: f64,
}

impl HhtParams {
    pub const DEFAULT_ALPHA: f64 = -0.05;

    pub fn new(alpha: f64, dt: f64) -> Result<Self> {
        if !(-1.0 / 3.0..=0.0).contains(&alpha) {
            return Err(Error::invalid(alloc::format!(
                "alpha must lie in [-1/3, 0], got {alpha}"
            )));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::invalid(alloc::format!("time step must be positive, got {dt}")));
        }
        Ok(Self {
            alpha,
            beta: (1.0 - alpha) * (1.0 - alpha) / 4.0,
            gamma: 0.5 - alpha,
            dt,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Newmark `beta = (1 - alpha)^2 / 4`.
    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Newmark `gamma = 1/2 - alpha`.
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Weights `(w_next, w_prev)` of the elastic and load terms at `t_{n+1}`
    /// and `t_n`: `(1 + alpha, -alpha)`.
    ///
    /// Together with `gamma = 1/2 - alpha` this is the second-order HHT
    /// balance, evaluated at `t_{n+1+alpha}`.
    pub fn stiffness_weights(&self) -> (f64, f64) {
        (1.0 + self.alpha, -self.alpha)
    }
}

/// Time and nodal stress, stress rate and stress acceleration.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemState {
    pub t: f64,
    pub sigma: Vec<f64>,
    pub sigma_dot: Vec<f64>,
    pub sigma_ddot: Vec<f64>,
}

impl SystemState {
    pub fn zeros(n: usize) -> Self {
        Self {
            t: 0.0,
            sigma: vec![0.0; n],
            sigma_dot: vec![0.0; n],
            sigma_ddot: vec![0.0; n],
        }
    }

    pub fn n_dofs(&self) -> usize {
        self.sigma.len()
    }

    fn check(&self, n: usize) -> Result<()> {
        for v in [&self.sigma, &self.sigma_dot, &self.sigma_ddot] {
            if v.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    actual: v.len(),
                });
            }
        }
        Ok(())
    }
}

/// Newmark kinematic update from `state` to the next step given the new
/// acceleration.
pub fn newmark_update(state: &SystemState, accel_next: &[f64], hht: &HhtParams) -> (Vec<f64>, Vec<f64>) {
    let n = state.n_dofs();
    let mut sigma = vec![0.0; n];
    let mut rate = vec![0.0; n];
    newmark_update_into(state, accel_next, hht, &mut sigma, &mut rate);
    (sigma, rate)
}

fn newmark_update_into(
    state: &SystemState,
    accel_next: &[f64],
    hht: &HhtParams,
    sigma: &mut [f64],
    rate: &mut [f64],
) {
    let (dt, beta, gamma) = (hht.dt, hht.beta, hht.gamma);
    for i in 0..state.n_dofs() {
        let (s, v, a) = (state.sigma[i], state.sigma_dot[i], state.sigma_ddot[i]);
        sigma[i] = s + dt * v + dt * dt * ((1.0 - 2.0 * beta) / 2.0 * a + beta * accel_next[i]);
        rate[i] = v + dt * ((1.0 - gamma) * a + gamma * accel_next[i]);
    }
}

/// Acceleration at `node` for which the Newmark update reproduces `bc_value_next`.
pub fn boundary_acceleration(bc_value_next: f64, node: usize, state: &SystemState, hht: &HhtParams) -> f64 {
    let (dt, beta) = (hht.dt, hht.beta);
    let predicted = state.sigma[node]
        + dt * state.sigma_dot[node]
        + dt * dt * (1.0 - 2.0 * beta) / 2.0 * state.sigma_ddot[node];
    (bc_value_next - predicted) / (beta * dt * dt)
}

/// Stress data `sigma(0, t) = 0`, `sigma(L, t) = A sin(omega t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryDrive {
    pub amplitude: f64,
    pub omega: f64,
}

impl BoundaryDrive {
    pub const DEFAULT_AMPLITUDE: f64 = 0.02;
    pub const DEFAULT_OMEGA: f64 = 2.0 * PI;

    pub fn new(amplitude: f64, omega: f64) -> Self {
        Self { amplitude, omega }
    }

    /// Homogeneous data on both ends.
    pub fn quiet() -> Self {
        Self::new(0.0, 0.0)
    }

    pub fn right_value(&self, t: f64) -> f64 {
        self.amplitude * sin(self.omega * t)
    }

    pub fn right_rate(&self, t: f64) -> f64 {
        self.amplitude * self.omega * cos(self.omega * t)
    }

    pub fn right_accel(&self, t: f64) -> f64 {
        -self.amplitude * self.omega * self.omega * sin(self.omega * t)
    }
}

impl Default for BoundaryDrive {
    fn default() -> Self {
        Self::new(Self::DEFAULT_AMPLITUDE, Self::DEFAULT_OMEGA)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonSettings {
    /// Residual tolerance relative to the first iterate of the step.
    pub tol: f64,
    /// Absolute floor on the residual tolerance.
    pub atol: f64,
    pub max_iters: usize,
}

impl NewtonSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) || !(self.atol >= 0.0) {
            return Err(Error::invalid("newton tolerances must be positive"));
        }
        if self.max_iters < 1 {
            return Err(Error::invalid("newton needs at least one iteration"));
        }
        Ok(())
    }
}

impl Default for NewtonSettings {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            atol: 1e-12,
            max_iters: 20,
        }
    }
}

/// Iteration history of one step.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct NewtonReport {
    /// Number of linear solves.
    pub iterations: usize,
    /// Residual norm (unconstrained dofs) after the last update.
    pub residual_norm: f64,
    /// Residual norms before each solve and after the last one.
    pub history: Vec<f64>,
}

/// How the initial stress acceleration is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InitialAcceleration {
    /// Solve the semi-discrete equation at `t = 0`.
    #[default]
    Solve,
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InitialCondition {
    /// Zero stress and stress rate in the interior.
    #[default]
    Rest,
    /// Data of the manufactured solution `sin(pi x) sin(t)`.
    Manufactured,
}

/// Body source term of the stress equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Source {
    #[default]
    None,
    /// Source that makes `sin(pi x) sin(t)` an exact solution.
    Manufactured,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub material: MaterialParams,
    pub length: f64,
    pub n_cells: usize,
    pub degree_policy: DegreePolicy,
    pub dt: f64,
    pub t_final: f64,
    pub alpha: f64,
    pub drive: BoundaryDrive,
    pub newton: NewtonSettings,
    pub initial_condition: InitialCondition,
    pub initial_acceleration: InitialAcceleration,
    pub source: Source,
    /// Interval between stored snapshots; `None` keeps only the first and last state.
    pub snapshot_interval: Option<f64>,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            material: MaterialParams {
                rho: 1.0,
                b: 0.0,
                a: 1.5,
                reg_eta: MaterialParams::DEFAULT_REG_ETA,
            },
            length: 1.0,
            n_cells: 200,
            degree_policy: DegreePolicy::Uniform(1),
            dt: 1e-3,
            t_final: 1.0,
            alpha: HhtParams::DEFAULT_ALPHA,
            drive: BoundaryDrive::default(),
            newton: NewtonSettings::default(),
            initial_condition: InitialCondition::Rest,
            initial_acceleration: InitialAcceleration::Solve,
            source: Source::None,
            snapshot_interval: None,
        }
    }
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        self.material.validate()?;
        HhtParams::new(self.alpha, self.dt)?;
        self.newton.validate()?;
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return Err(Error::invalid("t_final must be positive"));
        }
        if !(self.drive.amplitude.is_finite() && self.drive.omega.is_finite()) {
            return Err(Error::invalid("drive amplitude and frequency must be finite"));
        }
        if let Some(dt) = self.snapshot_interval {
            if !(dt > 0.0) {
                return Err(Error::invalid("snapshot interval must be positive"));
            }
        }
        Ok(())
    }

    /// Number of steps: the smallest `n` with `n dt >= t_final` (up to round-off).
    pub fn n_steps(&self) -> usize {
        let ratio = self.t_final / self.dt;
        let rounded = libm::round(ratio);
        if fabs(ratio - rounded) <= 1e-9 * ratio.max(1.0) {
            rounded as usize
        } else {
            libm::ceil(ratio) as usize
        }
    }

    /// Steps between stored snapshots.
    pub fn snapshot_stride(&self) -> Option<usize> {
        self.snapshot_interval
            .map(|every| (libm::round(every / self.dt) as usize).max(1))
    }
}

/// Statistics gathered over a run.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunReport {
    pub steps: usize,
    pub final_time: f64,
    pub total_newton_iterations: usize,
    pub max_newton_iterations: usize,
    /// Largest nodal `|c - 1/sqrt(rho)|` over all accepted states.
    pub max_wave_speed_deviation: f64,
    /// Largest `|sigma - prescribed|` at the boundary nodes over all steps.
    pub max_boundary_error: f64,
    /// Largest final-iterate residual norm over all steps.
    pub max_final_residual: f64,
}

/// A single time-stepping run.
pub struct Simulation {
    config: SimulationConfig,
    space: FeSpace,
    hht: HhtParams,
    state: SystemState,
    step_index: usize,
    source: Option<Box<dyn Fn(f64, f64) -> f64 + Send + Sync>>,
    report: RunReport,
}

impl core::fmt::Debug for Simulation {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("Simulation")
            .field("config", &self.config)
            .field("t", &self.state.t)
            .field("step_index", &self.step_index)
            .finish()
    }
}

impl Simulation {
    /// Build the space, set the initial data and compute the initial acceleration.
    pub fn new(config: SimulationConfig) -> Result<Self> {
        config.validate()?;
        let space = FeSpace::build(config.length, config.n_cells, config.degree_policy)?;
        let hht = HhtParams::new(config.alpha, config.dt)?;
        let source: Option<Box<dyn Fn(f64, f64) -> f64 + Send + Sync>> = match config.source {
            Source::None => None,
            Source::Manufactured => {
                let p = config.material;
                Some(Box::new(move |x, t| verification::mms_forcing(x, t, &p)))
            }
        };
        let n = space.n_dofs();
        let mut state = SystemState::zeros(n);
        if config.initial_condition == InitialCondition::Manufactured {
            state.sigma = space.interpolate(|x| verification::mms_fields(x, 0.0).sigma);
            state.sigma_dot = space.interpolate(|x| verification::mms_fields(x, 0.0).sigma_t);
        }
        let last = n - 1;
        state.sigma[0] = 0.0;
        state.sigma_dot[0] = 0.0;
        state.sigma[last] = config.drive.right_value(0.0);
        state.sigma_dot[last] = config.drive.right_rate(0.0);

        let mut sim = Self {
            config,
            space,
            hht,
            state,
            step_index: 0,
            source,
            report: RunReport::default(),
        };
        if sim.config.initial_acceleration == InitialAcceleration::Solve {
            sim.solve_initial_acceleration()?;
        }
        sim.record_state_stats()?;
        Ok(sim)
    }

    /// Replace the body source by an arbitrary `g(x, t)`.
    pub fn set_source<F>(&mut self, source: F) -> Result<()>
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        self.source = Some(Box::new(source));
        if self.step_index == 0 && self.config.initial_acceleration == InitialAcceleration::Solve {
            self.solve_initial_acceleration()?;
        }
        Ok(())
    }

    pub fn config(&self) -> &SimulationConfig {
        &self.config
    }

    pub fn space(&self) -> &FeSpace {
        &self.space
    }

    pub fn hht(&self) -> &HhtParams {
        &self.hht
    }

    pub fn state(&self) -> &SystemState {
        &self.state
    }

    pub fn report(&self) -> &RunReport {
        &self.report
    }

    pub fn step_index(&self) -> usize {
        self.step_index
    }

    pub fn is_finished(&self) -> bool {
        self.step_index >= self.config.n_steps()
    }

    /// `M(S0) S0'' = L(0) - K S0 - F_vel(S0, S0')`, with the boundary
    /// accelerations taken from the drive. The system is linear in the
    /// acceleration, so one Newton correction solves it.
    fn solve_initial_acceleration(&mut self) -> Result<()> {
        let asm = SystemAssembler::new(&self.space, self.config.material)?;
        let n = self.space.n_dofs();
        let mut state = self.state.clone();
        state.sigma_ddot = vec![0.0; n];
        let load = self.source.as_ref().map(|g| asm.load(g, 0.0));
        let residual = asm.instantaneous_residual(&state, load.as_deref())?;
        let mass = asm.mass(&state.sigma)?;
        let mut system = AssembledSystem::new(mass, &residual);
        system.apply_dirichlet(&[
            AccelerationConstraint {
                dof: 0,
                prescribed: 0.0,
                current: 0.0,
            },
            AccelerationConstraint {
                dof: n - 1,
                prescribed: self.config.drive.right_accel(0.0),
                current: 0.0,
            },
        ])?;
        self.state.sigma_ddot = system.solve()?;
        Ok(())
    }

    fn time_at(&self, step: usize) -> f64 {
        step as f64 * self.config.dt
    }

    /// Advance one step; on failure the state is left unchanged.
    pub fn step(&mut self) -> Result<NewtonReport> {
        let t_next = self.time_at(self.step_index + 1);
        let asm = SystemAssembler::new(&self.space, self.config.material)?;
        let (next, report) = advance_step(
            &asm,
            &self.state,
            t_next,
            &self.hht,
            &self.config.newton,
            &self.config.drive,
            self.source.as_deref(),
        )
        .map_err(|e| Error::StepFailed {
            time: t_next,
            source: Box::new(e),
        })?;
        self.state = next;
        self.step_index += 1;
        self.report.steps = self.step_index;
        self.report.total_newton_iterations += report.iterations;
        self.report.max_newton_iterations = self.report.max_newton_iterations.max(report.iterations);
        self.report.max_final_residual = self.report.max_final_residual.max(report.residual_norm);
        self.record_state_stats()?;
        Ok(report)
    }

    fn record_state_stats(&mut self) -> Result<()> {
        let p = &self.config.material;
        let mut dev = self.report.max_wave_speed_deviation;
        for &s in &self.state.sigma {
            dev = dev.max(fabs(p.wave_speed_deviation(s)?));
        }
        self.report.max_wave_speed_deviation = dev;
        let last = self.state.n_dofs() - 1;
        let t = self.state.t;
        let err_left = fabs(self.state.sigma[0]);
        let err_right = fabs(self.state.sigma[last] - self.config.drive.right_value(t));
        self.report.max_boundary_error = self.report.max_boundary_error.max(err_left).max(err_right);
        self.report.final_time = t;
        Ok(())
    }

    /// Run to `t_final`, calling `observe` after every accepted state
    /// (including the initial one).
    pub fn run_with<F>(&mut self, mut observe: F) -> Result<RunReport>
    where
        F: FnMut(&Simulation) -> Result<()>,
    {
        if self.step_index == 0 {
            observe(self)?;
        }
        while !self.is_finished() {
            self.step()?;
            observe(self)?;
        }
        Ok(self.report.clone())
    }
}

/// One HHT-alpha step from `state` to `t_next`.
///
/// The predictor keeps the previous acceleration in the interior and uses
/// the exact boundary accelerations; Newton then solves
/// `tangent * delta = -R` until the residual on the unconstrained dofs drops
/// below `max(tol * |R_0|, atol)`. At least one correction is always made.
pub fn advance_step(
    asm: &SystemAssembler<'_>,
    state: &SystemState,
    t_next: f64,
    hht: &HhtParams,
    newton: &NewtonSettings,
    drive: &BoundaryDrive,
    source: Option<&(dyn Fn(f64, f64) -> f64 + Send + Sync)>,
) -> Result<(SystemState, NewtonReport)> {
    let n = asm.space().n_dofs();
    state.check(n)?;
    let last = n - 1;
    let bc_left = boundary_acceleration(0.0, 0, state, hht);
    let bc_right = boundary_acceleration(drive.right_value(t_next), last, state, hht);

    let loads = source.map(|g| asm.load_pair(g, t_next, state.t));
    let loads_ref = loads.as_ref().map(|(a, b)| (a.as_slice(), b.as_slice()));

    let mut next = SystemState {
        t: t_next,
        sigma: vec![0.0; n],
        sigma_dot: vec![0.0; n],
        sigma_ddot: state.sigma_ddot.clone(),
    };
    next.sigma_ddot[0] = bc_left;
    next.sigma_ddot[last] = bc_right;

    let mut report = NewtonReport::default();
    let mut reference = 0.0;
    loop {
        newmark_update_into(state, &next.sigma_ddot, hht, &mut next.sigma, &mut next.sigma_dot);
        let residual = asm.residual(&next, state, hht, loads_ref)?;
        let norm = interior_norm(&residual);
        report.history.push(norm);
        if report.iterations == 0 {
            reference = norm;
        } else if norm <= (newton.tol * reference).max(newton.atol) {
            report.residual_norm = norm;
            break;
        }
        if report.iterations >= newton.max_iters {
            return Err(Error::NewtonDiverged {
                time: t_next,
                iterations: report.iterations,
                residual: norm,
                reference,
            });
        }
        let tangent = asm.tangent(&next, state, hht)?;
        let mut system = AssembledSystem::new(tangent, &residual);
        system.apply_dirichlet(&[
            AccelerationConstraint {
                dof: 0,
                prescribed: bc_left,
                current: next.sigma_ddot[0],
            },
            AccelerationConstraint {
                dof: last,
                prescribed: bc_right,
                current: next.sigma_ddot[last],
            },
        ])?;
        let delta = system.solve()?;
        for (a, d) in next.sigma_ddot.iter_mut().zip(&delta) {
            *a += d;
        }
        report.iterations += 1;
    }
    Ok((next, report))
}

/// Euclidean norm over the dofs not fixed by boundary data.
fn interior_norm(residual: &[f64]) -> f64 {
    let n = residual.len();
    sqrt(residual[1..n - 1].iter().map(|r| r * r).sum())
}

/// Result of [`run_simulation`].
#[derive(Debug, Clone)]
pub struct SimulationOutput {
    pub space: FeSpace,
    pub snapshots: Vec<SystemState>,
    pub report: RunReport,
}

/// Run a scenario to `t_final`, keeping states at the configured snapshot
/// interval plus the initial and final state.
pub fn run_simulation(config: &SimulationConfig) -> Result<SimulationOutput> {
    let mut sim = Simulation::new(config.clone())?;
    let stride = config.snapshot_stride();
    let n_steps = config.n_steps();
    let mut snapshots = Vec::new();
    let report = sim.run_with(|s| {
        let k = s.step_index();
        let keep = k == 0 || k == n_steps || stride.is_some_and(|m| k % m == 0);
        if keep {
            snapshots.push(s.state().clone());
        }
        Ok(())
    })?;
    Ok(SimulationOutput {
        space: sim.space,
        snapshots,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_newmark_coefficients() {
        let h = HhtParams::new(-0.05, 0.1).unwrap();
        assert!((h.beta() - 0.275625).abs() < 1e-16);
        assert!((h.gamma() - 0.55).abs() < 1e-16);
        assert!(HhtParams::new(0.1, 0.1).is_err());
        assert!(HhtParams::new(-0.4, 0.1).is_err());
        assert!(HhtParams::new(-0.1, 0.0).is_err());
        assert!(HhtParams::new(-1.0 / 3.0, 1.0).is_ok());
    }

    #[test]
    fn newmark_zero_state() {
        let h = HhtParams::new(-0.05, 0.1).unwrap();
        let (s, v) = newmark_update(&SystemState::zeros(3), &[0.0; 3], &h);
        assert_eq!(s, vec![0.0; 3]);
        assert_eq!(v, vec![0.0; 3]);
    }

    #[test]
    fn newmark_uniform_acceleration() {
        for alpha in [0.0, -0.05, -0.2, -1.0 / 3.0] {
            let h = HhtParams::new(alpha, 0.01).unwrap();
            let a0 = 3.7;
            let st = SystemState {
                sigma_ddot: vec![a0],
                ..SystemState::zeros(1)
            };
            let (s, v) = newmark_update(&st, &[a0], &h);
            assert!((s[0] - a0 * 0.01 * 0.01 / 2.0).abs() < 1e-16);
            assert!((v[0] - a0 * 0.01).abs() < 1e-16);
        }
    }

    #[test]
    fn newmark_spot_value() {
        // independently evaluated: 1.21775625 and 2.355
        let h = HhtParams::new(-0.05, 0.1).unwrap();
        let st = SystemState {
            t: 0.0,
            sigma: vec![1.0],
            sigma_dot: vec![2.0],
            sigma_ddot: vec![3.0],
        };
        let (s, v) = newmark_update(&st, &[4.0], &h);
        assert!((s[0] - 1.21775625).abs() < 1e-14);
        assert!((v[0] - 2.355).abs() < 1e-14);
    }

    #[test]
    fn boundary_acceleration_cases() {
        let h = HhtParams::new(-0.05, 0.01).unwrap();
        assert_eq!(boundary_acceleration(0.0, 0, &SystemState::zeros(2), &h), 0.0);

        let st = SystemState {
            t: 0.0,
            sigma: vec![0.3, 0.0],
            sigma_dot: vec![-1.0, 0.0],
            sigma_ddot: vec![2.0, 0.0],
        };
        let (free, _) = newmark_update(&st, &[0.0, 0.0], &h);
        assert!(boundary_acceleration(free[0], 0, &st, &h).abs() < 1e-9);

        let drive = BoundaryDrive::new(0.02, 2.0 * PI);
        let mut tracked = SystemState::zeros(1);
        tracked.sigma_dot[0] = drive.right_rate(0.0);
        for k in 1..=200 {
            let t = k as f64 * h.dt();
            let a = boundary_acceleration(drive.right_value(t), 0, &tracked, &h);
            let (s, v) = newmark_update(&tracked, &[a], &h);
            assert!((s[0] - drive.right_value(t)).abs() < 1e-15);
            tracked = SystemState {
                t,
                sigma: s,
                sigma_dot: v,
                sigma_ddot: vec![a],
            };
        }
    }

    #[test]
    fn zero_data_stays_zero() {
        for (b, a) in [(0.0, 1.5), (1.0, 2.0), (10.0, 1.5)] {
            let config = SimulationConfig {
                material: MaterialParams::new(1.0, b, a).unwrap(),
                n_cells: 8,
                degree_policy: DegreePolicy::CenterGraded,
                dt: 0.01,
                t_final: 0.1,
                drive: BoundaryDrive::quiet(),
                ..SimulationConfig::default()
            };
            let mut sim = Simulation::new(config).unwrap();
            while !sim.is_finished() {
                let r = sim.step().unwrap();
                assert_eq!(r.iterations, 1);
            }
            let st = sim.state();
            assert!(st.sigma.iter().chain(&st.sigma_dot).chain(&st.sigma_ddot).all(|&v| v == 0.0));
        }
    }

    #[test]
    fn linear_law_converges_in_one_iteration() {
        for dt in [1e-4, 1e-3, 1e-2, 5e-2] {
            let config = SimulationConfig {
                n_cells: 20,
                dt,
                t_final: 20.0 * dt,
                ..SimulationConfig::default()
            };
            let mut sim = Simulation::new(config).unwrap();
            while !sim.is_finished() {
                assert_eq!(sim.step().unwrap().iterations, 1, "dt = {dt}");
            }
        }
    }

    #[test]
    fn step_count_and_stride() {
        let c = SimulationConfig {
            dt: 1e-3,
            t_final: 1.0,
            snapshot_interval: Some(0.1),
            ..SimulationConfig::default()
        };
        assert_eq!(c.n_steps(), 1000);
        assert_eq!(c.snapshot_stride(), Some(100));
        let c = SimulationConfig {
            dt: 0.3,
            t_final: 1.0,
            ..SimulationConfig::default()
        };
        assert_eq!(c.n_steps(), 4);
    }

    #[test]
    fn boundary_data_is_exact_along_a_run() {
        let config = SimulationConfig {
            material: MaterialParams::new(1.0, 5.0, 1.5).unwrap(),
            n_cells: 40,
            dt: 2e-3,
            t_final: 0.4,
            ..SimulationConfig::default()
        };
        let out = run_simulation(&config).unwrap();
        assert!(out.report.max_boundary_error <= 1e-12, "{}", out.report.max_boundary_error);
        assert_eq!(out.snapshots.len(), 2);
        assert!((out.report.final_time - 0.4).abs() < 1e-12);
    }

    #[test]
    fn newton_failure_is_reported() {
        let config = SimulationConfig {
            material: MaterialParams::new(1.0, 10.0, 1.5).unwrap(),
            n_cells: 10,
            dt: 0.01,
            t_final: 0.05,
            drive: BoundaryDrive::new(0.5, 2.0 * PI),
            newton: NewtonSettings {
                tol: 1e-14,
                atol: 0.0,
                max_iters: 1,
            },
            ..SimulationConfig::default()
        };
        let mut sim = Simulation::new(config).unwrap();
        let before = sim.state().clone();
        let err = sim.step().unwrap_err();
        assert!(matches!(err.root(), Error::NewtonDiverged { iterations: 1, .. }), "{err}");
        assert_eq!(sim.state(), &before);
    }
}
