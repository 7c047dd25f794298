//! Manufactured-solution verification.
//!
//! The exact stress `sigma = sin(pi x) sin(t)` on `[0, 1]` vanishes at both
//! ends, and the matching source term is
//! `g = rho (f'(sigma) sigma_tt + f''(sigma) sigma_t^2) - sigma_xx`.

use alloc::vec::Vec;
use core::f64::consts::PI;

use libm::{cos, log, sin, sqrt};

use crate::constitutive::MaterialParams;
use crate::fe_space::{DegreePolicy, FeSpace};
use crate::integrator::{
    run_simulation, BoundaryDrive, InitialAcceleration, InitialCondition, NewtonSettings,
    SimulationConfig, Source,
};
use crate::quadrature::gauss_rule;
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MmsFields {
    pub sigma: f64,
    pub sigma_t: f64,
    pub sigma_tt: f64,
    pub sigma_xx: f64,
}

pub fn mms_fields(x: f64, t: f64) -> MmsFields {
    let sx = sin(PI * x);
    let st = sin(t);
    MmsFields {
        sigma: sx * st,
        sigma_t: sx * cos(t),
        sigma_tt: -sx * st,
        sigma_xx: -PI * PI * sx * st,
    }
}

pub fn mms_forcing(x: f64, t: f64, params: &MaterialParams) -> f64 {
    let m = mms_fields(x, t);
    params.rho * (params.compliance(m.sigma) * m.sigma_tt + params.compliance_slope(m.sigma) * m.sigma_t * m.sigma_t)
        - m.sigma_xx
}

/// `L2` distance between the finite element field and the manufactured
/// stress at time `t`, integrated with `degree + 3` Gauss points per cell.
pub fn l2_error(space: &FeSpace, sigma: &[f64], t: f64) -> Result<f64> {
    l2_error_against(space, sigma, |x| mms_fields(x, t).sigma)
}

/// `L2` distance between the finite element field and `exact`.
pub fn l2_error_against<F: Fn(f64) -> f64>(space: &FeSpace, coeffs: &[f64], exact: F) -> Result<f64> {
    let mut rules = Vec::new();
    for p in 1..=3usize {
        rules.push(gauss_rule(p + 3)?);
    }
    let mut total = 0.0;
    for cell in 0..space.n_cells() {
        let rule = &rules[space.degree(cell) as usize - 1];
        let shape = space.shape_eval(cell, &rule.points);
        let dofs = space.cell_dofs(cell);
        let jac = space.jacobian(cell);
        for (q, (&xi, &w)) in rule.points.iter().zip(&rule.weights).enumerate() {
            let uh: f64 = dofs
                .clone()
                .zip(shape.point_values(q))
                .map(|(d, n)| coeffs[d] * n)
                .sum();
            let e = uh - exact(space.map_to_physical(cell, xi));
            total += e * e * w * jac;
        }
    }
    Ok(sqrt(total))
}

/// Observed convergence rate between two errors at refinement ratio `ratio`.
pub fn observed_rate(coarse: f64, fine: f64, ratio: f64) -> f64 {
    log(coarse / fine) / log(ratio)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StudyKind {
    Spatial,
    Temporal,
}

/// Settings shared by all rows of a manufactured-solution study.
#[derive(Debug, Clone, PartialEq)]
pub struct MmsSettings {
    pub material: MaterialParams,
    pub alpha: f64,
    pub t_final: f64,
    pub newton: NewtonSettings,
    /// Meshes of the spatial study.
    pub spatial_cells: Vec<usize>,
    pub spatial_dt: f64,
    /// Mesh and time steps of the temporal study.
    pub temporal_cells: usize,
    pub temporal_degree: u8,
    pub temporal_dts: Vec<f64>,
}

impl Default for MmsSettings {
    fn default() -> Self {
        Self {
            material: MaterialParams {
                rho: 1.0,
                b: 1.0,
                a: 2.0,
                reg_eta: MaterialParams::DEFAULT_REG_ETA,
            },
            alpha: -0.05,
            t_final: 1.0,
            newton: NewtonSettings::default(),
            spatial_cells: alloc::vec![16, 32, 64, 128],
            spatial_dt: 1e-5,
            temporal_cells: 64,
            temporal_degree: 3,
            temporal_dts: alloc::vec![8e-3, 4e-3, 2e-3, 1e-3],
        }
    }
}

/// One run of a study.
#[derive(Debug, Clone, PartialEq)]
pub struct MmsCase {
    pub n_cells: usize,
    pub degree: u8,
    pub dt: f64,
    pub config: SimulationConfig,
}

impl MmsCase {
    pub fn new(settings: &MmsSettings, n_cells: usize, degree: u8, dt: f64) -> Self {
        let config = SimulationConfig {
            material: settings.material,
            length: 1.0,
            n_cells,
            degree_policy: DegreePolicy::Uniform(degree),
            dt,
            t_final: settings.t_final,
            alpha: settings.alpha,
            drive: BoundaryDrive::quiet(),
            newton: settings.newton,
            initial_condition: InitialCondition::Manufactured,
            initial_acceleration: InitialAcceleration::Solve,
            source: Source::Manufactured,
            snapshot_interval: None,
        };
        Self {
            n_cells,
            degree,
            dt,
            config,
        }
    }

    /// Run the case and measure the error at the final time.
    pub fn run(&self) -> Result<MmsOutcome> {
        let out = run_simulation(&self.config)?;
        let last = out.snapshots.last().expect("final state is always kept");
        let l2 = l2_error(&out.space, &last.sigma, last.t)?;
        Ok(MmsOutcome {
            n_cells: self.n_cells,
            dofs: out.space.n_dofs(),
            dt: self.dt,
            l2_error: l2,
            max_newton_iterations: out.report.max_newton_iterations,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MmsOutcome {
    pub n_cells: usize,
    pub dofs: usize,
    pub dt: f64,
    pub l2_error: f64,
    pub max_newton_iterations: usize,
}

/// Runs of a study, coarsest first.
pub fn study_cases(kind: StudyKind, settings: &MmsSettings) -> Vec<MmsCase> {
    match kind {
        StudyKind::Spatial => settings
            .spatial_cells
            .iter()
            .map(|&n| MmsCase::new(settings, n, 1, settings.spatial_dt))
            .collect(),
        StudyKind::Temporal => settings
            .temporal_dts
            .iter()
            .map(|&dt| MmsCase::new(settings, settings.temporal_cells, settings.temporal_degree, dt))
            .collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    /// Cell count (spatial study) or time step (temporal study).
    pub resolution: f64,
    pub dofs: usize,
    pub l2_error: f64,
    /// `None` on the first row.
    pub rate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub kind: StudyKind,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceTable {
    /// Build the table from outcomes ordered coarse to fine. Every
    /// refinement halves `h` or `dt`.
    pub fn from_outcomes(kind: StudyKind, outcomes: &[MmsOutcome]) -> Self {
        let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(outcomes.len());
        for (i, o) in outcomes.iter().enumerate() {
            let rate = (i > 0).then(|| observed_rate(outcomes[i - 1].l2_error, o.l2_error, 2.0));
            rows.push(ConvergenceRow {
                resolution: match kind {
                    StudyKind::Spatial => o.n_cells as f64,
                    StudyKind::Temporal => o.dt,
                },
                dofs: o.dofs,
                l2_error: o.l2_error,
                rate,
            });
        }
        Self { kind, rows }
    }

    pub fn rates(&self) -> Vec<f64> {
        self.rows.iter().filter_map(|r| r.rate).collect()
    }
}

/// Run every case of a study in sequence and tabulate the errors.
pub fn convergence_study(kind: StudyKind, settings: &MmsSettings) -> Result<ConvergenceTable> {
    let outcomes = study_cases(kind, settings)
        .iter()
        .map(MmsCase::run)
        .collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceTable::from_outcomes(kind, &outcomes))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn fields_vanish_on_the_boundary() {
        for &t in &[0.0, 0.3, 2.0] {
            for &x in &[0.0, 1.0] {
                let m = mms_fields(x, t);
                for v in [m.sigma, m.sigma_t, m.sigma_tt, m.sigma_xx] {
                    assert!(v.abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn field_spot_values() {
        let m = mms_fields(0.3, 0.0);
        assert_eq!(m.sigma, 0.0);
        assert_eq!(m.sigma_t, (PI * 0.3).sin());
        let m = mms_fields(0.5, FRAC_PI_2);
        assert!((m.sigma - 1.0).abs() < 1e-15);
        assert!((m.sigma_xx + PI * PI).abs() < 1e-13);
    }

    #[test]
    fn forcing_matches_independent_values() {
        let lin = MaterialParams::linear(1.0).unwrap();
        let f = mms_forcing(0.3, 0.7, &lin);
        assert!((f - (PI * PI - 1.0) * (PI * 0.3).sin() * 0.7f64.sin()).abs() < 1e-14);
        assert!((f - 4.622_687_536_603_548).abs() < 1e-13);

        // high precision chain-rule evaluation
        let p = MaterialParams::new(1.0, 1.0, 2.0).unwrap();
        assert!((mms_forcing(0.5, 1.0, &p) - 7.734_768_106_016_870).abs() < 1e-12);
        assert!((mms_forcing(0.3, 0.7, &p) - 4.452_120_498_755_480).abs() < 1e-12);
        for &t in &[0.1, 1.3] {
            assert!(mms_forcing(0.0, t, &p).abs() < 1e-14);
            assert!(mms_forcing(1.0, t, &p).abs() < 1e-12);
        }
    }

    #[test]
    fn l2_error_examples() {
        let s = FeSpace::build(1.0, 16, DegreePolicy::Uniform(1)).unwrap();
        let zero = s.interpolate(|x| mms_fields(x, 0.0).sigma);
        assert_eq!(l2_error(&s, &zero, 0.0).unwrap(), 0.0);
        let e = l2_error(&s, &alloc::vec![0.0; s.n_dofs()], FRAC_PI_2).unwrap();
        assert!((e - 0.5f64.sqrt()).abs() < 1e-12);
        // a constant shift on a domain of length 2
        let s2 = FeSpace::build(2.0, 10, DegreePolicy::Uniform(2)).unwrap();
        let shifted = s2.interpolate(|x| x * x + 0.25);
        let e = l2_error_against(&s2, &shifted, |x| x * x).unwrap();
        assert!((e - 0.25 * 2f64.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn rate_formula_reproduces_published_spatial_rates() {
        let errors = [1.246e-4, 3.117e-5, 7.793e-6, 1.948e-6];
        for w in errors.windows(2) {
            let r = observed_rate(w[0], w[1], 2.0);
            assert!((r - 2.00).abs() < 0.005, "{r}");
        }
        let outcomes: Vec<MmsOutcome> = errors
            .iter()
            .enumerate()
            .map(|(i, &e)| MmsOutcome {
                n_cells: 16 << i,
                dofs: (16 << i) + 1,
                dt: 1e-5,
                l2_error: e,
                max_newton_iterations: 1,
            })
            .collect();
        let table = ConvergenceTable::from_outcomes(StudyKind::Spatial, &outcomes);
        assert_eq!(table.rows[0].rate, None);
        assert_eq!(table.rates().len(), 3);
        assert_eq!(table.rows[3].resolution, 128.0);
    }

    #[test]
    fn study_cases_follow_settings() {
        let s = MmsSettings::default();
        let spatial = study_cases(StudyKind::Spatial, &s);
        assert_eq!(spatial.iter().map(|c| c.n_cells).collect::<Vec<_>>(), [16, 32, 64, 128]);
        assert!(spatial.iter().all(|c| c.dt == 1e-5 && c.degree == 1));
        let temporal = study_cases(StudyKind::Temporal, &s);
        assert_eq!(temporal.iter().map(|c| c.dt).collect::<Vec<_>>(), [8e-3, 4e-3, 2e-3, 1e-3]);
        assert!(temporal.iter().all(|c| c.degree == 3));
    }

    #[test]
    fn manufactured_run_tracks_exact_solution() {
        let s = MmsSettings {
            t_final: 0.5,
            ..MmsSettings::default()
        };
        let coarse = MmsCase::new(&s, 8, 2, 0.01).run().unwrap();
        let fine = MmsCase::new(&s, 16, 2, 0.005).run().unwrap();
        assert!(coarse.l2_error < 1e-3);
        assert!(fine.l2_error < coarse.l2_error / 3.0);
    }
}
