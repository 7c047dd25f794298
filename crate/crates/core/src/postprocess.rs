//! Kinematic reconstruction from the stress solution.
//!
//! The primary unknown is stress, so displacement and particle velocity are
//! recovered by trapezoidal integration of `eps = f(sigma)` and
//! `eps_t = f'(sigma) sigma_t` from the left end, where both are anchored
//! at zero.

use alloc::vec::Vec;

use crate::constitutive::MaterialParams;
use crate::fe_space::FeSpace;
use crate::Result;

/// Stress and stress rate sampled on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSamples {
    pub x: Vec<f64>,
    pub sigma: Vec<f64>,
    pub sigma_dot: Vec<f64>,
}

/// Fields written for one output time.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotRecord {
    pub x: Vec<f64>,
    pub sigma: Vec<f64>,
    pub sigma_dot: Vec<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub eps: Vec<f64>,
    pub c: Vec<f64>,
}

impl SnapshotRecord {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Largest `|d sigma / dx|` by first differences of the samples.
    pub fn max_stress_gradient(&self) -> f64 {
        self.x
            .windows(2)
            .zip(self.sigma.windows(2))
            .map(|(x, s)| libm::fabs((s[1] - s[0]) / (x[1] - x[0])))
            .fold(0.0, f64::max)
    }
}

/// Evaluate the finite element fields at `m + 1` equispaced points of `[0, L]`.
pub fn sample_solution(space: &FeSpace, sigma: &[f64], sigma_dot: &[f64], m: usize) -> Result<FieldSamples> {
    if m < 1 {
        return Err(crate::Error::invalid("need at least one sampling interval"));
    }
    for v in [sigma, sigma_dot] {
        if v.len() != space.n_dofs() {
            return Err(crate::Error::DimensionMismatch {
                expected: space.n_dofs(),
                actual: v.len(),
            });
        }
    }
    let length = space.length();
    let x: Vec<f64> = (0..=m)
        .map(|i| if i == m { length } else { length * i as f64 / m as f64 })
        .collect();
    Ok(FieldSamples {
        sigma: x.iter().map(|&xi| space.evaluate(sigma, xi)).collect(),
        sigma_dot: x.iter().map(|&xi| space.evaluate(sigma_dot, xi)).collect(),
        x,
    })
}

/// Strain, displacement, particle velocity and wave speed from the samples.
pub fn reconstruct(samples: &FieldSamples, params: &MaterialParams) -> Result<SnapshotRecord> {
    let n = samples.x.len();
    let mut eps = Vec::with_capacity(n);
    let mut eps_rate = Vec::with_capacity(n);
    let mut c = Vec::with_capacity(n);
    for (i, (&s, &s_dot)) in samples.sigma.iter().zip(&samples.sigma_dot).enumerate() {
        let speed = params
            .wave_speed(s)
            .map_err(|e| e.at_position(samples.x[i]))?;
        eps.push(params.strain(s));
        eps_rate.push(params.compliance(s) * s_dot);
        c.push(speed);
    }
    let u = trapezoid_cumulative(&samples.x, &eps);
    let v = trapezoid_cumulative(&samples.x, &eps_rate);
    Ok(SnapshotRecord {
        x: samples.x.clone(),
        sigma: samples.sigma.clone(),
        sigma_dot: samples.sigma_dot.clone(),
        u,
        v,
        eps,
        c,
    })
}

fn trapezoid_cumulative(x: &[f64], f: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(x.len());
    let mut acc = 0.0;
    for i in 0..x.len() {
        if i > 0 {
            acc += 0.5 * (f[i] + f[i - 1]) * (x[i] - x[i - 1]);
        }
        out.push(acc);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fe_space::DegreePolicy;
    use std::f64::consts::PI;
    use std::vec;

    #[test]
    fn zero_stress_gives_rest_state() {
        let p = MaterialParams::new(4.0, 2.0, 1.5).unwrap();
        let samples = FieldSamples {
            x: (0..=10).map(|i| i as f64 / 10.0).collect(),
            sigma: vec![0.0; 11],
            sigma_dot: vec![0.0; 11],
        };
        let r = reconstruct(&samples, &p).unwrap();
        assert!(r.u.iter().chain(&r.v).chain(&r.eps).all(|&v| v == 0.0));
        assert!(r.c.iter().all(|&c| c == 0.5));
    }

    #[test]
    fn constant_stress_gives_linear_displacement() {
        let p = MaterialParams::new(1.0, 1.0, 2.0).unwrap();
        let m = 37;
        let s = 0.8;
        let samples = FieldSamples {
            x: (0..=m).map(|i| 2.0 * i as f64 / m as f64).collect(),
            sigma: vec![s; m + 1],
            sigma_dot: vec![0.0; m + 1],
        };
        let r = reconstruct(&samples, &p).unwrap();
        for (u, x) in r.u.iter().zip(&r.x) {
            assert!((u - p.strain(s) * x).abs() < 1e-15);
        }
        assert_eq!(r.u[0], 0.0);
        assert_eq!(r.v[0], 0.0);
        for (c, sg) in r.c.iter().zip(&r.sigma) {
            assert_eq!(*c, p.wave_speed(*sg).unwrap());
        }
    }

    #[test]
    fn sampled_field_matches_interpolated_sine() {
        let s = FeSpace::build(1.0, 64, DegreePolicy::Uniform(1)).unwrap();
        let sigma = s.interpolate(|x| (PI * x).sin());
        let zeros = vec![0.0; s.n_dofs()];
        let samples = sample_solution(&s, &sigma, &zeros, 100).unwrap();
        let h = 1.0 / 64.0;
        for (x, v) in samples.x.iter().zip(&samples.sigma) {
            assert!((v - (PI * x).sin()).abs() <= PI * PI * h * h / 8.0 + 1e-15);
        }
        let z = sample_solution(&s, &zeros, &zeros, 100).unwrap();
        assert!(z.sigma.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn samples_on_vertices_equal_nodal_values() {
        let s = FeSpace::build(1.0, 8, DegreePolicy::CenterGraded).unwrap();
        let sigma: Vec<f64> = (0..s.n_dofs()).map(|i| (i as f64 * 0.37).cos()).collect();
        let samples = sample_solution(&s, &sigma, &sigma, 16).unwrap();
        for (c, &xv) in s.vertices().iter().enumerate() {
            let i = samples.x.iter().position(|&x| x == xv).unwrap();
            let dof = if c == s.n_cells() { s.n_dofs() - 1 } else { s.cell_dofs(c).start };
            assert_eq!(samples.sigma[i], sigma[dof]);
        }
    }
}
