//! Global vectors and matrices of the semi-discrete stress equation
//!
//! ```text
//! M(S) S'' + F_vel(S, S') + K S = L(t)
//! K_IJ     = int N_I' N_J' dx
//! M_IJ     = int rho f'(s) N_I N_J dx
//! F_vel,I  = int rho f''(s) s'^2 N_I dx
//! ```
//!
//! and of its HHT-alpha stage residual and Newton tangent. The Newton unknown
//! is the nodal stress acceleration at `t_{n+1}`; stress and stress rate
//! follow from it through the Newmark relations.

use alloc::vec;
use alloc::vec::Vec;

use crate::banded::BandedMatrix;
use crate::constitutive::MaterialParams;
use crate::error::Error;
use crate::fe_space::{FeSpace, MAX_DEGREE};
use crate::integrator::{HhtParams, SystemState};
use crate::Result;

const MAX_LOCAL: usize = MAX_DEGREE as usize + 1;

/// Prescribed value for one constrained acceleration dof.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AccelerationConstraint {
    pub dof: usize,
    pub prescribed: f64,
    /// Value of the dof in the current Newton iterate.
    pub current: f64,
}

/// Newton system `tangent * delta = rhs` with `rhs = -R`.
#[derive(Debug, Clone)]
pub struct AssembledSystem {
    pub tangent: BandedMatrix,
    pub rhs: Vec<f64>,
    /// Constrained dofs, filled by [`AssembledSystem::apply_dirichlet`].
    pub constrained: Vec<AccelerationConstraint>,
}

impl AssembledSystem {
    pub fn new(tangent: BandedMatrix, residual: &[f64]) -> Self {
        Self {
            tangent,
            rhs: residual.iter().map(|r| -r).collect(),
            constrained: Vec::new(),
        }
    }

    /// Replace constrained rows by identity rows whose right side is
    /// `prescribed - current`, and eliminate the matching columns from the
    /// other rows by moving them to the right side. Symmetry and band
    /// structure are preserved.
    ///
    /// Only the first and last dof may be constrained.
    pub fn apply_dirichlet(&mut self, constraints: &[AccelerationConstraint]) -> Result<()> {
        let n = self.tangent.dim();
        if self.rhs.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: self.rhs.len(),
            });
        }
        for c in constraints {
            if c.dof != 0 && c.dof + 1 != n {
                return Err(Error::InteriorConstraint(c.dof));
            }
        }
        for c in constraints {
            let update = c.prescribed - c.current;
            let i = c.dof;
            for j in self.tangent.row_range(i) {
                if j == i {
                    continue;
                }
                let coupling = self.tangent.get(j, i);
                self.rhs[j] -= coupling * update;
                self.tangent.set(j, i, 0.0);
                self.tangent.set(i, j, 0.0);
            }
            self.tangent.set(i, i, 1.0);
            self.rhs[i] = update;
            self.constrained.push(*c);
        }
        Ok(())
    }

    pub fn is_constrained(&self, dof: usize) -> bool {
        self.constrained.iter().any(|c| c.dof == dof)
    }

    pub fn solve(&self) -> Result<Vec<f64>> {
        self.tangent.solve(&self.rhs)
    }
}

/// Values of a nodal field and its gradient on one cell at one quadrature point.
#[inline]
fn interpolate_local(coeffs: &[f64], shape: &[f64]) -> f64 {
    coeffs.iter().zip(shape).map(|(c, n)| c * n).sum()
}

/// Assembles the discrete operators for a fixed space and material.
///
/// The stiffness matrix does not depend on the state and is built once.
#[derive(Debug, Clone)]
pub struct SystemAssembler<'a> {
    space: &'a FeSpace,
    params: MaterialParams,
    stiffness: BandedMatrix,
}

impl<'a> SystemAssembler<'a> {
    pub fn new(space: &'a FeSpace, params: MaterialParams) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            space,
            params,
            stiffness: assemble_stiffness(space),
        })
    }

    pub fn space(&self) -> &FeSpace {
        self.space
    }

    pub fn params(&self) -> &MaterialParams {
        &self.params
    }

    pub fn stiffness(&self) -> &BandedMatrix {
        &self.stiffness
    }

    fn check_len(&self, v: &[f64]) -> Result<()> {
        if v.len() != self.space.n_dofs() {
            return Err(Error::DimensionMismatch {
                expected: self.space.n_dofs(),
                actual: v.len(),
            });
        }
        Ok(())
    }

    /// Visit every quadrature point of every cell with the local stress,
    /// rate and acceleration values.
    fn for_each_point<F>(&self, sigma: &[f64], rate: &[f64], accel: &[f64], mut visit: F) -> Result<()>
    where
        F: FnMut(core::ops::Range<usize>, &[f64], f64, [f64; 3]) -> Result<()>,
    {
        let space = self.space;
        for cell in 0..space.n_cells() {
            let table = space.cell_table(cell);
            let dofs = space.cell_dofs(cell);
            let jac = space.jacobian(cell);
            let (s, v, a) = (&sigma[dofs.clone()], &rate[dofs.clone()], &accel[dofs.clone()]);
            for (q, &w) in table.rule.weights.iter().enumerate() {
                let shape = table.shape.point_values(q);
                let fields = [
                    interpolate_local(s, shape),
                    interpolate_local(v, shape),
                    interpolate_local(a, shape),
                ];
                visit(dofs.clone(), shape, w * jac, fields).map_err(|e| {
                    e.at_position(space.map_to_physical(cell, table.rule.points[q]))
                })?;
            }
        }
        Ok(())
    }

    /// `F_inrt = M(S) S'' + F_vel(S, S')`.
    pub fn inertial_force(&self, sigma: &[f64], rate: &[f64], accel: &[f64]) -> Result<Vec<f64>> {
        for v in [sigma, rate, accel] {
            self.check_len(v)?;
        }
        let p = self.params;
        let mut force = vec![0.0; self.space.n_dofs()];
        self.for_each_point(sigma, rate, accel, |dofs, shape, dx, [s, v, a]| {
            let slope = p.hyperbolic_compliance(s)?;
            let density = p.rho * (slope * a + p.compliance_slope(s) * v * v);
            for (k, dof) in dofs.enumerate() {
                force[dof] += density * shape[k] * dx;
            }
            Ok(())
        })?;
        Ok(force)
    }

    /// HHT-alpha stage residual. Every term of the semi-discrete equation
    /// is evaluated at the intermediate instant `t_{n+1+alpha}`:
    ///
    /// ```text
    /// S_a  = w1 S_{n+1}  + w0 S_n
    /// S'_a = w1 S'_{n+1} + w0 S'_n
    /// R    = F_inrt(S_a, S'_a, S''_{n+1}) + K S_a - (w1 L_{n+1} + w0 L_n)
    /// ```
    ///
    /// with `(w1, w0)` from [`HhtParams::stiffness_weights`]. For a constant
    /// mass this is the classical HHT-alpha equation; blending the stress
    /// inside the nonlinear inertia keeps it second order when `M` depends
    /// on `S`.
    pub fn residual(
        &self,
        next: &SystemState,
        prev: &SystemState,
        hht: &HhtParams,
        loads: Option<(&[f64], &[f64])>,
    ) -> Result<Vec<f64>> {
        self.check_len(&prev.sigma)?;
        self.check_len(&prev.sigma_dot)?;
        let (w_next, w_prev) = hht.stiffness_weights();
        let sigma = blend(&next.sigma, &prev.sigma, w_next, w_prev);
        let rate = blend(&next.sigma_dot, &prev.sigma_dot, w_next, w_prev);
        let mut r = self.inertial_force(&sigma, &rate, &next.sigma_ddot)?;
        let ks = self.stiffness.mul_vec(&sigma);
        for i in 0..r.len() {
            r[i] += ks[i];
        }
        if let Some((l_next, l_prev)) = loads {
            self.check_len(l_next)?;
            self.check_len(l_prev)?;
            for i in 0..r.len() {
                r[i] -= w_next * l_next[i] + w_prev * l_prev[i];
            }
        }
        Ok(r)
    }

    /// Residual of the semi-discrete equation at a single instant,
    /// `F_inrt + K S - L`. Used for the initial acceleration.
    pub fn instantaneous_residual(&self, state: &SystemState, load: Option<&[f64]>) -> Result<Vec<f64>> {
        let mut r = self.inertial_force(&state.sigma, &state.sigma_dot, &state.sigma_ddot)?;
        let ks = self.stiffness.mul_vec(&state.sigma);
        for i in 0..r.len() {
            r[i] += ks[i];
        }
        if let Some(l) = load {
            self.check_len(l)?;
            for i in 0..r.len() {
                r[i] -= l[i];
            }
        }
        Ok(r)
    }

    /// Consistent state-dependent mass matrix `M(S)`.
    pub fn mass(&self, sigma: &[f64]) -> Result<BandedMatrix> {
        self.check_len(sigma)?;
        let p = self.params;
        let space = self.space;
        let zeros = vec![0.0; space.n_dofs()];
        let mut m = BandedMatrix::zeros(space.n_dofs(), space.bandwidth());
        self.for_each_point(sigma, &zeros, &zeros, |dofs, shape, dx, [s, _, _]| {
            let coef = p.rho * p.hyperbolic_compliance(s)? * dx;
            add_outer(&mut m, dofs, shape, coef);
            Ok(())
        })?;
        Ok(m)
    }

    /// Derivative of the stage residual with respect to the acceleration at
    /// `t_{n+1}`, with all coefficients taken at the blended state:
    ///
    /// ```text
    /// S = M(S_a) + w1 gamma dt C + w1 beta dt^2 (K + K_s)
    /// C_IJ   = int 2 rho f''(s) s' N_I N_J dx
    /// K_s,IJ = int rho (f''(s) s'' + f'''(s) s'^2) N_I N_J dx
    /// ```
    pub fn tangent(&self, next: &SystemState, prev: &SystemState, hht: &HhtParams) -> Result<BandedMatrix> {
        for v in [&next.sigma, &next.sigma_dot, &next.sigma_ddot, &prev.sigma, &prev.sigma_dot] {
            self.check_len(v)?;
        }
        let p = self.params;
        let space = self.space;
        let dt = hht.dt();
        let (w_next, w_prev) = hht.stiffness_weights();
        let c_vel = w_next * hht.gamma() * dt;
        let c_pos = w_next * hht.beta() * dt * dt;
        let sigma = blend(&next.sigma, &prev.sigma, w_next, w_prev);
        let rate = blend(&next.sigma_dot, &prev.sigma_dot, w_next, w_prev);
        let mut s = BandedMatrix::zeros(space.n_dofs(), space.bandwidth());
        self.for_each_point(&sigma, &rate, &next.sigma_ddot, |dofs, shape, dx, [sg, v, a]| {
            let f1 = p.hyperbolic_compliance(sg)?;
            let f2 = p.compliance_slope(sg);
            let f3 = p.compliance_curvature(sg);
            let velocity = 2.0 * f2 * v;
            let geometric = f2 * a + f3 * v * v;
            let coef = p.rho * (f1 + c_vel * velocity + c_pos * geometric) * dx;
            add_outer(&mut s, dofs, shape, coef);
            Ok(())
        })?;
        s.add_scaled(c_pos, &self.stiffness);
        Ok(s)
    }

    /// Load vector `L_I(t) = int g(x, t) N_I dx`.
    pub fn load<F: Fn(f64, f64) -> f64>(&self, forcing: F, t: f64) -> Vec<f64> {
        assemble_load(self.space, forcing, t)
    }

    /// Loads at both ends of a step.
    pub fn load_pair<F: Fn(f64, f64) -> f64>(&self, forcing: F, t_next: f64, t_prev: f64) -> (Vec<f64>, Vec<f64>) {
        (self.load(&forcing, t_next), self.load(&forcing, t_prev))
    }
}

fn blend(next: &[f64], prev: &[f64], w_next: f64, w_prev: f64) -> Vec<f64> {
    next.iter().zip(prev).map(|(a, b)| w_next * a + w_prev * b).collect()
}

fn add_outer(m: &mut BandedMatrix, dofs: core::ops::Range<usize>, shape: &[f64], coef: f64) {
    let base = dofs.start;
    let n = dofs.len();
    for i in 0..n {
        let ci = coef * shape[i];
        for j in 0..n {
            m.add(base + i, base + j, ci * shape[j]);
        }
    }
}

/// Constant stiffness matrix `K_IJ = int N_I' N_J' dx`.
pub fn assemble_stiffness(space: &FeSpace) -> BandedMatrix {
    let mut k = BandedMatrix::zeros(space.n_dofs(), space.bandwidth());
    for cell in 0..space.n_cells() {
        let table = space.cell_table(cell);
        let dofs = space.cell_dofs(cell);
        let jac = space.jacobian(cell);
        let n = dofs.len();
        let mut local = [[0.0; MAX_LOCAL]; MAX_LOCAL];
        for (q, &w) in table.rule.weights.iter().enumerate() {
            let d = table.shape.point_ref_derivs(q);
            // dN/dx = dN/dxi / jac, dx = jac dxi
            let scale = w / jac;
            for i in 0..n {
                for j in 0..n {
                    local[i][j] += d[i] * d[j] * scale;
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                k.add(dofs.start + i, dofs.start + j, local[i][j]);
            }
        }
    }
    k
}

/// Load vector of `forcing(x, t)` at time `t`.
pub fn assemble_load<F: Fn(f64, f64) -> f64>(space: &FeSpace, forcing: F, t: f64) -> Vec<f64> {
    let mut load = vec![0.0; space.n_dofs()];
    for cell in 0..space.n_cells() {
        let table = space.cell_table(cell);
        let jac = space.jacobian(cell);
        let dofs = space.cell_dofs(cell);
        for (q, (&xi, &w)) in table.rule.points.iter().zip(&table.rule.weights).enumerate() {
            let g = forcing(space.map_to_physical(cell, xi), t);
            if g == 0.0 {
                continue;
            }
            let shape = table.shape.point_values(q);
            for (k, dof) in dofs.clone().enumerate() {
                load[dof] += g * shape[k] * w * jac;
            }
        }
    }
    load
}
