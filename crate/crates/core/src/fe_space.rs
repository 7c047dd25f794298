//! One-dimensional continuous Lagrange finite element space with a per-cell
//! polynomial degree.
//!
//! Cells are uniform intervals of `[0, L]`. Every cell of degree `p` carries
//! `p + 1` local nodes placed at the Gauss-Lobatto points of the reference
//! cell `[-1, 1]`; neighbouring cells share their common vertex, so global
//! dofs are numbered left to right and a matrix assembled on the space has
//! half bandwidth equal to the largest cell degree.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::Error;
use crate::quadrature::{gauss_rule, QuadratureRule};
use crate::Result;

pub const MAX_DEGREE: u8 = 3;

/// How polynomial degrees are distributed over the cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DegreePolicy {
    Uniform(u8),
    /// Cubic cells around the middle of the bar, quadratic cells in the
    /// next band and linear cells near the ends.
    CenterGraded,
}

impl DegreePolicy {
    /// Degree for a cell whose midpoint sits at `midpoint` on `[0, length]`.
    pub fn degree_at(&self, midpoint: f64, length: f64) -> u8 {
        match *self {
            DegreePolicy::Uniform(p) => p,
            DegreePolicy::CenterGraded => {
                let d = libm::fabs(midpoint / length - 0.5);
                if d < 0.2 {
                    3
                } else if d < 0.4 {
                    2
                } else {
                    1
                }
            }
        }
    }
}

/// Lagrange basis on `[-1, 1]` with Gauss-Lobatto nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct LagrangeBasis {
    degree: u8,
    nodes: Vec<f64>,
}

impl LagrangeBasis {
    pub fn new(degree: u8) -> Result<Self> {
        let nodes = match degree {
            1 => vec![-1.0, 1.0],
            2 => vec![-1.0, 0.0, 1.0],
            3 => {
                let r = 1.0 / libm::sqrt(5.0);
                vec![-1.0, -r, r, 1.0]
            }
            _ => {
                return Err(Error::invalid(alloc::format!(
                    "polynomial degree must be 1, 2 or 3, got {degree}"
                )))
            }
        };
        Ok(Self { degree, nodes })
    }

    pub fn degree(&self) -> u8 {
        self.degree
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Values and reference derivatives of every basis function at `xi`.
    pub fn eval(&self, xi: f64, values: &mut [f64], derivs: &mut [f64]) {
        let n = self.nodes.len();
        for i in 0..n {
            let xi_i = self.nodes[i];
            let mut v = 1.0;
            let mut d = 0.0;
            for m in 0..n {
                if m == i {
                    continue;
                }
                let denom = xi_i - self.nodes[m];
                // product rule: d/dxi of prod_m (xi - x_m) / (x_i - x_m)
                d = d * (xi - self.nodes[m]) / denom + v / denom;
                v *= (xi - self.nodes[m]) / denom;
            }
            values[i] = v;
            derivs[i] = d;
        }
    }
}

/// Basis values at a list of reference points, stored point-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeValues {
    pub n_local: usize,
    pub values: Vec<f64>,
    pub ref_derivs: Vec<f64>,
}

impl ShapeValues {
    pub fn value(&self, point: usize, local: usize) -> f64 {
        self.values[point * self.n_local + local]
    }

    pub fn ref_deriv(&self, point: usize, local: usize) -> f64 {
        self.ref_derivs[point * self.n_local + local]
    }

    pub fn point_values(&self, point: usize) -> &[f64] {
        &self.values[point * self.n_local..(point + 1) * self.n_local]
    }

    pub fn point_ref_derivs(&self, point: usize) -> &[f64] {
        &self.ref_derivs[point * self.n_local..(point + 1) * self.n_local]
    }
}

/// Precomputed basis values at the assembly quadrature points of one degree.
#[derive(Debug, Clone)]
pub(crate) struct CellTable {
    pub(crate) rule: QuadratureRule,
    pub(crate) shape: ShapeValues,
}

#[derive(Debug, Clone)]
pub struct FeSpace {
    length: f64,
    vertices: Vec<f64>,
    degrees: Vec<u8>,
    dof_offsets: Vec<usize>,
    dof_coords: Vec<f64>,
    bases: Vec<LagrangeBasis>,
    tables: Vec<CellTable>,
}

impl FeSpace {
    /// Uniform mesh of `n_cells` cells on `[0, length]` with degrees from `policy`.
    pub fn build(length: f64, n_cells: usize, policy: DegreePolicy) -> Result<Self> {
        if n_cells < 2 {
            return Err(Error::invalid(alloc::format!("need at least 2 cells, got {n_cells}")));
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::invalid(alloc::format!("domain length must be positive, got {length}")));
        }
        if let DegreePolicy::Uniform(p) = policy {
            if !(1..=MAX_DEGREE).contains(&p) {
                return Err(Error::invalid(alloc::format!(
                    "polynomial degree must be 1, 2 or 3, got {p}"
                )));
            }
        }

        let vertices: Vec<f64> = (0..=n_cells)
            .map(|i| if i == n_cells { length } else { length * i as f64 / n_cells as f64 })
            .collect();
        let degrees: Vec<u8> = (0..n_cells)
            .map(|c| policy.degree_at(0.5 * (vertices[c] + vertices[c + 1]), length))
            .collect();

        let bases = (1..=MAX_DEGREE)
            .map(LagrangeBasis::new)
            .collect::<Result<Vec<_>>>()?;

        let mut dof_offsets = Vec::with_capacity(n_cells + 1);
        let mut dof_coords = vec![vertices[0]];
        let mut offset = 0;
        for c in 0..n_cells {
            dof_offsets.push(offset);
            let basis = &bases[degrees[c] as usize - 1];
            let (x0, x1) = (vertices[c], vertices[c + 1]);
            for (k, &xi) in basis.nodes().iter().enumerate().skip(1) {
                let x = if k == basis.len() - 1 { x1 } else { x0 + 0.5 * (xi + 1.0) * (x1 - x0) };
                dof_coords.push(x);
            }
            offset += degrees[c] as usize;
        }
        dof_offsets.push(offset);

        let tables = bases
            .iter()
            .map(|basis| {
                let rule = gauss_rule(basis.degree() as usize + 2)?;
                let shape = eval_basis(basis, &rule.points);
                Ok(CellTable { rule, shape })
            })
            .collect::<Result<Vec<_>>>()?;

        Ok(Self {
            length,
            vertices,
            degrees,
            dof_offsets,
            dof_coords,
            bases,
            tables,
        })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn n_cells(&self) -> usize {
        self.degrees.len()
    }

    pub fn n_dofs(&self) -> usize {
        self.dof_coords.len()
    }

    pub fn degree(&self, cell: usize) -> u8 {
        self.degrees[cell]
    }

    pub fn degrees(&self) -> &[u8] {
        &self.degrees
    }

    pub fn vertices(&self) -> &[f64] {
        &self.vertices
    }

    pub fn dof_coords(&self) -> &[f64] {
        &self.dof_coords
    }

    pub fn max_degree(&self) -> u8 {
        self.degrees.iter().copied().max().unwrap_or(1)
    }

    /// Half bandwidth of matrices assembled on this space.
    pub fn bandwidth(&self) -> usize {
        self.max_degree() as usize
    }

    /// Global dofs of `cell`, ordered left to right. Consecutive integers.
    pub fn cell_dofs(&self, cell: usize) -> core::ops::Range<usize> {
        self.dof_offsets[cell]..self.dof_offsets[cell + 1] + 1
    }

    pub fn cell_bounds(&self, cell: usize) -> (f64, f64) {
        (self.vertices[cell], self.vertices[cell + 1])
    }

    /// `dx / dxi` on `cell`.
    pub fn jacobian(&self, cell: usize) -> f64 {
        let (x0, x1) = self.cell_bounds(cell);
        0.5 * (x1 - x0)
    }

    pub fn map_to_physical(&self, cell: usize, xi: f64) -> f64 {
        let (x0, x1) = self.cell_bounds(cell);
        x0 + 0.5 * (xi + 1.0) * (x1 - x0)
    }

    pub fn basis(&self, cell: usize) -> &LagrangeBasis {
        &self.bases[self.degrees[cell] as usize - 1]
    }

    /// Dofs constrained by the stress boundary data.
    pub fn boundary_dofs(&self) -> [usize; 2] {
        [0, self.n_dofs() - 1]
    }

    /// Basis values and reference derivatives of `cell` at `ref_points` in `[-1, 1]`.
    pub fn shape_eval(&self, cell: usize, ref_points: &[f64]) -> ShapeValues {
        eval_basis(self.basis(cell), ref_points)
    }

    /// Quadrature rule and basis table used for assembly on `cell`.
    pub(crate) fn cell_table(&self, cell: usize) -> &CellTable {
        &self.tables[self.degrees[cell] as usize - 1]
    }

    /// Assembly quadrature rule on `cell` (`degree + 2` Gauss points).
    pub fn quadrature(&self, cell: usize) -> &QuadratureRule {
        &self.cell_table(cell).rule
    }

    /// Cell containing `x` and its reference coordinate. Points outside the
    /// domain are clamped to the end cells.
    pub fn locate(&self, x: f64) -> (usize, f64) {
        let n = self.n_cells();
        let guess = libm::floor(x / self.length * n as f64);
        let mut cell = if guess < 0.0 { 0 } else { (guess as usize).min(n - 1) };
        while cell > 0 && x < self.vertices[cell] {
            cell -= 1;
        }
        while cell + 1 < n && x > self.vertices[cell + 1] {
            cell += 1;
        }
        let (x0, x1) = self.cell_bounds(cell);
        let xi = if x == x0 {
            -1.0
        } else if x == x1 {
            1.0
        } else {
            (2.0 * (x - x0) / (x1 - x0) - 1.0).clamp(-1.0, 1.0)
        };
        (cell, xi)
    }

    /// Value and `d/dx` of the finite element field `coeffs` at `x`.
    pub fn evaluate_with_gradient(&self, coeffs: &[f64], x: f64) -> (f64, f64) {
        let (cell, xi) = self.locate(x);
        let basis = self.basis(cell);
        let mut values = [0.0; MAX_DEGREE as usize + 1];
        let mut derivs = [0.0; MAX_DEGREE as usize + 1];
        let n = basis.len();
        basis.eval(xi, &mut values[..n], &mut derivs[..n]);
        let dofs = self.cell_dofs(cell);
        let jac = self.jacobian(cell);
        let mut v = 0.0;
        let mut d = 0.0;
        for (k, dof) in dofs.enumerate() {
            v += coeffs[dof] * values[k];
            d += coeffs[dof] * derivs[k];
        }
        (v, d / jac)
    }

    pub fn evaluate(&self, coeffs: &[f64], x: f64) -> f64 {
        self.evaluate_with_gradient(coeffs, x).0
    }

    /// Nodal interpolant of `f`.
    pub fn interpolate<F: Fn(f64) -> f64>(&self, f: F) -> Vec<f64> {
        self.dof_coords.iter().map(|&x| f(x)).collect()
    }
}

fn eval_basis(basis: &LagrangeBasis, ref_points: &[f64]) -> ShapeValues {
    let n_local = basis.len();
    let mut values = vec![0.0; ref_points.len() * n_local];
    let mut ref_derivs = vec![0.0; ref_points.len() * n_local];
    for (q, &xi) in ref_points.iter().enumerate() {
        basis.eval(
            xi,
            &mut values[q * n_local..(q + 1) * n_local],
            &mut ref_derivs[q * n_local..(q + 1) * n_local],
        );
    }
    ShapeValues {
        n_local,
        values,
        ref_derivs,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn center_graded_degrees_follow_midpoint_bands() {
        let space = FeSpace::build(1.0, 10, DegreePolicy::CenterGraded).unwrap();
        assert_eq!(space.degrees(), &[1, 2, 2, 3, 3, 3, 3, 2, 2, 1]);
        // bands scale with the domain length
        let long = FeSpace::build(5.0, 10, DegreePolicy::CenterGraded).unwrap();
        assert_eq!(long.degrees(), space.degrees());
    }

    #[test]
    fn dof_counts() {
        assert_eq!(FeSpace::build(1.0, 16, DegreePolicy::Uniform(1)).unwrap().n_dofs(), 17);
        assert_eq!(FeSpace::build(1.0, 2, DegreePolicy::Uniform(3)).unwrap().n_dofs(), 7);
        for &policy in &[DegreePolicy::Uniform(1), DegreePolicy::Uniform(2), DegreePolicy::CenterGraded] {
            for n in 2..30 {
                let s = FeSpace::build(2.5, n, policy).unwrap();
                let local: usize = s.degrees().iter().map(|&p| p as usize + 1).sum();
                assert_eq!(local - (n - 1), s.n_dofs());
            }
        }
    }

    #[test]
    fn neighbouring_cells_share_one_dof() {
        let s = FeSpace::build(1.0, 10, DegreePolicy::CenterGraded).unwrap();
        for c in 0..s.n_cells() - 1 {
            let left = s.cell_dofs(c);
            let right = s.cell_dofs(c + 1);
            assert_eq!(left.len(), s.degree(c) as usize + 1);
            assert_eq!(left.end - 1, right.start);
            assert_eq!(s.dof_coords()[right.start], s.vertices()[c + 1]);
        }
        let coords = s.dof_coords();
        assert!(coords.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(coords[0], 0.0);
        assert_eq!(*coords.last().unwrap(), 1.0);
        assert_eq!(s.bandwidth(), 3);
    }

    #[test]
    fn invalid_meshes_are_rejected() {
        assert!(FeSpace::build(1.0, 1, DegreePolicy::Uniform(1)).is_err());
        assert!(FeSpace::build(0.0, 4, DegreePolicy::Uniform(1)).is_err());
        assert!(FeSpace::build(1.0, 4, DegreePolicy::Uniform(4)).is_err());
        assert!(FeSpace::build(1.0, 4, DegreePolicy::Uniform(0)).is_err());
    }

    #[test]
    fn linear_hats_at_midpoint() {
        let s = FeSpace::build(1.0, 2, DegreePolicy::Uniform(1)).unwrap();
        let sv = s.shape_eval(0, &[0.0]);
        assert_eq!(sv.point_values(0), &[0.5, 0.5]);
        assert_eq!(sv.point_ref_derivs(0), &[-0.5, 0.5]);
    }

    #[test]
    fn quadratic_basis_is_kronecker_at_nodes() {
        let s = FeSpace::build(1.0, 2, DegreePolicy::Uniform(2)).unwrap();
        let nodes = s.basis(0).nodes().to_vec();
        let sv = s.shape_eval(0, &nodes);
        for q in 0..3 {
            for i in 0..3 {
                assert_eq!(sv.value(q, i), if q == i { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn partition_of_unity() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for p in 1..=3 {
            let b = LagrangeBasis::new(p).unwrap();
            let mut v = [0.0; 4];
            let mut d = [0.0; 4];
            for _ in 0..200 {
                let xi = rng.random_range(-1.0..=1.0);
                b.eval(xi, &mut v[..b.len()], &mut d[..b.len()]);
                let sv: f64 = v[..b.len()].iter().sum();
                let sd: f64 = d[..b.len()].iter().sum();
                assert!((sv - 1.0).abs() <= 1e-14);
                assert!(sd.abs() <= 1e-13);
            }
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        for p in 1..=3 {
            let b = LagrangeBasis::new(p).unwrap();
            let n = b.len();
            let (mut v0, mut v1, mut d, mut scratch) = ([0.0; 4], [0.0; 4], [0.0; 4], [0.0; 4]);
            let h = 1e-6;
            for &xi in &[-0.9, -0.3, 0.1, 0.77] {
                b.eval(xi, &mut scratch[..n], &mut d[..n]);
                b.eval(xi + h, &mut v1[..n], &mut scratch[..n]);
                b.eval(xi - h, &mut v0[..n], &mut scratch[..n]);
                for i in 0..n {
                    let fd = (v1[i] - v0[i]) / (2.0 * h);
                    assert!((fd - d[i]).abs() < 1e-8);
                }
            }
        }
    }

    #[test]
    fn polynomials_up_to_min_degree_are_reproduced() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for (policy, deg) in [
            (DegreePolicy::Uniform(1), 1),
            (DegreePolicy::Uniform(2), 2),
            (DegreePolicy::Uniform(3), 3),
            (DegreePolicy::CenterGraded, 1),
        ] {
            let s = FeSpace::build(1.3, 7, policy).unwrap();
            let poly = |x: f64| (0..=deg).map(|k| (k as f64 + 0.5) * x.powi(k)).sum::<f64>();
            let coeffs = s.interpolate(poly);
            for _ in 0..100 {
                let x = rng.random_range(0.0..=1.3);
                assert!((s.evaluate(&coeffs, x) - poly(x)).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn locate_handles_vertices_and_ends() {
        let s = FeSpace::build(1.0, 4, DegreePolicy::Uniform(1)).unwrap();
        assert_eq!(s.locate(0.0), (0, -1.0));
        assert_eq!(s.locate(1.0), (3, 1.0));
        let (c, xi) = s.locate(0.5);
        assert!(xi == 1.0 || xi == -1.0);
        assert_eq!(s.map_to_physical(c, xi), 0.5);
        assert_eq!(s.locate(0.3).0, 1);
    }
}
