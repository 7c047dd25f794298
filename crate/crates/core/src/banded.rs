//! Square band matrices and a partially pivoted band LU factorization.
//!
//! Finite element matrices on a 1D mesh couple a degree of freedom only to
//! the dofs of the cells it belongs to, so with left-to-right numbering the
//! half bandwidth equals the largest polynomial degree.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::Error;
use crate::Result;

/// Square matrix with equal lower and upper half bandwidth.
///
/// Row `i` stores columns `i - bandwidth ..= i + bandwidth`.
#[derive(Debug, Clone, PartialEq)]
pub struct BandedMatrix {
    n: usize,
    bandwidth: usize,
    data: Vec<f64>,
}

impl BandedMatrix {
    pub fn zeros(n: usize, bandwidth: usize) -> Self {
        Self {
            n,
            bandwidth,
            data: vec![0.0; n * (2 * bandwidth + 1)],
        }
    }

    pub fn identity(n: usize, bandwidth: usize) -> Self {
        let mut m = Self::zeros(n, bandwidth);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    #[inline]
    pub fn in_band(&self, i: usize, j: usize) -> bool {
        i < self.n && j < self.n && i.abs_diff(j) <= self.bandwidth
    }

    #[inline]
    fn index(&self, i: usize, j: usize) -> usize {
        debug_assert!(self.in_band(i, j), "({i}, {j}) outside band");
        i * (2 * self.bandwidth + 1) + (j + self.bandwidth - i)
    }

    /// Entry `(i, j)`; zero outside the band.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if self.in_band(i, j) {
            self.data[self.index(i, j)]
        } else {
            0.0
        }
    }

    /// # Panics
    /// If `(i, j)` lies outside the band.
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        assert!(self.in_band(i, j), "({i}, {j}) outside band");
        let k = self.index(i, j);
        self.data[k] = value;
    }

    /// # Panics
    /// If `(i, j)` lies outside the band.
    #[inline]
    pub fn add(&mut self, i: usize, j: usize, value: f64) {
        assert!(self.in_band(i, j), "({i}, {j}) outside band");
        let k = self.index(i, j);
        self.data[k] += value;
    }

    /// `self += scale * other`. Both matrices must share dimension and bandwidth.
    pub fn add_scaled(&mut self, scale: f64, other: &BandedMatrix) {
        assert_eq!(self.n, other.n);
        assert_eq!(self.bandwidth, other.bandwidth);
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += scale * b;
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for a in &mut self.data {
            *a *= factor;
        }
    }

    /// Column range of row `i` that lies inside the band.
    #[inline]
    pub fn row_range(&self, i: usize) -> core::ops::Range<usize> {
        i.saturating_sub(self.bandwidth)..(i + self.bandwidth + 1).min(self.n)
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        (0..self.n)
            .map(|i| self.row_range(i).map(|j| self.get(i, j) * x[j]).sum())
            .collect()
    }

    /// Largest `|A_ij - A_ji|` over the band.
    pub fn asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            for j in self.row_range(i) {
                worst = worst.max(libm::fabs(self.get(i, j) - self.get(j, i)));
            }
        }
        worst
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j)).collect())
            .collect()
    }

    pub fn factor(&self) -> Result<BandedLu> {
        BandedLu::new(self)
    }

    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        Ok(self.factor()?.solve(rhs))
    }
}

/// LU factors of a band matrix with row interchanges (the LAPACK `gbtrf`
/// layout, stored row-wise).
///
/// With lower bandwidth `kl` and upper bandwidth `ku`, row interchanges can
/// widen `U` to `kl + ku` superdiagonals; each row therefore keeps columns
/// `i - kl ..= i + kl + ku`.
#[derive(Debug, Clone)]
pub struct BandedLu {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    upper: Vec<f64>,
    multipliers: Vec<f64>,
    pivots: Vec<usize>,
}

impl BandedLu {
    pub fn new(matrix: &BandedMatrix) -> Result<Self> {
        let n = matrix.n;
        let kl = matrix.bandwidth;
        let ku = matrix.bandwidth;
        let width = 2 * kl + ku + 1;
        let mut lu = Self {
            n,
            kl,
            ku,
            width,
            upper: vec![0.0; n * width],
            multipliers: vec![0.0; n * kl],
            pivots: vec![0; n],
        };
        for i in 0..n {
            for j in matrix.row_range(i) {
                let k = lu.slot(i, j);
                lu.upper[k] = matrix.get(i, j);
            }
        }
        lu.eliminate()?;
        Ok(lu)
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> usize {
        i * self.width + (j + self.kl - i)
    }

    fn eliminate(&mut self) -> Result<()> {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        let scale = self.upper.iter().fold(0.0_f64, |m, v| m.max(libm::fabs(*v)));
        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let last_col = (k + kl + ku).min(n - 1);

            let mut pivot_row = k;
            let mut pivot_mag = libm::fabs(self.upper[self.slot(k, k)]);
            for r in k + 1..=last_row {
                let mag = libm::fabs(self.upper[self.slot(r, k)]);
                if mag > pivot_mag {
                    pivot_mag = mag;
                    pivot_row = r;
                }
            }
            if pivot_mag == 0.0 || pivot_mag <= f64::EPSILON * scale * 1e-6 {
                return Err(Error::SingularMatrix(k));
            }
            self.pivots[k] = pivot_row;
            if pivot_row != k {
                for j in k..=last_col {
                    let a = self.slot(k, j);
                    let b = self.slot(pivot_row, j);
                    self.upper.swap(a, b);
                }
            }

            let diag = self.upper[self.slot(k, k)];
            for r in k + 1..=last_row {
                let rk = self.slot(r, k);
                let m = self.upper[rk] / diag;
                self.upper[rk] = 0.0;
                self.multipliers[k * kl + (r - k - 1)] = m;
                if m != 0.0 {
                    for j in k + 1..=last_col {
                        let kj = self.upper[self.slot(k, j)];
                        let rj = self.slot(r, j);
                        self.upper[rj] -= m * kj;
                    }
                }
            }
        }
        Ok(())
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let mut x = rhs.to_vec();
        self.solve_in_place(&mut x);
        x
    }

    pub fn solve_in_place(&self, x: &mut [f64]) {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        assert_eq!(x.len(), n);
        for k in 0..n {
            let p = self.pivots[k];
            if p != k {
                x.swap(k, p);
            }
            let xk = x[k];
            for r in k + 1..=(k + kl).min(n.saturating_sub(1)) {
                x[r] -= self.multipliers[k * kl + (r - k - 1)] * xk;
            }
        }
        for k in (0..n).rev() {
            let mut acc = x[k];
            for j in k + 1..=(k + kl + ku).min(n - 1) {
                acc -= self.upper[self.slot(k, j)] * x[j];
            }
            x[k] = acc / self.upper[self.slot(k, k)];
        }
    }
}
