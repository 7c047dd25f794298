//! Gauss-Legendre quadrature on the reference interval `[-1, 1]`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::Error;
use crate::Result;

pub const MAX_GAUSS_POINTS: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Length of the reference interval, which the weights sum to.
    pub const REFERENCE_LENGTH: f64 = 2.0;

    /// Integrate `f` over `[lo, hi]` by mapping the rule affinely.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, lo: f64, hi: f64) -> f64 {
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(&xi, &w)| w * f(mid + half * xi))
            .sum::<f64>()
            * half
    }
}

/// Legendre polynomial `P_n(x)` and its derivative by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// `n`-point Gauss-Legendre rule, exact for polynomials of degree `2n - 1`.
pub fn gauss_rule(n: usize) -> Result<QuadratureRule> {
    if !(1..=MAX_GAUSS_POINTS).contains(&n) {
        return Err(Error::invalid(alloc::format!(
            "gauss rule needs 1..={MAX_GAUSS_POINTS} points, got {n}"
        )));
    }
    if n == 1 {
        return Ok(QuadratureRule {
            points: vec![0.0],
            weights: vec![2.0],
        });
    }
    let mut points = vec![0.0; n];
    let mut weights = vec![0.0; n];
    // roots are symmetric; solve for the upper half
    for i in 0..n.div_ceil(2) {
        let mut x = libm::cos(PI * (i as f64 + 0.75) / (n as f64 + 0.5));
        for _ in 0..100 {
            let (p, dp) = legendre(n, x);
            let dx = p / dp;
            x -= dx;
            if libm::fabs(dx) < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        points[i] = -x;
        points[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        points[n / 2] = 0.0;
    }
    Ok(QuadratureRule { points, weights })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_point_rule() {
        let q = gauss_rule(1).unwrap();
        assert_eq!(q.points, vec![0.0]);
        assert_eq!(q.weights, vec![QuadratureRule::REFERENCE_LENGTH]);
    }

    #[test]
    fn two_points_integrate_square_on_unit_interval() {
        let q = gauss_rule(2).unwrap();
        let v = q.integrate(|x| x * x, 0.0, 1.0);
        assert!((v - 1.0 / 3.0).abs() <= 1e-15, "{v}");
    }

    #[test]
    fn three_points_are_exact_for_quintics() {
        let q = gauss_rule(3).unwrap();
        let v = q.integrate(|x| x.powi(5), 0.0, 1.0);
        assert!((v - 1.0 / 6.0).abs() <= 1e-15, "{v}");
    }

    #[test]
    fn every_rule_is_exact_to_its_degree() {
        for n in 1..=MAX_GAUSS_POINTS {
            let q = gauss_rule(n).unwrap();
            assert!(q.weights.iter().all(|&w| w > 0.0));
            let total: f64 = q.weights.iter().sum();
            assert!((total - 2.0).abs() < 1e-14);
            for deg in 0..2 * n {
                let got = q.integrate(|x| x.powi(deg as i32), 0.0, 1.0);
                let exact = 1.0 / (deg as f64 + 1.0);
                assert!((got - exact).abs() < 1e-14, "n={n} deg={deg}: {got} vs {exact}");
            }
            // and not beyond it
            let deg = 2 * n;
            let got = q.integrate(|x| x.powi(deg as i32), -1.0, 1.0);
            let exact = 2.0 / (deg as f64 + 1.0);
            assert!((got - exact).abs() > 1e-10);
        }
    }

    #[test]
    fn out_of_range_counts_are_rejected() {
        assert!(gauss_rule(0).is_err());
        assert!(gauss_rule(11).is_err());
    }
}
