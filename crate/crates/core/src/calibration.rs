//! Least-squares identification of `(b, a)` from stress-strain data.
//!
//! The fit runs Levenberg-Marquardt on `(ln b, ln a)`, which keeps both
//! parameters positive without explicit bounds. A step is only accepted if
//! it lowers the sum of squared strain errors, so the result is never worse
//! than the starting point.

use alloc::string::String;
use alloc::vec::Vec;

use libm::{exp, fabs, log, log1p};

use crate::constitutive::MaterialParams;
use crate::error::Error;
use crate::Result;

/// Paired `(stress, strain)` observations.
#[derive(Debug, Clone, PartialEq)]
pub struct StressStrainDataset {
    points: Vec<(f64, f64)>,
    label: String,
}

impl StressStrainDataset {
    pub fn new(points: Vec<(f64, f64)>, label: impl Into<String>) -> Result<Self> {
        if points.len() < 3 {
            return Err(Error::InvalidDataset(alloc::format!(
                "need at least 3 points, got {}",
                points.len()
            )));
        }
        if let Some(i) = points.iter().position(|(s, e)| !s.is_finite() || !e.is_finite()) {
            return Err(Error::InvalidDataset(alloc::format!("non-finite value in point {i}")));
        }
        let first = points[0].0;
        if points.iter().all(|&(s, _)| s == first) {
            return Err(Error::InvalidDataset("all stresses are identical".into()));
        }
        Ok(Self {
            points,
            label: label.into(),
        })
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub b: f64,
    pub a: f64,
    /// Sum of squared strain errors.
    pub sse: f64,
    /// `1 - SSE / SST` over the strains.
    pub r2: f64,
    pub iterations: usize,
    /// False when `max_iters` ran out; the parameters are the best found.
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitSettings {
    pub max_iters: usize,
    /// Relative change in SSE and parameters below which the fit stops.
    pub tol: f64,
}

impl Default for FitSettings {
    fn default() -> Self {
        Self {
            max_iters: 500,
            tol: 1e-12,
        }
    }
}

fn model(b: f64, a: f64) -> MaterialParams {
    MaterialParams {
        rho: 1.0,
        b,
        a,
        reg_eta: MaterialParams::DEFAULT_REG_ETA,
    }
}

/// Sum of squared strain residuals of the law with parameters `(b, a)`.
pub fn sse_objective(b: f64, a: f64, data: &StressStrainDataset) -> f64 {
    let m = model(b, a);
    data.points
        .iter()
        .map(|&(s, e)| {
            let r = e - m.strain(s);
            r * r
        })
        .sum()
}

/// Coefficient of determination for a given SSE.
pub fn r_squared(sse: f64, data: &StressStrainDataset) -> f64 {
    let n = data.len() as f64;
    let mean = data.points.iter().map(|p| p.1).sum::<f64>() / n;
    let sst: f64 = data.points.iter().map(|p| (p.1 - mean) * (p.1 - mean)).sum();
    if sst > 0.0 {
        1.0 - sse / sst
    } else if sse == 0.0 {
        1.0
    } else {
        f64::NEG_INFINITY
    }
}

/// `ln(1 + e^x)` without overflow.
fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + log1p(exp(-x))
    } else {
        log1p(exp(x))
    }
}

/// Derivatives of `f(sigma)` with respect to `ln b` and `ln a`.
fn strain_sensitivities(sigma: f64, b: f64, a: f64) -> (f64, f64) {
    let s = fabs(sigma);
    if s == 0.0 || b == 0.0 {
        return (0.0, 0.0);
    }
    let log_bs = log(b * s);
    let lq = a * log_bs;
    let log_d = softplus(lq);
    // q / (1 + q)
    let w = 1.0 / (1.0 + exp(-lq));
    let f = sigma * exp(-log_d / a);
    (-f * w, f * (log_d / a - w * log_bs))
}

const LOG_BOUNDS: (f64, f64) = (-40.0, 40.0);
const LOG_A_BOUNDS: (f64, f64) = (-7.0, 6.0);

/// Fit `(b, a)` starting from `init`.
pub fn fit_material(data: &StressStrainDataset, init: (f64, f64), settings: FitSettings) -> Result<FitResult> {
    let (b0, a0) = init;
    if !(b0 >= 0.0 && b0.is_finite() && a0 > 0.0 && a0.is_finite()) {
        return Err(Error::invalid(alloc::format!(
            "initial guess must satisfy b >= 0, a > 0, got ({b0}, {a0})"
        )));
    }
    if settings.max_iters == 0 || !(settings.tol > 0.0) {
        return Err(Error::invalid("fit needs max_iters >= 1 and tol > 0"));
    }

    let init_sse = sse_objective(b0, a0, data);
    // b = 0 has no logarithm; start slightly inside the domain if that is no worse
    let mut theta = [
        log(b0.max(1e-12)).clamp(LOG_BOUNDS.0, LOG_BOUNDS.1),
        log(a0).clamp(LOG_A_BOUNDS.0, LOG_A_BOUNDS.1),
    ];
    let params = |t: &[f64; 2]| (exp(t[0]), exp(t[1]));
    let mut sse = {
        let (b, a) = params(&theta);
        sse_objective(b, a, data)
    };
    let mut best_is_init = false;
    if !(sse <= init_sse) {
        best_is_init = true;
    }

    let mut lambda = 1e-3;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < settings.max_iters {
        iterations += 1;
        let (b, a) = params(&theta);
        let m = model(b, a);
        // normal equations of the linearized problem
        let (mut jtj, mut jtr) = ([[0.0; 2]; 2], [0.0; 2]);
        for &(s, e) in &data.points {
            let r = e - m.strain(s);
            let (d0, d1) = strain_sensitivities(s, b, a);
            jtj[0][0] += d0 * d0;
            jtj[0][1] += d0 * d1;
            jtj[1][1] += d1 * d1;
            jtr[0] += d0 * r;
            jtr[1] += d1 * r;
        }
        jtj[1][0] = jtj[0][1];
        let grad_norm = fabs(jtr[0]) + fabs(jtr[1]);
        if grad_norm <= 1e-15 * (1.0 + sse) || sse == 0.0 {
            converged = true;
            break;
        }

        let mut accepted = false;
        for _ in 0..60 {
            let a00 = jtj[0][0] * (1.0 + lambda) + 1e-300;
            let a11 = jtj[1][1] * (1.0 + lambda) + 1e-300;
            let a01 = jtj[0][1];
            let det = a00 * a11 - a01 * a01;
            if !(det.is_finite() && det > 0.0) {
                lambda *= 10.0;
                continue;
            }
            let step = [(a11 * jtr[0] - a01 * jtr[1]) / det, (a00 * jtr[1] - a01 * jtr[0]) / det];
            let trial = [
                (theta[0] + step[0]).clamp(LOG_BOUNDS.0, LOG_BOUNDS.1),
                (theta[1] + step[1]).clamp(LOG_A_BOUNDS.0, LOG_A_BOUNDS.1),
            ];
            let (tb, ta) = params(&trial);
            let trial_sse = sse_objective(tb, ta, data);
            if trial_sse < sse {
                let rel_change = (sse - trial_sse) / sse.max(f64::MIN_POSITIVE);
                let step_size = fabs(trial[0] - theta[0]) + fabs(trial[1] - theta[1]);
                theta = trial;
                sse = trial_sse;
                lambda = (lambda / 3.0).max(1e-12);
                accepted = true;
                if rel_change < settings.tol && step_size < 1e-8 {
                    converged = true;
                }
                break;
            }
            lambda *= 4.0;
            if lambda > 1e16 {
                break;
            }
        }
        if !accepted {
            // no descent direction left at working precision
            converged = true;
            break;
        }
        if converged {
            break;
        }
    }

    let (b, a) = params(&theta);
    let (b, a, sse) = if best_is_init && sse > init_sse { (b0, a0, init_sse) } else { (b, a, sse) };
    Ok(FitResult {
        b,
        a,
        sse,
        r2: r_squared(sse, data),
        iterations,
        converged,
    })
}

/// Noiseless samples of the model at `n` equispaced stresses in `[0, sigma_max]`.
pub fn synthetic_dataset(b: f64, a: f64, n: usize, sigma_max: f64, label: &str) -> Result<StressStrainDataset> {
    if n < 3 || !(sigma_max > 0.0) || !sigma_max.is_finite() {
        return Err(Error::InvalidDataset(alloc::format!(
            "need n >= 3 and a positive stress range, got n={n}, sigma_max={sigma_max}"
        )));
    }
    let m = MaterialParams::new(1.0, b, a)?;
    let pts = (0..n)
        .map(|i| {
            let s = sigma_max * i as f64 / (n - 1) as f64;
            (s, m.strain(s))
        })
        .collect();
    StressStrainDataset::new(pts, label)
}
