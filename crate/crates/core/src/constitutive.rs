//! The one-dimensional strain-limiting response
//!
//! ```text
//! eps = f(sigma) = sigma / (1 + (b |sigma|)^a)^(1/a)
//! ```
//!
//! together with its first three stress derivatives and the local wave speed
//! `c = 1 / sqrt(rho f'(sigma))`.
//!
//! With `q = (b |sigma|)^a` and `D = 1 + q`:
//!
//! ```text
//! f'   = D^-(1 + 1/a)
//! f''  = -(a + 1) b^a |sigma|^(a-1) sgn(sigma) D^-(2 + 1/a)
//! f''' = -(a + 1) b^a |sigma|^(a-2) D^-(3 + 1/a) [(a - 1) - (a + 2) q]
//! ```
//!
//! `|sigma|` raised to a negative power is replaced by
//! `sqrt(sigma^2 + reg_eta^2)`; every other factor is evaluated exactly.

use libm::{expm1, fabs, log1p, pow, sqrt};

use crate::error::Error;
use crate::Result;

/// Material constants of the strain-limiting law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialParams {
    /// Mass density.
    pub rho: f64,
    /// Magnitude of the nonlinearity (1/stress). Strain is bounded by `1/b`.
    pub b: f64,
    /// Exponent of the nonlinearity.
    pub a: f64,
    /// Regularization width for `|sigma|` near zero.
    pub reg_eta: f64,
}

impl MaterialParams {
    pub const DEFAULT_REG_ETA: f64 = 1e-8;

    pub fn new(rho: f64, b: f64, a: f64) -> Result<Self> {
        let p = Self {
            rho,
            b,
            a,
            reg_eta: Self::DEFAULT_REG_ETA,
        };
        p.validate()?;
        Ok(p)
    }

    /// Linear elastic material (`eps = sigma`).
    pub fn linear(rho: f64) -> Result<Self> {
        Self::new(rho, 0.0, 1.0)
    }

    pub fn with_reg_eta(mut self, reg_eta: f64) -> Result<Self> {
        self.reg_eta = reg_eta;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return Err(Error::invalid(alloc::format!("rho must be positive, got {}", self.rho)));
        }
        if !(self.b >= 0.0 && self.b.is_finite()) {
            return Err(Error::invalid(alloc::format!("b must be non-negative, got {}", self.b)));
        }
        if !(self.a > 0.0 && self.a.is_finite()) {
            return Err(Error::invalid(alloc::format!("a must be positive, got {}", self.a)));
        }
        if !(self.reg_eta >= 0.0 && self.reg_eta.is_finite()) {
            return Err(Error::invalid(alloc::format!(
                "reg_eta must be non-negative, got {}",
                self.reg_eta
            )));
        }
        Ok(())
    }

    pub fn is_linear(&self) -> bool {
        self.b == 0.0
    }

    #[inline]
    fn regularized(&self, sigma: f64) -> f64 {
        sqrt(sigma * sigma + self.reg_eta * self.reg_eta)
    }

    /// Strain `f(sigma)`.
    pub fn strain(&self, sigma: f64) -> f64 {
        if self.b == 0.0 {
            return sigma;
        }
        let q = pow(self.b * fabs(sigma), self.a);
        if q > 1.0 {
            // saturated branch: written so that |f| <= 1/b survives rounding
            let r = pow(1.0 + 1.0 / q, -1.0 / self.a);
            (r / self.b).copysign(sigma)
        } else {
            sigma / pow(1.0 + q, 1.0 / self.a)
        }
    }

    /// Tangent compliance `f'(sigma)`.
    pub fn compliance(&self, sigma: f64) -> f64 {
        if self.b == 0.0 {
            return 1.0;
        }
        let q = pow(self.b * fabs(sigma), self.a);
        pow(1.0 + q, -(1.0 + 1.0 / self.a))
    }

    /// `f''(sigma)`.
    pub fn compliance_slope(&self, sigma: f64) -> f64 {
        if self.b == 0.0 || sigma == 0.0 {
            return 0.0;
        }
        let a = self.a;
        let s = fabs(sigma);
        let q = pow(self.b * s, a);
        let s_eff = if a < 1.0 { self.regularized(sigma) } else { s };
        let mag = (a + 1.0) * pow(self.b, a) * pow(s_eff, a - 1.0) * pow(1.0 + q, -(2.0 + 1.0 / a));
        -mag.copysign(sigma)
    }

    /// `f'''(sigma)`.
    pub fn compliance_curvature(&self, sigma: f64) -> f64 {
        if self.b == 0.0 {
            return 0.0;
        }
        let a = self.a;
        let s = fabs(sigma);
        let q = pow(self.b * s, a);
        let s_eff = if a < 2.0 { self.regularized(sigma) } else { s };
        -(a + 1.0)
            * pow(self.b, a)
            * pow(s_eff, a - 2.0)
            * pow(1.0 + q, -(3.0 + 1.0 / a))
            * ((a - 1.0) - (a + 2.0) * q)
    }

    /// Derivative of the strain of the given order (1, 2 or 3).
    pub fn strain_derivative(&self, sigma: f64, order: u8) -> Result<f64> {
        match order {
            1 => Ok(self.compliance(sigma)),
            2 => Ok(self.compliance_slope(sigma)),
            3 => Ok(self.compliance_curvature(sigma)),
            other => Err(Error::UnsupportedOrder(other)),
        }
    }

    /// Local wave speed `1 / sqrt(rho f'(sigma))`.
    pub fn wave_speed(&self, sigma: f64) -> Result<f64> {
        let slope = self.compliance(sigma);
        if !(slope > 0.0) {
            return Err(Error::HyperbolicityLost {
                sigma,
                slope,
                x: None,
            });
        }
        Ok(1.0 / sqrt(self.rho * slope))
    }

    /// `c(sigma) - 1 / sqrt(rho)` without the cancellation of subtracting
    /// the two speeds, so that tiny departures from the linear speed are
    /// still resolved.
    pub fn wave_speed_deviation(&self, sigma: f64) -> Result<f64> {
        self.hyperbolic_compliance(sigma)?;
        if self.b == 0.0 {
            return Ok(0.0);
        }
        let q = pow(self.b * fabs(sigma), self.a);
        let exponent = 0.5 * (1.0 + 1.0 / self.a);
        Ok(expm1(exponent * log1p(q)) / sqrt(self.rho))
    }

    /// Fails with [`Error::HyperbolicityLost`] unless `f'(sigma) > 0`.
    #[inline]
    pub fn hyperbolic_compliance(&self, sigma: f64) -> Result<f64> {
        let slope = self.compliance(sigma);
        if slope > 0.0 {
            Ok(slope)
        } else {
            Err(Error::HyperbolicityLost {
                sigma,
                slope,
                x: None,
            })
        }
    }
}

/// Outcome of a sampled hyperbolicity check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HyperbolicityReport {
    pub min_slope: f64,
    pub worst_sigma: f64,
    pub passed: bool,
}

/// Sample `slope` on a uniform grid of `n_samples` points over
/// `[sigma_min, sigma_max]` and report its minimum.
pub fn check_hyperbolicity<F>(
    slope: F,
    sigma_min: f64,
    sigma_max: f64,
    n_samples: usize,
) -> Result<HyperbolicityReport>
where
    F: Fn(f64) -> f64,
{
    if !(sigma_min < sigma_max) {
        return Err(Error::invalid("hyperbolicity check needs sigma_min < sigma_max"));
    }
    if n_samples < 2 {
        return Err(Error::invalid("hyperbolicity check needs at least two samples"));
    }
    let step = (sigma_max - sigma_min) / (n_samples - 1) as f64;
    let mut report = HyperbolicityReport {
        min_slope: f64::INFINITY,
        worst_sigma: sigma_min,
        passed: true,
    };
    for i in 0..n_samples {
        let sigma = if i + 1 == n_samples { sigma_max } else { sigma_min + step * i as f64 };
        let value = slope(sigma);
        // NaN counts as a failure
        if !(value >= report.min_slope) {
            report.min_slope = value;
            report.worst_sigma = sigma;
        }
    }
    report.passed = report.min_slope > 0.0;
    Ok(report)
}

/// Check `f'(sigma) > 0` for the material over a stress range.
pub fn verify_hyperbolicity(
    sigma_min: f64,
    sigma_max: f64,
    n_samples: usize,
    params: &MaterialParams,
) -> Result<HyperbolicityReport> {
    check_hyperbolicity(|s| params.compliance(s), sigma_min, sigma_max, n_samples)
}
