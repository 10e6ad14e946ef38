//! Skew exponential power distribution in the quantile parametrization:
//! the location `mu` is the `tau`-level quantile.

use std::f64::consts::LN_2;

use rand::Rng;
use rand_distr::{Distribution, Gamma as GammaDistr};

use crate::error::{domain, Result};
use crate::special::{gamma_p_inv, gamma_pq, gamma_q_inv, ln_gamma};

/// Parameters `(mu, sigma, alpha, tau)` of the SEP family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SepParams {
    /// Location; equals the `tau`-quantile.
    pub mu: f64,
    pub sigma: f64,
    /// Tail shape. `1` gives an asymmetric-Laplace shape, `2` a skew normal.
    pub alpha: f64,
    /// Skewness, also the quantile level of `mu`.
    pub tau: f64,
}

/// `ln kappa(alpha)` with `kappa = [2 alpha^{1/alpha} Gamma(1 + 1/alpha)]^{-1}`.
pub fn ln_kappa(alpha: f64) -> f64 {
    -(LN_2 + alpha.ln() / alpha + ln_gamma(1.0 + 1.0 / alpha))
}

impl SepParams {
    pub fn new(mu: f64, sigma: f64, alpha: f64, tau: f64) -> Result<Self> {
        let params = Self {
            mu,
            sigma,
            alpha,
            tau,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.mu.is_finite() {
            return domain(format!("mu must be finite, got {}", self.mu));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return domain(format!("sigma must be positive, got {}", self.sigma));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return domain(format!("alpha must be positive, got {}", self.alpha));
        }
        if !(self.tau > 0.0 && self.tau < 1.0) {
            return domain(format!("tau must lie in (0, 1), got {}", self.tau));
        }
        Ok(())
    }

    fn kernel(&self) -> SepKernel {
        SepKernel::new(self.sigma, self.alpha, self.tau)
    }

    pub fn log_pdf(&self, y: f64) -> Result<f64> {
        self.validate()?;
        if !y.is_finite() {
            return domain(format!("log_pdf needs a finite argument, got {y}"));
        }
        Ok(self.kernel().log_density(y - self.mu))
    }

    /// Closed-form CDF through the regularized incomplete gamma function.
    pub fn cdf(&self, y: f64) -> Result<f64> {
        self.validate()?;
        if y.is_nan() {
            return domain("cdf argument is NaN");
        }
        let shape = 1.0 / self.alpha;
        if y <= self.mu {
            if y == f64::NEG_INFINITY {
                return Ok(0.0);
            }
            let z = self.gamma_argument(self.mu - y, self.tau);
            Ok(self.tau * gamma_pq(shape, z).1)
        } else {
            if y == f64::INFINITY {
                return Ok(1.0);
            }
            let z = self.gamma_argument(y - self.mu, 1.0 - self.tau);
            let (p, q) = gamma_pq(shape, z);
            if p < 0.5 {
                Ok(self.tau + (1.0 - self.tau) * p)
            } else {
                Ok(1.0 - (1.0 - self.tau) * q)
            }
        }
    }

    /// `((|y - mu|) / (2 c sigma))^alpha / alpha`, the gamma-scale distance.
    fn gamma_argument(&self, distance: f64, side: f64) -> f64 {
        let scaled = distance / (2.0 * side * self.sigma);
        (self.alpha * scaled.ln()).exp() / self.alpha
    }

    fn distance_from_gamma(&self, z: f64, side: f64) -> f64 {
        // inverse of gamma_argument
        2.0 * side * self.sigma * ((self.alpha * z).ln() / self.alpha).exp()
    }

    /// Inverse CDF; `quantile(tau) == mu` exactly.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        self.validate()?;
        if !(p > 0.0 && p < 1.0) {
            return domain(format!("quantile level must lie in (0, 1), got {p}"));
        }
        let shape = 1.0 / self.alpha;
        if p == self.tau {
            return Ok(self.mu);
        }
        if p < self.tau {
            let z = gamma_q_inv(shape, p / self.tau);
            Ok(self.mu - self.distance_from_gamma(z, self.tau))
        } else {
            let target = (p - self.tau) / (1.0 - self.tau);
            let z = if target < 0.5 {
                gamma_p_inv(shape, target)
            } else {
                gamma_q_inv(shape, (1.0 - p) / (1.0 - self.tau))
            };
            Ok(self.mu + self.distance_from_gamma(z, 1.0 - self.tau))
        }
    }

    /// Single exact draw by the gamma transform: `|Y - mu| / (2 c sigma)` is
    /// distributed as `(alpha G)^{1/alpha}` with `G ~ Gamma(1/alpha, 1)`, and
    /// the left branch is taken with probability `tau`.
    pub fn sample_one<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let gamma = GammaDistr::new(1.0 / self.alpha, 1.0).expect("validated shape");
        let u: f64 = rng.random();
        let g: f64 = gamma.sample(rng);
        let x = if g > 0.0 {
            ((self.alpha.ln() + g.ln()) / self.alpha).exp()
        } else {
            0.0
        };
        if u <= self.tau {
            self.mu - 2.0 * self.tau * self.sigma * x
        } else {
            self.mu + 2.0 * (1.0 - self.tau) * self.sigma * x
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Vec<f64>> {
        self.validate()?;
        if n == 0 {
            return domain("sample size must be at least 1");
        }
        Ok((0..n).map(|_| self.sample_one(rng)).collect())
    }
}

pub fn sep_log_pdf(y: f64, params: &SepParams) -> Result<f64> {
    params.log_pdf(y)
}

pub fn sep_cdf(y: f64, params: &SepParams) -> Result<f64> {
    params.cdf(y)
}

pub fn sep_quantile(p: f64, params: &SepParams) -> Result<f64> {
    params.quantile(p)
}

pub fn sep_sample<R: Rng + ?Sized>(params: &SepParams, n: usize, rng: &mut R) -> Result<Vec<f64>> {
    params.sample(n, rng)
}

/// SEP log-density as a function of the residual `y - mu`, with the
/// parameter-only terms precomputed. Used inside likelihood loops.
#[derive(Debug, Clone, Copy)]
pub struct SepKernel {
    log_norm: f64,
    alpha: f64,
    inv_alpha: f64,
    ln_inv_left: f64,
    ln_inv_right: f64,
}

impl SepKernel {
    /// Arguments are assumed valid (`sigma > 0`, `alpha > 0`, `0 < tau < 1`).
    pub fn new(sigma: f64, alpha: f64, tau: f64) -> Self {
        Self {
            log_norm: ln_kappa(alpha) - sigma.ln(),
            alpha,
            inv_alpha: 1.0 / alpha,
            ln_inv_left: -(2.0 * tau * sigma).ln(),
            ln_inv_right: -(2.0 * (1.0 - tau) * sigma).ln(),
        }
    }

    /// `ln kappa - ln sigma`, the density value at the kink.
    pub fn log_norm(&self) -> f64 {
        self.log_norm
    }

    #[inline]
    pub fn log_density(&self, residual: f64) -> f64 {
        if residual == 0.0 {
            return self.log_norm;
        }
        let ln_scaled = if residual < 0.0 {
            (-residual).ln() + self.ln_inv_left
        } else {
            residual.ln() + self.ln_inv_right
        };
        self.log_norm - self.inv_alpha * (self.alpha * ln_scaled).exp()
    }

    pub fn log_likelihood<I: IntoIterator<Item = f64>>(&self, residuals: I) -> f64 {
        residuals.into_iter().map(|r| self.log_density(r)).sum()
    }
}
