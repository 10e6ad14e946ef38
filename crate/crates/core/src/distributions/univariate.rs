//! Densities and samplers for the auxiliary distributions used by the priors,
//! full conditionals and proposals.

use std::f64::consts::LN_2;

use rand::Rng;
use rand_distr::{Beta as BetaDistr, Distribution, Gamma as GammaDistr, StandardNormal};

use crate::error::{domain, Result};
use crate::special::{
    ln_gamma, ln_normal_interval_mass, normal_cdf, normal_ln_pdf, normal_quantile, normal_sf,
};

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        domain(format!("{name} must be positive and finite, got {v}"))
    }
}

/// Gamma with shape/rate parametrization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gamma {
    pub shape: f64,
    pub rate: f64,
}

impl Gamma {
    pub fn new(shape: f64, rate: f64) -> Result<Self> {
        positive("gamma shape", shape)?;
        positive("gamma rate", rate)?;
        Ok(Self { shape, rate })
    }

    pub fn log_pdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return f64::NEG_INFINITY;
        }
        self.shape * self.rate.ln() - ln_gamma(self.shape) + (self.shape - 1.0) * x.ln()
            - self.rate * x
    }

    pub fn mean(&self) -> f64 {
        self.shape / self.rate
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        GammaDistr::new(self.shape, 1.0 / self.rate)
            .expect("validated")
            .sample(rng)
    }
}

/// Inverse gamma with shape/scale: density `b^a / Gamma(a) x^{-a-1} e^{-b/x}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InverseGamma {
    pub shape: f64,
    pub scale: f64,
}

impl InverseGamma {
    pub fn new(shape: f64, scale: f64) -> Result<Self> {
        positive("inverse gamma shape", shape)?;
        positive("inverse gamma scale", scale)?;
        Ok(Self { shape, scale })
    }

    pub fn log_pdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return f64::NEG_INFINITY;
        }
        self.shape * self.scale.ln() - ln_gamma(self.shape) - (self.shape + 1.0) * x.ln()
            - self.scale / x
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let g: f64 = GammaDistr::new(self.shape, 1.0).expect("validated").sample(rng);
        self.scale / g
    }
}

/// Beta(a, b) stretched onto `(0, upper)`; `upper = 1` is the ordinary Beta.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledBeta {
    pub a: f64,
    pub b: f64,
    pub upper: f64,
}

impl ScaledBeta {
    pub fn new(a: f64, b: f64, upper: f64) -> Result<Self> {
        positive("beta a", a)?;
        positive("beta b", b)?;
        positive("beta upper bound", upper)?;
        Ok(Self { a, b, upper })
    }

    pub fn log_pdf(&self, x: f64) -> f64 {
        if !(x > 0.0 && x < self.upper) {
            return f64::NEG_INFINITY;
        }
        let u = x / self.upper;
        ln_gamma(self.a + self.b) - ln_gamma(self.a) - ln_gamma(self.b)
            + (self.a - 1.0) * u.ln()
            + (self.b - 1.0) * (-u).ln_1p()
            - self.upper.ln()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = BetaDistr::new(self.a, self.b).expect("validated").sample(rng);
        self.upper * u
    }
}

/// Exponential with rate parametrization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exponential {
    pub rate: f64,
}

impl Exponential {
    pub fn new(rate: f64) -> Result<Self> {
        positive("exponential rate", rate)?;
        Ok(Self { rate })
    }

    pub fn with_mean(mean: f64) -> Result<Self> {
        positive("exponential mean", mean)?;
        Ok(Self { rate: 1.0 / mean })
    }

    pub fn log_pdf(&self, x: f64) -> f64 {
        if x < 0.0 {
            return f64::NEG_INFINITY;
        }
        self.rate.ln() - self.rate * x
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        -(-u).ln_1p() / self.rate
    }
}

/// Normal with mean and standard deviation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Normal {
    pub mean: f64,
    pub sd: f64,
}

impl Normal {
    pub fn new(mean: f64, sd: f64) -> Result<Self> {
        if !mean.is_finite() {
            return domain(format!("normal mean must be finite, got {mean}"));
        }
        positive("normal sd", sd)?;
        Ok(Self { mean, sd })
    }

    pub fn log_pdf(&self, x: f64) -> f64 {
        normal_ln_pdf((x - self.mean) / self.sd) - self.sd.ln()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let z: f64 = rng.sample(StandardNormal);
        self.mean + self.sd * z
    }
}

/// Normal restricted to `(lower, upper)`, renormalized by its interval mass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncatedNormal {
    pub mean: f64,
    pub sd: f64,
    pub lower: f64,
    pub upper: f64,
    ln_mass: f64,
}

impl TruncatedNormal {
    pub fn new(mean: f64, sd: f64, lower: f64, upper: f64) -> Result<Self> {
        if !mean.is_finite() || !(sd > 0.0) || sd.is_nan() {
            return domain(format!("truncated normal needs finite mean and sd > 0, got ({mean}, {sd})"));
        }
        if !(lower < upper) {
            return domain(format!("empty truncation interval ({lower}, {upper})"));
        }
        let ln_mass = ln_normal_interval_mass((lower - mean) / sd, (upper - mean) / sd);
        if !(ln_mass > f64::NEG_INFINITY) {
            return domain(format!(
                "truncation interval ({lower}, {upper}) carries no mass under N({mean}, {sd}^2)"
            ));
        }
        Ok(Self {
            mean,
            sd,
            lower,
            upper,
            ln_mass,
        })
    }

    /// `ln(Phi((upper - m)/s) - Phi((lower - m)/s))`.
    pub fn ln_mass(&self) -> f64 {
        self.ln_mass
    }

    pub fn log_pdf(&self, x: f64) -> f64 {
        if !(x > self.lower && x < self.upper) {
            return f64::NEG_INFINITY;
        }
        normal_ln_pdf((x - self.mean) / self.sd) - self.sd.ln() - self.ln_mass
    }

    /// Inverse-CDF draw, working on the survival side when the interval sits
    /// in the upper tail.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let a = (self.lower - self.mean) / self.sd;
        let b = (self.upper - self.mean) / self.sd;
        let u: f64 = rng.random();
        let z = if a >= 0.0 {
            let (sa, sb) = (normal_sf(a), normal_sf(b));
            -normal_quantile(sb + u * (sa - sb))
        } else {
            let (pa, pb) = (normal_cdf(a), normal_cdf(b));
            normal_quantile(pa + u * (pb - pa))
        };
        let x = self.mean + self.sd * z.clamp(a, b);
        // keep the draw strictly inside the open interval
        if x <= self.lower {
            self.lower.next_up()
        } else if x >= self.upper {
            self.upper.next_down()
        } else {
            x
        }
    }
}

/// Log-density of a Laplace(0, scale 1/gamma) at `x`.
pub fn laplace_log_pdf(x: f64, gamma: f64) -> f64 {
    gamma.ln() - LN_2 - gamma * x.abs()
}
