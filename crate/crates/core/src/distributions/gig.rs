//! Generalized inverse Gaussian distribution.
//!
//! Kernel `x^(p-1) exp{-(chi / x + psi x) / 2}` on `x > 0`. Sampling follows
//! Hörmann & Leydold (2014): ratio-of-uniforms with or without mode shift in
//! the T-concave region, and a piecewise constant/power/exponential hat for
//! the remaining corner `0 <= p < 1`, small `sqrt(chi psi)`.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Gamma as GammaDistr};

use crate::error::{domain, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GigParams {
    /// Index.
    pub p: f64,
    /// Coefficient of `1/x` in the exponent.
    pub chi: f64,
    /// Coefficient of `x` in the exponent.
    pub psi: f64,
}

impl GigParams {
    pub fn new(p: f64, chi: f64, psi: f64) -> Result<Self> {
        let params = Self { p, chi, psi };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        let Self { p, chi, psi } = *self;
        if !p.is_finite() || !(chi >= 0.0) || !(psi >= 0.0) || !chi.is_finite() || !psi.is_finite() {
            return domain(format!("invalid GIG parameters p={p}, chi={chi}, psi={psi}"));
        }
        if p <= 0.0 && chi <= 0.0 {
            return domain(format!("GIG with p={p} <= 0 needs chi > 0"));
        }
        if p >= 0.0 && psi <= 0.0 {
            return domain(format!("GIG with p={p} >= 0 needs psi > 0"));
        }
        Ok(())
    }

    pub fn log_kernel(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return f64::NEG_INFINITY;
        }
        (self.p - 1.0) * x.ln() - 0.5 * (self.chi / x + self.psi * x)
    }

    /// One exact draw. Parameters are assumed valid.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let Self { p, chi, psi } = *self;
        let omega = chi.sqrt() * psi.sqrt();
        if chi == 0.0 || omega == 0.0 && p > 0.0 {
            // Gamma(p, rate psi / 2)
            return GammaDistr::new(p, 2.0 / psi).expect("p > 0").sample(rng);
        }
        if psi == 0.0 || omega == 0.0 {
            // inverse gamma(-p, scale chi / 2)
            let g: f64 = GammaDistr::new(-p, 1.0).expect("p < 0").sample(rng);
            return 0.5 * chi / g;
        }
        let lambda = p.abs();
        let scale = (chi / psi).sqrt();
        let x = if lambda > 2.0 || omega > 3.0 {
            rou_shift(rng, lambda, omega)
        } else if lambda >= 1.0 - 2.25 * omega * omega || omega > 0.2 {
            rou_no_shift(rng, lambda, omega)
        } else {
            concave_corner(rng, lambda, omega)
        };
        // a negative index is the reciprocal of the positive one
        if p < 0.0 {
            scale / x
        } else {
            scale * x
        }
    }
}

pub fn gig_sample<R: Rng + ?Sized>(params: &GigParams, rng: &mut R) -> Result<f64> {
    params.validate()?;
    Ok(params.sample(rng))
}

/// Mode of the standardized density `x^(lambda-1) exp(-omega (x + 1/x) / 2)`.
fn standard_mode(lambda: f64, omega: f64) -> f64 {
    let mode = if lambda >= 1.0 {
        (((lambda - 1.0).powi(2) + omega * omega).sqrt() + (lambda - 1.0)) / omega
    } else {
        omega / (((1.0 - lambda).powi(2) + omega * omega).sqrt() + (1.0 - lambda))
    };
    mode.max(f64::MIN_POSITIVE)
}

fn rou_no_shift<R: Rng + ?Sized>(rng: &mut R, lambda: f64, omega: f64) -> f64 {
    let t = 0.5 * (lambda - 1.0);
    let s = 0.25 * omega;
    let xm = standard_mode(lambda, omega);
    let nc = t * xm.ln() - s * (xm + 1.0 / xm);
    let ym = ((lambda + 1.0) + ((lambda + 1.0).powi(2) + omega * omega).sqrt()) / omega;
    let um = (0.5 * (lambda + 1.0) * ym.ln() - s * (ym + 1.0 / ym) - nc).exp();
    loop {
        let u = um * rng.random::<f64>();
        let v: f64 = rng.random();
        let x = u / v;
        if x > 0.0 && v.ln() <= t * x.ln() - s * (x + 1.0 / x) - nc {
            return x;
        }
    }
}

fn rou_shift<R: Rng + ?Sized>(rng: &mut R, lambda: f64, omega: f64) -> f64 {
    let t = 0.5 * (lambda - 1.0);
    let s = 0.25 * omega;
    let xm = standard_mode(lambda, omega);
    let nc = t * xm.ln() - s * (xm + 1.0 / xm);

    // roots of the cubic y^3 + a y^2 + b y + c = 0 bracket the mode
    let a = -(2.0 * (lambda + 1.0) / omega + xm);
    let b = 2.0 * (lambda - 1.0) * xm / omega - 1.0;
    let c = xm;
    let p = b - a * a / 3.0;
    let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    let fi = (-q / (2.0 * (-(p * p * p) / 27.0).sqrt())).clamp(-1.0, 1.0).acos();
    let fak = 2.0 * (-p / 3.0).sqrt();
    let y1 = fak * (fi / 3.0).cos() - a / 3.0;
    let y2 = fak * (fi / 3.0 + 4.0 / 3.0 * PI).cos() - a / 3.0;

    let uplus = (y1 - xm) * (t * y1.ln() - s * (y1 + 1.0 / y1) - nc).exp();
    let uminus = (y2 - xm) * (t * y2.ln() - s * (y2 + 1.0 / y2) - nc).exp();
    loop {
        let u = uminus + rng.random::<f64>() * (uplus - uminus);
        let v: f64 = rng.random();
        let x = u / v + xm;
        if x > 0.0 && v.ln() <= t * x.ln() - s * (x + 1.0 / x) - nc {
            return x;
        }
    }
}

/// Rejection from a three-piece hat for `0 <= lambda < 1` and small `omega`,
/// where the density is not T-concave.
fn concave_corner<R: Rng + ?Sized>(rng: &mut R, lambda: f64, omega: f64) -> f64 {
    let xm = standard_mode(lambda, omega);
    let x0 = omega / (1.0 - lambda);
    let k0 = ((lambda - 1.0) * xm.ln() - 0.5 * omega * (xm + 1.0 / xm)).exp();
    let a0 = k0 * x0;

    let (k1, a1, k2, a2);
    if x0 >= 2.0 / omega {
        k1 = 0.0;
        a1 = 0.0;
        k2 = x0.powf(lambda - 1.0);
        a2 = k2 * 2.0 * (-omega * x0 / 2.0).exp() / omega;
    } else {
        k1 = (-omega).exp();
        a1 = if lambda == 0.0 {
            k1 * (2.0 / (omega * omega)).ln()
        } else {
            k1 / lambda * ((2.0 / omega).powf(lambda) - x0.powf(lambda))
        };
        k2 = (2.0 / omega).powf(lambda - 1.0);
        a2 = k2 * 2.0 * (-1.0f64).exp() / omega;
    }
    let total = a0 + a1 + a2;
    let tail_start = x0.max(2.0 / omega);

    loop {
        let mut v = total * rng.random::<f64>();
        let (x, hx);
        if v <= a0 {
            x = x0 * v / a0;
            hx = k0;
        } else {
            v -= a0;
            if v <= a1 {
                if lambda == 0.0 {
                    x = omega * (omega.exp() * v).exp();
                    hx = k1 / x;
                } else {
                    x = (x0.powf(lambda) + lambda / k1 * v).powf(1.0 / lambda);
                    hx = k1 * x.powf(lambda - 1.0);
                }
            } else {
                v -= a1;
                x = -2.0 / omega
                    * ((-omega / 2.0 * tail_start).exp() - omega / (2.0 * k2) * v).ln();
                hx = k2 * (-omega / 2.0 * x).exp();
            }
        }
        let u = rng.random::<f64>() * hx;
        if x > 0.0 && u.ln() <= (lambda - 1.0) * x.ln() - omega / 2.0 * (x + 1.0 / x) {
            return x;
        }
    }
}
