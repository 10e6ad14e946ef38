//! Adaptive independence proposals: a multivariate Gaussian for coefficient
//! blocks and a univariate Normal for the scalar blocks.

use nalgebra::{Cholesky, DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{check_dim, Error, Result};

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Diagonal jitter added after every covariance update.
pub const COVARIANCE_JITTER: f64 = 1e-10;

/// Vanishing adaptation step `1 / (c sqrt(i))`.
pub fn varsigma(i: u64, c: f64) -> f64 {
    1.0 / (c * (i as f64).sqrt())
}

/// How the proposal covariance absorbs a new state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CovarianceUpdate {
    /// `S <- S + s (x - m)(x - m)'`: pure accumulation, no decay of the old
    /// covariance.
    Accumulate,
    /// `S <- S + s ((x - m)(x - m)' - S)`: stochastic-approximation estimate of
    /// the target covariance.
    #[default]
    RobbinsMonro,
}

impl std::str::FromStr for CovarianceUpdate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "accumulate" => Ok(Self::Accumulate),
            "robbins-monro" | "robbins_monro" => Ok(Self::RobbinsMonro),
            other => Err(Error::Domain(format!("unknown covariance update `{other}`"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct GaussianProposal {
    mean: DVector<f64>,
    cov: DMatrix<f64>,
    chol: DMatrix<f64>,
    log_det: f64,
}

impl GaussianProposal {
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        check_dim(mean.len(), cov.nrows(), "proposal covariance rows")?;
        check_dim(mean.len(), cov.ncols(), "proposal covariance columns")?;
        let (chol, log_det) = factor(&cov)
            .ok_or_else(|| Error::Domain("proposal covariance is not positive definite".into()))?;
        Ok(Self {
            mean,
            cov,
            chol,
            log_det,
        })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    /// Lower Cholesky factor of the covariance.
    pub fn chol(&self) -> &DMatrix<f64> {
        &self.chol
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> DVector<f64> {
        let z = DVector::from_fn(self.dim(), |_, _| rng.sample::<f64, _>(StandardNormal));
        &self.mean + &self.chol * z
    }

    pub fn log_density(&self, x: &DVector<f64>) -> f64 {
        let diff = x - &self.mean;
        let w = self
            .chol
            .solve_lower_triangular(&diff)
            .expect("Cholesky factor has a positive diagonal");
        -0.5 * (self.dim() as f64 * LN_2PI + self.log_det + w.norm_squared())
    }

    /// One step of the mean/covariance recursions with step `step`, using the
    /// pre-update mean in both. A covariance update that fails the
    /// positive-definiteness check is discarded and the last valid one kept.
    pub fn adapt(&mut self, x: &DVector<f64>, step: f64, mode: CovarianceUpdate) -> bool {
        if !x.iter().all(|v| v.is_finite()) {
            return false;
        }
        let diff = x - &self.mean;
        let mut cov = match mode {
            CovarianceUpdate::Accumulate => &self.cov + step * &diff * diff.transpose(),
            CovarianceUpdate::RobbinsMonro => {
                &self.cov + step * (&diff * diff.transpose() - &self.cov)
            }
        };
        self.mean += step * &diff;
        for i in 0..cov.nrows() {
            cov[(i, i)] += COVARIANCE_JITTER;
        }
        // keep the matrix exactly symmetric
        let cov = 0.5 * (&cov + cov.transpose());
        match factor(&cov) {
            Some((chol, log_det)) => {
                self.cov = cov;
                self.chol = chol;
                self.log_det = log_det;
                true
            }
            None => false,
        }
    }
}

fn factor(cov: &DMatrix<f64>) -> Option<(DMatrix<f64>, f64)> {
    if !cov.iter().all(|v| v.is_finite()) {
        return None;
    }
    let chol = Cholesky::new(cov.clone())?;
    let l = chol.l();
    let log_det = 2.0 * l.diagonal().iter().map(|d| d.ln()).sum::<f64>();
    if !log_det.is_finite() {
        return None;
    }
    Some((l, log_det))
}

/// Univariate Normal proposal with adapted mean and variance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarProposal {
    pub mean: f64,
    pub var: f64,
}

impl ScalarProposal {
    pub fn new(mean: f64, var: f64) -> Self {
        Self { mean, var }
    }

    pub fn sd(&self) -> f64 {
        self.var.sqrt()
    }

    pub fn adapt(&mut self, x: f64, step: f64, mode: CovarianceUpdate) {
        let diff = x - self.mean;
        let var = match mode {
            CovarianceUpdate::Accumulate => self.var + step * diff * diff,
            CovarianceUpdate::RobbinsMonro => self.var + step * (diff * diff - self.var),
        };
        self.mean += step * diff;
        if var.is_finite() && var > 0.0 {
            self.var = var + COVARIANCE_JITTER;
        }
    }
}
