//! Data generators, experiment drivers and evaluation metrics for the
//! contaminated-mixture, sparse-regression and nonlinear-curve studies.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Matrix2, Vector2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, StudentT};
use rayon::prelude::*;

use crate::diagnostics::PosteriorDraws;
use crate::error::{check_dim, domain, Error, Result};
use crate::gam::{fitted_quantile, run_gam_sampler, GamModelSpec, SmoothTerm};
use crate::linear_sampler::{run_linear_sampler, BetaPrior, LinearModelSpec, PriorHyper, SamplerSettings};
use crate::special::{normal_quantile, student_t2_quantile};

/// Degrees of freedom of every Student-t error in the studies.
pub const NU: f64 = 2.0;

/// Prior variance of the coefficients in the single-regressor mixture study,
/// which uses a plain Gaussian prior instead of the lasso.
pub const MIXTURE_BETA_VARIANCE: f64 = 100.0;

/// Likelihood used for a fit: SEP with free `alpha`, or the asymmetric
/// Laplace (`alpha = 1`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Sep,
    Ald,
}

impl Method {
    pub const BOTH: [Method; 2] = [Method::Ald, Method::Sep];

    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Sep => "SEP",
            Method::Ald => "ALD",
        }
    }

    pub fn fixed_alpha(&self) -> Option<f64> {
        match self {
            Method::Sep => None,
            Method::Ald => Some(1.0),
        }
    }
}

/// Independent seed for stream `index` of an experiment seeded with `seed`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn median(mut v: Vec<f64>) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

// ---------------------------------------------------------------------------
// contaminated mixture

#[derive(Debug, Clone, PartialEq)]
pub struct MixtureSpec {
    pub weights: [f64; 3],
    /// Component means of `(Y, X)`.
    pub means: [[f64; 2]; 3],
    pub cov: [[f64; 2]; 2],
    pub t: usize,
}

impl Default for MixtureSpec {
    fn default() -> Self {
        Self {
            weights: [0.85, 0.0725, 0.0725],
            means: [[1.0, 0.0], [4.0, 0.0], [-2.0, 0.0]],
            cov: [[1.0, 0.6], [0.6, 1.0]],
            t: 100,
        }
    }
}

impl MixtureSpec {
    /// Weights rescaled to sum to one; the defaults sum to 0.995.
    pub fn probabilities(&self) -> [f64; 3] {
        let total: f64 = self.weights.iter().sum();
        self.weights.map(|w| w / total)
    }

    pub fn validate(&self) -> Result<()> {
        if self.weights.iter().any(|&w| !(w > 0.0 && w.is_finite())) {
            return domain("mixture weights must be positive");
        }
        let c = self.cov;
        if !(c[0][0] > 0.0 && c[0][0] * c[1][1] - c[0][1] * c[1][0] > 0.0 && c[0][1] == c[1][0]) {
            return domain("mixture covariance must be symmetric positive definite");
        }
        if self.t == 0 {
            return Err(Error::Empty("mixture sample size is zero"));
        }
        Ok(())
    }
}

/// Draws `(y, x)`: a component by normalized weight, then the bivariate normal
/// `(Y, X)`.
pub fn gen_mixture_data<R: Rng + ?Sized>(spec: &MixtureSpec, rng: &mut R) -> Result<(DVector<f64>, DVector<f64>)> {
    spec.validate()?;
    let cov = Matrix2::new(spec.cov[0][0], spec.cov[0][1], spec.cov[1][0], spec.cov[1][1]);
    let l = cov.cholesky().expect("validated").l();
    let probs = spec.probabilities();
    let mut y = DVector::zeros(spec.t);
    let mut x = DVector::zeros(spec.t);
    for t in 0..spec.t {
        let comp = mixture_component(&probs, rng.random());
        let z = Vector2::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
        let v = Vector2::new(spec.means[comp][0], spec.means[comp][1]) + l * z;
        y[t] = v[0];
        x[t] = v[1];
    }
    Ok((y, x))
}

/// Component index selected by a uniform draw `u`.
pub fn mixture_component(weights: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (k, w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return k;
        }
    }
    weights.len() - 1
}

/// Design `[1, x]` for the single-regressor fits.
pub fn intercept_design(x: &DVector<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(x.len(), 2, |i, j| if j == 0 { 1.0 } else { x[i] })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixtureFit {
    pub dataset: usize,
    pub tau: f64,
    pub method: Method,
    pub intercept: f64,
    pub slope: f64,
    pub sigma: f64,
    /// `None` for the asymmetric Laplace fit.
    pub alpha: Option<f64>,
}

/// Fits one mixture dataset at one quantile level.
pub fn fit_mixture(
    y: &DVector<f64>,
    x: &DVector<f64>,
    tau: f64,
    method: Method,
    settings: SamplerSettings,
) -> Result<PosteriorDraws> {
    let mut spec = LinearModelSpec::new(intercept_design(x), y.clone(), tau)?;
    spec.names = vec!["intercept".into(), "slope".into()];
    spec.prior.beta = BetaPrior::Gaussian { variance: MIXTURE_BETA_VARIANCE };
    spec.sampler = SamplerSettings {
        fixed_alpha: method.fixed_alpha(),
        ..settings
    };
    run_linear_sampler(&spec)
}

/// Both methods on `datasets` seeded mixture samples at every `tau`.
pub fn run_mixture_experiment(
    mix: &MixtureSpec,
    taus: &[f64],
    datasets: usize,
    seed: u64,
    settings: SamplerSettings,
) -> Result<Vec<MixtureFit>> {
    let jobs: Vec<(usize, f64, Method)> = (0..datasets)
        .flat_map(|d| taus.iter().flat_map(move |&tau| Method::BOTH.map(|m| (d, tau, m))))
        .collect();
    jobs.par_iter()
        .map(|&(d, tau, method)| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, d as u64));
            let (y, x) = gen_mixture_data(mix, &mut rng)?;
            let s = SamplerSettings {
                seed: derive_seed(seed ^ 0x5EED, d as u64),
                ..settings
            };
            let draws = fit_mixture(&y, &x, tau, method, s)?;
            Ok(MixtureFit {
                dataset: d,
                tau,
                method,
                intercept: draws.mean_of("intercept").expect("named column"),
                slope: draws.mean_of("slope").expect("named column"),
                sigma: draws.mean_of("sigma").expect("named column"),
                alpha: method.fixed_alpha().map_or_else(|| draws.mean_of("alpha"), |_| None),
            })
        })
        .collect()
}

// ---------------------------------------------------------------------------
// sparse multiple regression

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Gaussian,
    /// Location-scale Student-t with two degrees of freedom.
    StudentT,
}

impl ErrorKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ErrorKind::Gaussian => "gaussian",
            ErrorKind::StudentT => "student_t",
        }
    }

    /// `tau`-quantile of the standardized innovation.
    pub fn quantile(&self, tau: f64) -> f64 {
        match self {
            ErrorKind::Gaussian => normal_quantile(tau),
            ErrorKind::StudentT => student_t2_quantile(tau),
        }
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            ErrorKind::Gaussian => rng.sample(StandardNormal),
            ErrorKind::StudentT => StudentT::new(NU).expect("valid dof").sample(rng),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegressionSimSpec {
    /// 1 (sparse), 2 (dense) or 3 (very sparse).
    pub sim_id: u8,
    pub error_kind: ErrorKind,
    pub tau: f64,
    pub t: usize,
    pub replicates: usize,
    /// Error scale; the error variance is `scale^2`.
    pub scale: f64,
}

impl RegressionSimSpec {
    pub fn new(sim_id: u8, error_kind: ErrorKind, tau: f64) -> Self {
        Self {
            sim_id,
            error_kind,
            tau,
            t: 200,
            replicates: 10,
            scale: 3.0,
        }
    }

    pub fn beta_true(&self) -> Result<DVector<f64>> {
        let b = match self.sim_id {
            1 => vec![3.0, 1.5, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0],
            2 => vec![0.85; 8],
            3 => vec![5.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
            other => return domain(format!("unknown simulation {other}; expected 1, 2 or 3")),
        };
        Ok(DVector::from_vec(b))
    }

    /// Shift making the `tau`-quantile of the error zero.
    pub fn error_shift(&self) -> f64 {
        -self.scale * self.error_kind.quantile(self.tau)
    }
}

/// Covariance `0.5^|i - j|` of the simulated covariates.
pub fn covariate_cov(p: usize) -> DMatrix<f64> {
    DMatrix::from_fn(p, p, |i, j| 0.5f64.powi((i as i32 - j as i32).abs()))
}

/// Draws `(y, X, beta)` with rows of `X` from `N(0, 0.5^|i-j|)` and errors
/// `scale * e - scale * q_e(tau)`.
pub fn gen_regression_data<R: Rng + ?Sized>(
    spec: &RegressionSimSpec,
    rng: &mut R,
) -> Result<(DVector<f64>, DMatrix<f64>, DVector<f64>)> {
    if !(spec.tau > 0.0 && spec.tau < 1.0) {
        return domain(format!("tau must lie in (0, 1), got {}", spec.tau));
    }
    let beta = spec.beta_true()?;
    let p = beta.len();
    let l = covariate_cov(p).cholesky().expect("positive definite").l();
    let mut x = DMatrix::zeros(spec.t, p);
    for t in 0..spec.t {
        let z = DVector::from_fn(p, |_, _| rng.sample::<f64, _>(StandardNormal));
        x.row_mut(t).copy_from(&(&l * z).transpose());
    }
    let shift = spec.error_shift();
    let eps = DVector::from_fn(spec.t, |_, _| spec.scale * spec.error_kind.draw(rng) + shift);
    let y = &x * &beta + eps;
    Ok((y, x, beta))
}

/// `mean_t |x_t'(beta_hat - beta)|`.
pub fn mmad(beta_hat: &DVector<f64>, beta_true: &DVector<f64>, x: &DMatrix<f64>) -> Result<f64> {
    check_dim(beta_true.len(), beta_hat.len(), "estimated coefficients")?;
    check_dim(x.ncols(), beta_hat.len(), "design columns")?;
    if x.nrows() == 0 {
        return Err(Error::Empty("design has no rows"));
    }
    let d = x * (beta_hat - beta_true);
    Ok(d.iter().map(|v| v.abs()).sum::<f64>() / x.nrows() as f64)
}

/// Median over replicates.
pub fn replicate_mmad(runs: &[f64]) -> Result<f64> {
    if runs.is_empty() {
        return Err(Error::Empty("no replicates"));
    }
    Ok(median(runs.to_vec()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegressionRun {
    pub replicate: usize,
    pub method: Method,
    pub mmad: f64,
    pub beta_hat: Vec<f64>,
    pub alpha: Option<f64>,
}

/// Both methods on every replicate; replicates run in parallel.
pub fn run_regression_experiment(
    spec: &RegressionSimSpec,
    seed: u64,
    settings: SamplerSettings,
    prior: PriorHyper,
) -> Result<Vec<RegressionRun>> {
    let jobs: Vec<(usize, Method)> = (0..spec.replicates)
        .flat_map(|r| Method::BOTH.map(|m| (r, m)))
        .collect();
    jobs.par_iter()
        .map(|&(r, method)| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, r as u64));
            let (y, x, beta) = gen_regression_data(spec, &mut rng)?;
            let mut lin = LinearModelSpec::new(x.clone(), y, spec.tau)?;
            lin.prior = prior;
            lin.sampler = SamplerSettings {
                seed: derive_seed(seed ^ 0x5EED, r as u64),
                fixed_alpha: method.fixed_alpha(),
                ..settings
            };
            let draws = run_linear_sampler(&lin)?;
            let means = draws.means();
            let beta_hat = DVector::from_iterator(beta.len(), means.iter().take(beta.len()).copied());
            Ok(RegressionRun {
                replicate: r,
                method,
                mmad: mmad(&beta_hat, &beta, &x)?,
                beta_hat: beta_hat.as_slice().to_vec(),
                alpha: method.fixed_alpha().map_or_else(|| draws.mean_of("alpha"), |_| None),
            })
        })
        .collect()
}

// ---------------------------------------------------------------------------
// nonlinear curves

/// `4(x - 0.5) + 2 exp(-256 (x - 0.5)^2)` on `(0, 1)`, zero elsewhere.
pub fn wave(x: f64) -> f64 {
    if !(x > 0.0 && x < 1.0) {
        return 0.0;
    }
    4.0 * (x - 0.5) + 2.0 * (-256.0 * (x - 0.5).powi(2)).exp()
}

/// Doppler-type curve with `gamma = 0.15` on `(0, 1)`, zero elsewhere.
pub fn doppler(x: f64) -> f64 {
    const GAMMA: f64 = 0.15;
    if !(x > 0.0 && x < 1.0) {
        return 0.0;
    }
    let u = 0.2 * x;
    (u * (1.0 - u)).sqrt() * (2.0 * PI * (1.0 + GAMMA) / (u + GAMMA)).sin()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Curve {
    Wave,
    Doppler,
}

impl Curve {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Curve::Wave => wave(x),
            Curve::Doppler => doppler(x),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Curve::Wave => "wave",
            Curve::Doppler => "doppler",
        }
    }

    pub fn default_t(&self) -> usize {
        match self {
            Curve::Wave => 200,
            Curve::Doppler => 512,
        }
    }

    pub fn default_sigma(&self) -> f64 {
        match self {
            Curve::Wave => 0.4f64.sqrt(),
            Curve::Doppler => 0.1f64.sqrt(),
        }
    }

    pub fn default_knots(&self) -> usize {
        match self {
            Curve::Wave => 20,
            Curve::Doppler => 25,
        }
    }
}

/// How the noise scale varies with `x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseScale {
    Constant,
    /// `1 + x`.
    Linear,
    /// `1 + x^2`.
    Quadratic,
}

impl NoiseScale {
    pub fn factor(&self, x: f64) -> f64 {
        match self {
            NoiseScale::Constant => 1.0,
            NoiseScale::Linear => 1.0 + x,
            NoiseScale::Quadratic => 1.0 + x * x,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CurveNoise {
    pub scale: NoiseScale,
    pub innovation: ErrorKind,
}

impl CurveNoise {
    pub const GAUSSIAN: Self = Self { scale: NoiseScale::Constant, innovation: ErrorKind::Gaussian };
    pub const STUDENT_T: Self = Self { scale: NoiseScale::Constant, innovation: ErrorKind::StudentT };
    pub const LINEAR_HET: Self = Self { scale: NoiseScale::Linear, innovation: ErrorKind::StudentT };
    pub const QUAD_HET: Self = Self { scale: NoiseScale::Quadratic, innovation: ErrorKind::StudentT };

    pub fn label(&self) -> String {
        match *self {
            Self::GAUSSIAN => "gaussian".into(),
            Self::STUDENT_T => "student_t".into(),
            Self::LINEAR_HET => "linear_het".into(),
            Self::QUAD_HET => "quad_het".into(),
            other => format!(
                "{}_{}",
                match other.scale {
                    NoiseScale::Constant => "constant",
                    NoiseScale::Linear => "linear",
                    NoiseScale::Quadratic => "quadratic",
                },
                other.innovation.as_str()
            ),
        }
    }
}

impl std::str::FromStr for CurveNoise {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(Self::GAUSSIAN),
            "student_t" | "student-t" => Ok(Self::STUDENT_T),
            "linear_het" | "linear-het" => Ok(Self::LINEAR_HET),
            "quad_het" | "quad-het" => Ok(Self::QUAD_HET),
            other => domain(format!(
                "unknown noise `{other}`; expected gaussian, student_t, linear_het or quad_het"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveSimSpec {
    pub curve: Curve,
    pub noise: CurveNoise,
    pub t: usize,
    pub sigma: f64,
    pub knots: usize,
    pub replicates: usize,
}

impl CurveSimSpec {
    pub fn new(curve: Curve, noise: CurveNoise) -> Self {
        Self {
            curve,
            noise,
            t: curve.default_t(),
            sigma: curve.default_sigma(),
            knots: curve.default_knots(),
            replicates: 5,
        }
    }

    /// Equally spaced design points `t / (T + 1)`, `t = 1..T`.
    pub fn grid(&self) -> Vec<f64> {
        (1..=self.t).map(|i| i as f64 / (self.t + 1) as f64).collect()
    }

    /// `sigma s(x)`.
    pub fn noise_sd(&self, x: f64) -> f64 {
        self.sigma * self.noise.scale.factor(x)
    }

    /// True conditional `tau`-quantile `f(x) + sigma s(x) q(tau)`.
    pub fn true_quantile(&self, x: &[f64], tau: f64) -> DVector<f64> {
        let q = self.noise.innovation.quantile(tau);
        DVector::from_iterator(x.len(), x.iter().map(|&v| self.curve.eval(v) + self.noise_sd(v) * q))
    }
}

/// Draws `(y, x)` on the design grid: `y = f(x) + sigma s(x) e`.
pub fn gen_curve_data<R: Rng + ?Sized>(spec: &CurveSimSpec, rng: &mut R) -> (DVector<f64>, Vec<f64>) {
    let x = spec.grid();
    let y = DVector::from_iterator(
        x.len(),
        x.iter().map(|&v| spec.curve.eval(v) + spec.noise_sd(v) * spec.noise.innovation.draw(rng)),
    );
    (y, x)
}

/// `mean (fitted - truth)^2`.
pub fn curve_mse(fitted: &DVector<f64>, truth: &DVector<f64>) -> Result<f64> {
    check_dim(truth.len(), fitted.len(), "fitted curve length")?;
    if fitted.is_empty() {
        return Err(Error::Empty("empty curve"));
    }
    Ok((fitted - truth).norm_squared() / fitted.len() as f64)
}

/// Intercept plus one cubic P-spline term in `x`.
pub fn curve_model(y: &DVector<f64>, x: &[f64], knots: usize, tau: f64) -> Result<GamModelSpec> {
    let mut lin = LinearModelSpec::new(DMatrix::from_element(y.len(), 1, 1.0), y.clone(), tau)?;
    lin.names = vec!["intercept".into()];
    GamModelSpec::new(lin, &[SmoothTerm::new("x", x.to_vec(), knots)])
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveRun {
    pub replicate: usize,
    pub method: Method,
    pub mse: f64,
    pub alpha: Option<f64>,
}

/// Both methods on every replicate at quantile level `tau`.
pub fn run_curve_experiment(
    spec: &CurveSimSpec,
    tau: f64,
    seed: u64,
    settings: SamplerSettings,
    prior: PriorHyper,
) -> Result<Vec<CurveRun>> {
    let jobs: Vec<(usize, Method)> = (0..spec.replicates)
        .flat_map(|r| Method::BOTH.map(|m| (r, m)))
        .collect();
    jobs.par_iter()
        .map(|&(r, method)| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, r as u64));
            let (y, x) = gen_curve_data(spec, &mut rng);
            let mut model = curve_model(&y, &x, spec.knots, tau)?;
            model.linear.prior = prior;
            model.linear.sampler = SamplerSettings {
                seed: derive_seed(seed ^ 0x5EED, r as u64),
                fixed_alpha: method.fixed_alpha(),
                ..settings
            };
            let draws = run_gam_sampler(&model)?;
            let fit = fitted_quantile(&draws, &model)?;
            Ok(CurveRun {
                replicate: r,
                method,
                mse: curve_mse(&fit, &spec.true_quantile(&x, tau))?,
                alpha: method.fixed_alpha().map_or_else(|| draws.mean_of("alpha"), |_| None),
            })
        })
        .collect()
}

/// Median of a metric per method.
pub fn median_by_method<T>(runs: &[T], method: impl Fn(&T) -> Method, value: impl Fn(&T) -> f64) -> [(Method, f64); 2] {
    Method::BOTH.map(|m| {
        let v: Vec<f64> = runs.iter().filter(|r| method(r) == m).map(&value).collect();
        (m, median(v))
    })
}
