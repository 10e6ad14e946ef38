//! Adaptive independence Metropolis-within-Gibbs for linear SEP quantile
//! regression with a per-coefficient Bayesian lasso prior.

pub mod proposal;

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::diagnostics::PosteriorDraws;
use crate::distributions::{
    Exponential, Gamma, GigParams, InverseGamma, Normal, ScaledBeta, SepKernel, TruncatedNormal,
};
use crate::error::{check_dim, domain, Error, Result};
use crate::special::normal_ln_pdf;

pub use proposal::{varsigma, CovarianceUpdate, GaussianProposal, ScalarProposal};

/// Upper end of the support of the tail parameter.
pub const ALPHA_MAX: f64 = 2.0;

/// Prior placed on the regression coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BetaPrior {
    /// Independent Laplace priors with their own Gamma-distributed rates.
    Lasso,
    /// Independent `N(0, variance)`.
    Gaussian { variance: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriorHyper {
    /// Shape of the Gamma prior on each `gamma_j^2`.
    pub psi: f64,
    /// Rate of the Gamma prior on each `gamma_j^2`.
    pub varpi: f64,
    /// Inverse-gamma shape for `sigma`.
    pub a: f64,
    /// Inverse-gamma scale for `sigma`.
    pub b: f64,
    /// Beta parameters for `alpha / 2`.
    pub c: f64,
    pub d: f64,
    /// Inverse-gamma `(a_h / 2, b_h / 2)` prior on each `h_j^2`.
    pub a_h: f64,
    pub b_h: f64,
    pub beta: BetaPrior,
}

impl Default for PriorHyper {
    fn default() -> Self {
        Self {
            psi: 0.1,
            varpi: 0.1,
            a: 0.001,
            b: 0.001,
            c: 2.0,
            d: 2.0,
            a_h: 0.001,
            b_h: 0.001,
            beta: BetaPrior::Lasso,
        }
    }
}

impl PriorHyper {
    pub fn validate(&self) -> Result<()> {
        let named = [
            ("psi", self.psi),
            ("varpi", self.varpi),
            ("a", self.a),
            ("b", self.b),
            ("c", self.c),
            ("d", self.d),
            ("a_h", self.a_h),
            ("b_h", self.b_h),
        ];
        for (name, v) in named {
            if !(v > 0.0 && v.is_finite()) {
                return domain(format!("hyperparameter {name} must be positive, got {v}"));
            }
        }
        if let BetaPrior::Gaussian { variance } = self.beta {
            if !(variance > 0.0 && variance.is_finite()) {
                return domain(format!("Gaussian prior variance must be positive, got {variance}"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplerSettings {
    pub iterations: usize,
    pub burn_in: usize,
    pub seed: u64,
    /// Constant `C` of the adaptation step `1 / (C sqrt(i))`.
    pub adapt_c: f64,
    /// Holds `alpha` fixed; `Some(1.0)` gives the asymmetric Laplace model.
    pub fixed_alpha: Option<f64>,
    pub covariance_update: CovarianceUpdate,
}

impl Default for SamplerSettings {
    fn default() -> Self {
        Self {
            iterations: 50_000,
            burn_in: 10_000,
            seed: 1,
            adapt_c: 10.0,
            fixed_alpha: None,
            covariance_update: CovarianceUpdate::default(),
        }
    }
}

impl SamplerSettings {
    pub fn validate(&self) -> Result<()> {
        if self.iterations <= self.burn_in {
            return domain(format!(
                "iterations ({}) must exceed burn-in ({})",
                self.iterations, self.burn_in
            ));
        }
        if !(self.adapt_c > 0.0 && self.adapt_c.is_finite()) {
            return domain(format!("adaptation constant must be positive, got {}", self.adapt_c));
        }
        if let Some(a) = self.fixed_alpha {
            if !(a > 0.0 && a <= ALPHA_MAX) {
                return domain(format!("fixed alpha must lie in (0, 2], got {a}"));
            }
        }
        Ok(())
    }

    pub fn retained(&self) -> usize {
        self.iterations - self.burn_in
    }
}

#[derive(Debug, Clone)]
pub struct LinearModelSpec {
    /// `T x p` design; include a column of ones for an intercept.
    pub x: DMatrix<f64>,
    pub y: DVector<f64>,
    pub tau: f64,
    pub prior: PriorHyper,
    pub sampler: SamplerSettings,
    /// Labels for the coefficients, one per column of `x`.
    pub names: Vec<String>,
}

impl LinearModelSpec {
    /// Spec with default priors and sampler settings, coefficients labelled
    /// `beta_0, beta_1, ...`.
    pub fn new(x: DMatrix<f64>, y: DVector<f64>, tau: f64) -> Result<Self> {
        let names = (0..x.ncols()).map(|j| format!("beta_{j}")).collect();
        let spec = Self {
            x,
            y,
            tau,
            prior: PriorHyper::default(),
            sampler: SamplerSettings::default(),
            names,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let (t, p) = self.x.shape();
        check_dim(t, self.y.len(), "response length")?;
        check_dim(p, self.names.len(), "coefficient labels")?;
        if p == 0 {
            return Err(Error::Empty("design matrix has no columns"));
        }
        if t < p {
            return domain(format!("need at least as many observations ({t}) as coefficients ({p})"));
        }
        if !(self.tau > 0.0 && self.tau < 1.0) {
            return domain(format!("tau must lie in (0, 1), got {}", self.tau));
        }
        if !self.x.iter().chain(self.y.iter()).all(|v| v.is_finite()) {
            return domain("data contain non-finite values");
        }
        self.prior.validate()?;
        self.sampler.validate()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }
}

/// Current position of the chain.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainState {
    pub beta: DVector<f64>,
    pub sigma: f64,
    pub alpha: f64,
    /// Normal-mixture variances of the coefficients.
    pub omega: DVector<f64>,
    /// Squared Laplace rates of the coefficients.
    pub gamma_sq: DVector<f64>,
}

/// Adapted proposal moments for the three Metropolis blocks.
#[derive(Debug, Clone)]
pub struct AdaptiveProposal {
    pub beta: GaussianProposal,
    /// Normal proposal for `ln sigma`.
    pub sigma_log: ScalarProposal,
    /// Normal proposal for `alpha`, truncated to `(0, 2)`.
    pub alpha: ScalarProposal,
    pub iteration: u64,
}

impl AdaptiveProposal {
    /// Starting moments: least-squares coefficients with covariance `0.1 I`,
    /// log residual MAD for `sigma`, and `alpha` centred at 1.
    pub fn initial(x: &DMatrix<f64>, y: &DVector<f64>) -> Result<Self> {
        let beta_ls = least_squares(x, y)?;
        let resid = y - x * &beta_ls;
        let mad = median_abs_deviation(resid.as_slice()).max(1e-8);
        Ok(Self {
            beta: GaussianProposal::new(beta_ls, 0.1 * DMatrix::identity(x.ncols(), x.ncols()))?,
            sigma_log: ScalarProposal::new(mad.ln(), 0.25),
            alpha: ScalarProposal::new(1.0, 0.25),
            iteration: 0,
        })
    }

    /// Truncated-normal proposal for `alpha` at the current moments.
    pub fn alpha_proposal(&self) -> Result<TruncatedNormal> {
        TruncatedNormal::new(self.alpha.mean, self.alpha.sd(), 0.0, ALPHA_MAX)
    }

    /// Log-density of the `sigma` proposal, including the `1 / sigma` Jacobian
    /// of the log transform.
    pub fn sigma_log_density(&self, sigma: f64) -> f64 {
        let s = self.sigma_log.sd();
        normal_ln_pdf((sigma.ln() - self.sigma_log.mean) / s) - s.ln() - sigma.ln()
    }
}

/// Outcome of one Metropolis decision.
#[derive(Debug, Clone, PartialEq)]
pub struct MhStep {
    pub proposed: Vec<f64>,
    pub log_ratio: f64,
    pub accepted: bool,
}

pub(crate) fn least_squares(x: &DMatrix<f64>, y: &DVector<f64>) -> Result<DVector<f64>> {
    let svd = x.clone().svd(true, true);
    svd.solve(y, 1e-12)
        .map_err(|e| Error::Sampler(format!("least-squares start failed: {e}")))
}

pub(crate) fn median_abs_deviation(values: &[f64]) -> f64 {
    let med = median(values.to_vec());
    median(values.iter().map(|v| (v - med).abs()).collect())
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

/// SEP log-likelihood of `y` around the location vector `mean`.
pub(crate) fn log_likelihood_at(y: &DVector<f64>, mean: &DVector<f64>, sigma: f64, alpha: f64, tau: f64) -> f64 {
    if !(sigma > 0.0 && sigma.is_finite() && alpha > 0.0) {
        return f64::NEG_INFINITY;
    }
    let kernel = SepKernel::new(sigma, alpha, tau);
    kernel.log_likelihood(y.iter().zip(mean.iter()).map(|(y, m)| y - m))
}

/// `sum_t log f_SEP(y_t; x_t' beta, sigma, alpha, tau)`.
pub fn sep_log_likelihood(beta: &DVector<f64>, sigma: f64, alpha: f64, spec: &LinearModelSpec) -> f64 {
    log_likelihood_at(&spec.y, &(&spec.x * beta), sigma, alpha, spec.tau)
}

/// `sum_j log N(beta_j; 0, omega_j)`.
pub(crate) fn log_beta_conditional_prior(beta: &DVector<f64>, omega: &DVector<f64>) -> f64 {
    beta.iter()
        .zip(omega.iter())
        .map(|(&b, &w)| {
            if w > 0.0 {
                normal_ln_pdf(b / w.sqrt()) - 0.5 * w.ln()
            } else {
                f64::NEG_INFINITY
            }
        })
        .sum()
}

fn log_beta_prior_given_state(state: &ChainState, prior: &PriorHyper) -> f64 {
    match prior.beta {
        BetaPrior::Lasso => log_beta_conditional_prior(&state.beta, &state.omega),
        BetaPrior::Gaussian { variance } => state
            .beta
            .iter()
            .map(|&b| normal_ln_pdf(b / variance.sqrt()) - 0.5 * variance.ln())
            .sum(),
    }
}

pub(crate) fn log_sigma_prior(sigma: f64, prior: &PriorHyper) -> f64 {
    InverseGamma { shape: prior.a, scale: prior.b }.log_pdf(sigma)
}

pub(crate) fn log_alpha_prior(alpha: f64, prior: &PriorHyper) -> f64 {
    ScaledBeta { a: prior.c, b: prior.d, upper: ALPHA_MAX }.log_pdf(alpha)
}

/// Log prior of the linear-model parameters: coefficients given the mixing
/// variances, exponential mixing, Gamma on `gamma_j^2`, inverse gamma on
/// `sigma` and the rescaled Beta on `alpha` (omitted when `alpha` is fixed).
/// Out-of-support values give `-inf`.
pub fn log_prior(state: &ChainState, spec: &LinearModelSpec) -> f64 {
    log_prior_parts(state, &spec.prior, spec.sampler.fixed_alpha.is_some())
}

pub(crate) fn log_prior_parts(state: &ChainState, prior: &PriorHyper, alpha_fixed: bool) -> f64 {
    let mut lp = log_beta_prior_given_state(state, prior);
    if prior.beta == BetaPrior::Lasso {
        for (&w, &g2) in state.omega.iter().zip(state.gamma_sq.iter()) {
            if !(g2 > 0.0) {
                return f64::NEG_INFINITY;
            }
            lp += Exponential { rate: 0.5 * g2 }.log_pdf(w);
            lp += Gamma { shape: prior.psi, rate: prior.varpi }.log_pdf(g2);
        }
    }
    lp += log_sigma_prior(state.sigma, prior);
    if !alpha_fixed {
        lp += log_alpha_prior(state.alpha, prior);
    }
    lp
}

/// Unnormalized log posterior of the augmented linear model.
pub fn log_joint(state: &ChainState, spec: &LinearModelSpec) -> f64 {
    sep_log_likelihood(&state.beta, state.sigma, state.alpha, spec) + log_prior(state, spec)
}

/// Full conditional of `omega_j`: `GIG(1/2, beta_j^2, gamma_j^2)`.
pub fn omega_full_conditional(beta_j: f64, gamma_sq_j: f64) -> Result<GigParams> {
    GigParams::new(0.5, beta_j * beta_j, gamma_sq_j)
}

/// Full conditional of `gamma_j^2`: `Gamma(psi + 1, rate varpi + omega_j / 2)`.
pub fn gamma_sq_full_conditional(omega_j: f64, prior: &PriorHyper) -> Result<Gamma> {
    Gamma::new(prior.psi + 1.0, prior.varpi + 0.5 * omega_j)
}

fn metropolis<R: Rng + ?Sized>(log_ratio: f64, rng: &mut R) -> bool {
    let u: f64 = rng.random();
    // NaN ratios are rejections
    u.ln() < log_ratio
}

/// Location offset added to `X beta`; `None` for the purely linear model.
pub(crate) struct Offset<'a>(pub Option<&'a DVector<f64>>);

impl Offset<'_> {
    fn mean(&self, x: &DMatrix<f64>, beta: &DVector<f64>) -> DVector<f64> {
        let xb = x * beta;
        match self.0 {
            Some(o) => xb + o,
            None => xb,
        }
    }
}

pub(crate) fn step_beta<R: Rng + ?Sized>(
    state: &mut ChainState,
    proposal: &AdaptiveProposal,
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    tau: f64,
    prior: &PriorHyper,
    offset: Offset<'_>,
    rng: &mut R,
) -> MhStep {
    let candidate = proposal.beta.sample(rng);
    let ll_new = log_likelihood_at(y, &offset.mean(x, &candidate), state.sigma, state.alpha, tau);
    let ll_old = log_likelihood_at(y, &offset.mean(x, &state.beta), state.sigma, state.alpha, tau);
    let mut trial = state.clone();
    trial.beta = candidate.clone();
    let log_ratio = ll_new - ll_old + log_beta_prior_given_state(&trial, prior)
        - log_beta_prior_given_state(state, prior)
        + proposal.beta.log_density(&state.beta)
        - proposal.beta.log_density(&candidate);
    let accepted = metropolis(log_ratio, rng);
    if accepted {
        state.beta = candidate.clone();
    }
    MhStep {
        proposed: candidate.as_slice().to_vec(),
        log_ratio,
        accepted,
    }
}

pub(crate) fn step_sigma<R: Rng + ?Sized>(
    state: &mut ChainState,
    proposal: &AdaptiveProposal,
    y: &DVector<f64>,
    mean: &DVector<f64>,
    tau: f64,
    prior: &PriorHyper,
    rng: &mut R,
) -> MhStep {
    let log_candidate = Normal {
        mean: proposal.sigma_log.mean,
        sd: proposal.sigma_log.sd(),
    }
    .sample(rng);
    let candidate = log_candidate.exp();
    let log_ratio = log_likelihood_at(y, mean, candidate, state.alpha, tau)
        - log_likelihood_at(y, mean, state.sigma, state.alpha, tau)
        + log_sigma_prior(candidate, prior)
        - log_sigma_prior(state.sigma, prior)
        + proposal.sigma_log_density(state.sigma)
        - proposal.sigma_log_density(candidate);
    let accepted = metropolis(log_ratio, rng);
    if accepted {
        state.sigma = candidate;
    }
    MhStep {
        proposed: vec![candidate],
        log_ratio,
        accepted,
    }
}

pub(crate) fn step_alpha<R: Rng + ?Sized>(
    state: &mut ChainState,
    proposal: &AdaptiveProposal,
    y: &DVector<f64>,
    mean: &DVector<f64>,
    tau: f64,
    prior: &PriorHyper,
    rng: &mut R,
) -> Result<MhStep> {
    let q = proposal.alpha_proposal()?;
    let candidate = q.sample(rng);
    let log_ratio = log_likelihood_at(y, mean, state.sigma, candidate, tau)
        - log_likelihood_at(y, mean, state.sigma, state.alpha, tau)
        + log_alpha_prior(candidate, prior)
        - log_alpha_prior(state.alpha, prior)
        + q.log_pdf(state.alpha)
        - q.log_pdf(candidate);
    let accepted = metropolis(log_ratio, rng);
    if accepted {
        state.alpha = candidate;
    }
    Ok(MhStep {
        proposed: vec![candidate],
        log_ratio,
        accepted,
    })
}

pub(crate) fn gibbs_lasso<R: Rng + ?Sized>(state: &mut ChainState, prior: &PriorHyper, rng: &mut R) -> Result<()> {
    for j in 0..state.beta.len() {
        state.omega[j] = omega_full_conditional(state.beta[j], state.gamma_sq[j])?.sample(rng);
        state.gamma_sq[j] = gamma_sq_full_conditional(state.omega[j], prior)?.sample(rng);
    }
    Ok(())
}

/// Independence Metropolis update of the whole coefficient vector, using the
/// conditional Gaussian prior given the current mixing variances.
pub fn img_step_beta<R: Rng + ?Sized>(
    state: &mut ChainState,
    proposal: &AdaptiveProposal,
    spec: &LinearModelSpec,
    rng: &mut R,
) -> MhStep {
    step_beta(state, proposal, &spec.x, &spec.y, spec.tau, &spec.prior, Offset(None), rng)
}

/// Independence Metropolis update of `sigma` through a log-normal proposal.
pub fn img_step_sigma<R: Rng + ?Sized>(
    state: &mut ChainState,
    proposal: &AdaptiveProposal,
    spec: &LinearModelSpec,
    rng: &mut R,
) -> MhStep {
    let mean = &spec.x * &state.beta;
    step_sigma(state, proposal, &spec.y, &mean, spec.tau, &spec.prior, rng)
}

/// Independence Metropolis update of `alpha` through a truncated normal
/// proposal; `None` when `alpha` is fixed.
pub fn img_step_alpha<R: Rng + ?Sized>(
    state: &mut ChainState,
    proposal: &AdaptiveProposal,
    spec: &LinearModelSpec,
    rng: &mut R,
) -> Result<Option<MhStep>> {
    if spec.sampler.fixed_alpha.is_some() {
        return Ok(None);
    }
    let mean = &spec.x * &state.beta;
    step_alpha(state, proposal, &spec.y, &mean, spec.tau, &spec.prior, rng).map(Some)
}

/// Exact Gibbs draws of every `omega_j` and then `gamma_j^2`. A no-op under
/// the Gaussian coefficient prior.
pub fn gibbs_update_lasso<R: Rng + ?Sized>(state: &mut ChainState, spec: &LinearModelSpec, rng: &mut R) -> Result<()> {
    match spec.prior.beta {
        BetaPrior::Lasso => gibbs_lasso(state, &spec.prior, rng),
        BetaPrior::Gaussian { .. } => Ok(()),
    }
}

/// Advances every proposal by one step of the mean/variance recursions with
/// step `varsigma(i + 1)`. `alpha` adapts only when it is sampled.
pub fn adapt(proposal: &mut AdaptiveProposal, state: &ChainState, i: u64, settings: &SamplerSettings) {
    let step = varsigma(i + 1, settings.adapt_c);
    let mode = settings.covariance_update;
    proposal.beta.adapt(&state.beta, step, mode);
    proposal.sigma_log.adapt(state.sigma.ln(), step, mode);
    if settings.fixed_alpha.is_none() {
        proposal.alpha.adapt(state.alpha, step, mode);
    }
    proposal.iteration = i;
}

/// Metropolis block being updated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Block {
    Beta,
    Sigma,
    Alpha,
    /// Coefficients of the given spline term.
    Theta(usize),
}

impl Block {
    pub fn label(&self) -> String {
        match self {
            Block::Beta => "beta".into(),
            Block::Sigma => "sigma".into(),
            Block::Alpha => "alpha".into(),
            Block::Theta(j) => format!("theta_{j}"),
        }
    }
}

/// Everything needed to recompute one Metropolis decision: the state and
/// proposals as they were before the step, and the step outcome.
#[derive(Debug)]
pub struct MhEvent<'a> {
    pub iteration: u64,
    pub block: Block,
    pub state: &'a ChainState,
    pub splines: &'a [crate::gam::BlockState],
    pub proposal: &'a AdaptiveProposal,
    pub theta_proposals: &'a [GaussianProposal],
    pub step: &'a MhStep,
}

pub(crate) const MAX_INIT_TRIES: usize = 100;

/// Initial state: coefficients from `N(0, 1)`, `sigma` from its prior,
/// `alpha` from the rescaled Beta prior (or the fixed value), unit mixing
/// variances and rates. Redrawn while the likelihood is not finite.
pub(crate) fn initial_state<R: Rng + ?Sized>(
    p: usize,
    prior: &PriorHyper,
    fixed_alpha: Option<f64>,
    loglik: impl Fn(&ChainState) -> f64,
    rng: &mut R,
) -> Result<ChainState> {
    let sigma_prior = InverseGamma { shape: prior.a, scale: prior.b };
    let alpha_prior = ScaledBeta { a: prior.c, b: prior.d, upper: ALPHA_MAX };
    let omega0 = match prior.beta {
        BetaPrior::Lasso => 1.0,
        BetaPrior::Gaussian { variance } => variance,
    };
    for _ in 0..MAX_INIT_TRIES {
        let beta = DVector::from_fn(p, |_, _| Normal { mean: 0.0, sd: 1.0 }.sample(rng));
        let sigma = sigma_prior.sample(rng);
        let alpha = match fixed_alpha {
            Some(a) => a,
            None => alpha_prior.sample(rng),
        };
        let state = ChainState {
            beta,
            sigma,
            alpha,
            omega: DVector::from_element(p, omega0),
            gamma_sq: DVector::from_element(p, 1.0),
        };
        if sigma > 0.0 && sigma.is_finite() && alpha > 0.0 && loglik(&state).is_finite() {
            return Ok(state);
        }
    }
    Err(Error::Sampler(format!(
        "no initial state with finite likelihood after {MAX_INIT_TRIES} draws"
    )))
}

/// Runs the chain and returns the retained draws.
pub fn run_linear_sampler(spec: &LinearModelSpec) -> Result<PosteriorDraws> {
    run_linear_sampler_observed(spec, &mut |_| {})
}

/// As [`run_linear_sampler`], reporting every Metropolis decision.
pub fn run_linear_sampler_observed(
    spec: &LinearModelSpec,
    observer: &mut dyn FnMut(&MhEvent<'_>),
) -> Result<PosteriorDraws> {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    spec.validate()?;
    let settings = &spec.sampler;
    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    let mut state = initial_state(
        spec.p(),
        &spec.prior,
        settings.fixed_alpha,
        |s| sep_log_likelihood(&s.beta, s.sigma, s.alpha, spec),
        &mut rng,
    )?;
    let mut proposal = AdaptiveProposal::initial(&spec.x, &spec.y)?;
    let mut names = spec.names.clone();
    names.push("sigma".into());
    names.push("alpha".into());
    let mut out = crate::diagnostics::DrawsBuilder::new(
        names,
        settings,
        spec.tau,
        crate::diagnostics::ModelKind::Linear,
    );
    let fixed = settings.fixed_alpha.is_some();

    for i in 1..=settings.iterations as u64 {
        let before = state.clone();
        let step = img_step_beta(&mut state, &proposal, spec, &mut rng);
        emit(observer, i, Block::Beta, &before, &proposal, &step);
        out.count("beta", step.accepted);

        let before = state.clone();
        let step = img_step_sigma(&mut state, &proposal, spec, &mut rng);
        emit(observer, i, Block::Sigma, &before, &proposal, &step);
        out.count("sigma", step.accepted);

        if !fixed {
            let before = state.clone();
            if let Some(step) = img_step_alpha(&mut state, &proposal, spec, &mut rng)? {
                emit(observer, i, Block::Alpha, &before, &proposal, &step);
                out.count("alpha", step.accepted);
            }
        }

        gibbs_update_lasso(&mut state, spec, &mut rng)?;
        adapt(&mut proposal, &state, i, settings);

        if i as usize > settings.burn_in {
            let mut row: Vec<f64> = state.beta.iter().copied().collect();
            row.push(state.sigma);
            row.push(state.alpha);
            let ll = sep_log_likelihood(&state.beta, state.sigma, state.alpha, spec);
            out.push(row, ll);
        }
    }
    Ok(out.finish())
}

fn emit(
    observer: &mut dyn FnMut(&MhEvent<'_>),
    iteration: u64,
    block: Block,
    state: &ChainState,
    proposal: &AdaptiveProposal,
    step: &MhStep,
) {
    observer(&MhEvent {
        iteration,
        block,
        state,
        splines: &[],
        proposal,
        theta_proposals: &[],
        step,
    });
}
