//! Additive quantile models: P-spline terms with a group-lasso prior on each
//! coefficient block, sampled by adaptive independence Metropolis within
//! Gibbs.

pub mod basis;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::diagnostics::{DrawsBuilder, ModelKind, PosteriorDraws};
use crate::distributions::{quadratic_form, Gamma, GigParams, InverseGamma};
use crate::error::{check_dim, domain, Error, Result};
use crate::linear_sampler::{
    self as lin, adapt, gibbs_update_lasso, initial_state, log_likelihood_at, varsigma,
    AdaptiveProposal, Block, ChainState, GaussianProposal, LinearModelSpec, MhEvent, MhStep,
    Offset, PriorHyper,
};

pub use basis::{bspline_basis_raw, build_bspline_basis, build_difference_matrix, KnotGrid};

/// Ridge added to the difference penalty wherever a proper Gaussian is needed.
pub const PENALTY_RIDGE: f64 = 1e-8;

/// User-facing description of one smooth term.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothTerm {
    pub name: String,
    pub z: Vec<f64>,
    /// Number of equally spaced interior knots.
    pub knots: usize,
    /// Spline order; 4 is cubic.
    pub order: usize,
    /// Order of the difference penalty.
    pub delta: usize,
}

impl SmoothTerm {
    pub fn new(name: impl Into<String>, z: Vec<f64>, knots: usize) -> Self {
        Self {
            name: name.into(),
            z,
            knots,
            order: 4,
            delta: 2,
        }
    }
}

/// Fixed design quantities of one smooth term.
///
/// Coefficients are sampled in the `m - 1` coordinates orthogonal to the
/// constant vector: after centring, a constant shift of `theta` changes
/// neither the fit nor the penalty.
#[derive(Debug, Clone)]
pub struct SplineBlock {
    pub name: String,
    pub grid: KnotGrid,
    pub delta: usize,
    /// Centred basis, `T x m`.
    pub basis: DMatrix<f64>,
    pub column_means: DVector<f64>,
    /// `(m - delta) x m` difference matrix.
    pub difference: DMatrix<f64>,
    /// `D'D`.
    pub penalty: DMatrix<f64>,
    /// Orthonormal `m x (m - 1)` basis of the sum-to-zero subspace.
    pub constraint: DMatrix<f64>,
    /// `basis * constraint`.
    pub reduced_basis: DMatrix<f64>,
    /// `constraint' * penalty * constraint`.
    pub reduced_penalty: DMatrix<f64>,
}

impl SplineBlock {
    pub fn new(term: &SmoothTerm) -> Result<Self> {
        if !term.z.iter().all(|v| v.is_finite()) {
            return domain(format!("smooth term `{}` has non-finite values", term.name));
        }
        let (raw, grid) = bspline_basis_raw(&term.z, term.knots, term.order)?;
        let m = grid.len();
        if m < 2 {
            return domain(format!("smooth term `{}` needs at least two basis functions", term.name));
        }
        let column_means = DVector::from_iterator(m, raw.column_iter().map(|c| c.mean()));
        let mut basis = raw;
        for (j, mut col) in basis.column_iter_mut().enumerate() {
            col.add_scalar_mut(-column_means[j]);
        }
        let difference = build_difference_matrix(m, term.delta)?;
        let penalty = difference.transpose() * &difference;
        let constraint = sum_to_zero_basis(m);
        let reduced_basis = &basis * &constraint;
        let reduced_penalty = constraint.transpose() * &penalty * &constraint;
        Ok(Self {
            name: term.name.clone(),
            grid,
            delta: term.delta,
            basis,
            column_means,
            difference,
            penalty,
            constraint,
            reduced_basis,
            reduced_penalty,
        })
    }

    /// Number of coefficients `k + order`.
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    /// Centred basis evaluated at new covariate values.
    pub fn basis_at(&self, z: &[f64]) -> DMatrix<f64> {
        let mut b = self.grid.basis(z);
        for (j, mut col) in b.column_iter_mut().enumerate() {
            col.add_scalar_mut(-self.column_means[j]);
        }
        b
    }

    pub fn theta_from_reduced(&self, eta: &DVector<f64>) -> DVector<f64> {
        &self.constraint * eta
    }

    pub fn reduced_from_theta(&self, theta: &DVector<f64>) -> DVector<f64> {
        self.constraint.transpose() * theta
    }
}

/// Columns 2..m of the Householder reflection sending `e_1` to `1 / sqrt(m)`.
fn sum_to_zero_basis(m: usize) -> DMatrix<f64> {
    let s = 1.0 / (m as f64).sqrt();
    let mut v = DVector::from_element(m, -s);
    v[0] += 1.0;
    let vv = v.norm_squared();
    let h = DMatrix::<f64>::identity(m, m) - (2.0 / vv) * &v * v.transpose();
    h.columns(1, m - 1).into_owned()
}

/// Group-lasso state of one smooth term.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockState {
    /// Coefficients in the sum-to-zero coordinates.
    pub eta: DVector<f64>,
    /// Full coefficient vector, `constraint * eta`.
    pub theta: DVector<f64>,
    pub phi: f64,
    pub h_sq: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GamState {
    pub linear: ChainState,
    pub blocks: Vec<BlockState>,
}

#[derive(Debug, Clone)]
pub struct GamModelSpec {
    /// Parametric part, priors and sampler settings.
    pub linear: LinearModelSpec,
    pub blocks: Vec<SplineBlock>,
}

impl GamModelSpec {
    pub fn new(linear: LinearModelSpec, terms: &[SmoothTerm]) -> Result<Self> {
        let blocks = terms.iter().map(SplineBlock::new).collect::<Result<Vec<_>>>()?;
        let spec = Self { linear, blocks };
        spec.validate()?;
        Ok(spec)
    }

    /// A spec without smooth terms.
    pub fn from_linear(linear: LinearModelSpec) -> Self {
        Self {
            linear,
            blocks: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.linear.validate()?;
        for b in &self.blocks {
            check_dim(self.linear.y.len(), b.basis.nrows(), "spline basis rows")?;
        }
        let total = self.linear.p() + self.blocks.iter().map(|b| b.dim() - 1).sum::<usize>();
        if total > self.linear.y.len() {
            return domain(format!(
                "{total} coefficients exceed the {} observations",
                self.linear.y.len()
            ));
        }
        Ok(())
    }

    pub fn prior(&self) -> &PriorHyper {
        &self.linear.prior
    }

    /// Parameter labels in draw-column order.
    pub fn names(&self) -> Vec<String> {
        let mut names = self.linear.names.clone();
        names.push("sigma".into());
        names.push("alpha".into());
        for b in &self.blocks {
            names.extend((0..b.dim()).map(|k| format!("theta_{}_{k}", b.name)));
            names.push(format!("phi_{}", b.name));
            names.push(format!("h_sq_{}", b.name));
        }
        names
    }
}

/// `sum_j B_j theta_j`, summed in block order.
pub fn spline_offset(thetas: &[&DVector<f64>], blocks: &[SplineBlock], t: usize) -> DVector<f64> {
    let mut out = DVector::zeros(t);
    for (theta, b) in thetas.iter().zip(blocks) {
        out += &b.basis * *theta;
    }
    out
}

fn offset_of(state: &GamState, spec: &GamModelSpec) -> DVector<f64> {
    let thetas: Vec<&DVector<f64>> = state.blocks.iter().map(|b| &b.theta).collect();
    spline_offset(&thetas, &spec.blocks, spec.linear.y.len())
}

/// SEP log-likelihood with location `x_t' beta + sum_j B_j[t, ] theta_j`.
pub fn gam_log_likelihood(
    beta: &DVector<f64>,
    thetas: &[&DVector<f64>],
    sigma: f64,
    alpha: f64,
    spec: &GamModelSpec,
) -> Result<f64> {
    check_dim(spec.blocks.len(), thetas.len(), "coefficient blocks")?;
    for (t, b) in thetas.iter().zip(&spec.blocks) {
        check_dim(b.dim(), t.len(), "spline coefficients")?;
    }
    let lin = &spec.linear;
    let mean = &lin.x * beta + spline_offset(thetas, &spec.blocks, lin.y.len());
    Ok(log_likelihood_at(&lin.y, &mean, sigma, alpha, lin.tau))
}

/// `-(m/2) ln phi - theta' D'D theta / (2 phi)`: the conditional Gaussian
/// prior kernel of a coefficient block.
pub fn theta_log_prior_kernel(theta: &DVector<f64>, phi: f64, block: &SplineBlock) -> f64 {
    let m = block.dim() as f64;
    -0.5 * m * phi.ln() - quadratic_form(theta, &block.penalty) / (2.0 * phi)
}

/// Shape of the Gamma mixing law of `phi_j`: `(m + 1) / 2`.
pub fn phi_mixing_shape(block: &SplineBlock) -> f64 {
    0.5 * (block.dim() as f64 + 1.0)
}

/// Full conditional of `phi_j`: `GIG(1/2, theta' D'D theta, h_j^2)`.
pub fn phi_full_conditional(theta: &DVector<f64>, h_sq: f64, block: &SplineBlock) -> Result<GigParams> {
    GigParams::new(0.5, quadratic_form(theta, &block.penalty), h_sq)
}

/// Full conditional of `h_j^2` under the inverse-gamma `(a_h/2, b_h/2)` prior
/// and the Gamma `((m+1)/2, h^2/2)` mixing law of `phi_j`:
/// `GIG((m + 1 - a_h) / 2, b_h, phi_j)`.
pub fn h_sq_full_conditional(phi: f64, block: &SplineBlock, prior: &PriorHyper) -> Result<GigParams> {
    GigParams::new(0.5 * (block.dim() as f64 + 1.0 - prior.a_h), prior.b_h, phi)
}

/// Log prior of the group-lasso layers of one block.
pub fn block_log_prior(state: &BlockState, block: &SplineBlock, prior: &PriorHyper) -> f64 {
    if !(state.phi > 0.0 && state.h_sq > 0.0) {
        return f64::NEG_INFINITY;
    }
    theta_log_prior_kernel(&state.theta, state.phi, block)
        + Gamma { shape: phi_mixing_shape(block), rate: 0.5 * state.h_sq }.log_pdf(state.phi)
        + InverseGamma { shape: 0.5 * prior.a_h, scale: 0.5 * prior.b_h }.log_pdf(state.h_sq)
}

/// Unnormalized log posterior of the augmented additive model.
pub fn gam_log_joint(state: &GamState, spec: &GamModelSpec) -> Result<f64> {
    let thetas: Vec<&DVector<f64>> = state.blocks.iter().map(|b| &b.theta).collect();
    let l = &state.linear;
    let mut lj = gam_log_likelihood(&l.beta, &thetas, l.sigma, l.alpha, spec)?;
    lj += lin::log_prior(l, &spec.linear);
    for (s, b) in state.blocks.iter().zip(&spec.blocks) {
        lj += block_log_prior(s, b, spec.prior());
    }
    Ok(lj)
}

/// Independence Metropolis update of block `j` through a Gaussian proposal
/// on its sum-to-zero coordinates. The prior enters through the conditional
/// Gaussian kernel given the current `phi_j`.
pub fn img_step_theta_block<R: Rng + ?Sized>(
    j: usize,
    state: &mut GamState,
    proposal: &GaussianProposal,
    spec: &GamModelSpec,
    rng: &mut R,
) -> MhStep {
    let block = &spec.blocks[j];
    let lin = &spec.linear;
    let l = &state.linear;
    let candidate_eta = proposal.sample(rng);
    let candidate = block.theta_from_reduced(&candidate_eta);

    let current_fit = &block.basis * &state.blocks[j].theta;
    let base = &lin.x * &l.beta + offset_of(state, spec) - &current_fit;
    let mean_new = &base + &block.basis * &candidate;
    let mean_old = &base + current_fit;

    let phi = state.blocks[j].phi;
    let log_ratio = log_likelihood_at(&lin.y, &mean_new, l.sigma, l.alpha, lin.tau)
        - log_likelihood_at(&lin.y, &mean_old, l.sigma, l.alpha, lin.tau)
        + theta_log_prior_kernel(&candidate, phi, block)
        - theta_log_prior_kernel(&state.blocks[j].theta, phi, block)
        + proposal.log_density(&state.blocks[j].eta)
        - proposal.log_density(&candidate_eta);
    let u: f64 = rng.random();
    let accepted = u.ln() < log_ratio;
    if accepted {
        state.blocks[j].eta = candidate_eta.clone();
        state.blocks[j].theta = candidate;
    }
    MhStep {
        proposed: candidate_eta.as_slice().to_vec(),
        log_ratio,
        accepted,
    }
}

/// Exact draw of `phi_j` from its GIG full conditional.
pub fn gibbs_update_phi<R: Rng + ?Sized>(j: usize, state: &mut GamState, spec: &GamModelSpec, rng: &mut R) -> Result<f64> {
    let s = &state.blocks[j];
    let phi = phi_full_conditional(&s.theta, s.h_sq, &spec.blocks[j])?.sample(rng);
    state.blocks[j].phi = phi;
    Ok(phi)
}

/// Exact draw of `h_j^2` from its GIG full conditional.
pub fn gibbs_update_h_sq<R: Rng + ?Sized>(j: usize, state: &mut GamState, spec: &GamModelSpec, rng: &mut R) -> Result<f64> {
    let h = h_sq_full_conditional(state.blocks[j].phi, &spec.blocks[j], spec.prior())?.sample(rng);
    state.blocks[j].h_sq = h;
    Ok(h)
}

/// Starting coefficients and proposal moments for every block: a joint
/// penalized least-squares fit (penalty weight 1) of the least-squares
/// residuals, and `s^2 (B'B + P)^{-1}` as the proposal covariance, where `s^2`
/// is the mean squared residual of that fit.
pub fn initial_block_proposals(spec: &GamModelSpec) -> Result<(Vec<DVector<f64>>, Vec<GaussianProposal>)> {
    if spec.blocks.is_empty() {
        return Ok((Vec::new(), Vec::new()));
    }
    let lin = &spec.linear;
    let beta_ls = lin::least_squares(&lin.x, &lin.y)?;
    let resid = &lin.y - &lin.x * beta_ls;
    let dims: Vec<usize> = spec.blocks.iter().map(|b| b.dim() - 1).collect();
    let total: usize = dims.iter().sum();
    let t = lin.y.len();
    let mut design = DMatrix::zeros(t, total);
    let mut pen = DMatrix::zeros(total, total);
    let mut at = 0;
    for (b, &d) in spec.blocks.iter().zip(&dims) {
        design.columns_mut(at, d).copy_from(&b.reduced_basis);
        pen.view_mut((at, at), (d, d)).copy_from(&b.reduced_penalty);
        at += d;
    }
    let mut lhs = design.transpose() * &design + pen;
    for i in 0..total {
        lhs[(i, i)] += PENALTY_RIDGE;
    }
    let chol = lhs
        .cholesky()
        .ok_or_else(|| Error::Sampler("penalized start system is not positive definite".into()))?;
    let coef = chol.solve(&(design.transpose() * &resid));
    let fit_resid = &resid - &design * &coef;
    let s2 = (fit_resid.norm_squared() / t as f64).max(1e-12);
    let inv = chol.inverse();
    let mut etas = Vec::new();
    let mut proposals = Vec::new();
    let mut at = 0;
    for &d in &dims {
        let eta = coef.rows(at, d).into_owned();
        let cov = s2 * inv.view((at, at), (d, d)).into_owned();
        let cov = 0.5 * (&cov + cov.transpose());
        proposals.push(GaussianProposal::new(eta.clone(), cov)?);
        etas.push(eta);
        at += d;
    }
    Ok((etas, proposals))
}

/// Runs the additive-model chain and returns the retained draws.
pub fn run_gam_sampler(spec: &GamModelSpec) -> Result<PosteriorDraws> {
    run_gam_sampler_observed(spec, &mut |_| {})
}

/// As [`run_gam_sampler`], reporting every Metropolis decision.
pub fn run_gam_sampler_observed(
    spec: &GamModelSpec,
    observer: &mut dyn FnMut(&MhEvent<'_>),
) -> Result<PosteriorDraws> {
    spec.validate()?;
    let lin = &spec.linear;
    let settings = &lin.sampler;
    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);

    let (etas, mut theta_props) = initial_block_proposals(spec)?;
    let blocks: Vec<BlockState> = etas
        .into_iter()
        .zip(&spec.blocks)
        .map(|(eta, b)| BlockState {
            theta: b.theta_from_reduced(&eta),
            eta,
            phi: 1.0,
            h_sq: 1.0,
        })
        .collect();
    let start_offset = {
        let thetas: Vec<&DVector<f64>> = blocks.iter().map(|b| &b.theta).collect();
        spline_offset(&thetas, &spec.blocks, lin.y.len())
    };
    let linear = initial_state(
        lin.p(),
        &lin.prior,
        settings.fixed_alpha,
        |s| log_likelihood_at(&lin.y, &(&lin.x * &s.beta + &start_offset), s.sigma, s.alpha, lin.tau),
        &mut rng,
    )?;
    let mut state = GamState { linear, blocks };
    let mut proposal = AdaptiveProposal::initial(&lin.x, &lin.y)?;
    let kind = if spec.blocks.is_empty() { ModelKind::Linear } else { ModelKind::Gam };
    let mut out = DrawsBuilder::new(spec.names(), settings, lin.tau, kind);
    let fixed = settings.fixed_alpha.is_some();
    let mode = settings.covariance_update;
    let labels: Vec<String> = (0..spec.blocks.len()).map(|j| Block::Theta(j).label()).collect();

    for i in 1..=settings.iterations as u64 {
        let offset = offset_of(&state, spec);

        let before = state.clone();
        let step = lin::step_beta(
            &mut state.linear,
            &proposal,
            &lin.x,
            &lin.y,
            lin.tau,
            &lin.prior,
            Offset(Some(&offset)),
            &mut rng,
        );
        emit(observer, i, Block::Beta, &before, &proposal, &theta_props, &step);
        out.count("beta", step.accepted);

        let mean = &lin.x * &state.linear.beta + &offset;
        let before = state.clone();
        let step = lin::step_sigma(&mut state.linear, &proposal, &lin.y, &mean, lin.tau, &lin.prior, &mut rng);
        emit(observer, i, Block::Sigma, &before, &proposal, &theta_props, &step);
        out.count("sigma", step.accepted);

        if !fixed {
            let before = state.clone();
            let step = lin::step_alpha(&mut state.linear, &proposal, &lin.y, &mean, lin.tau, &lin.prior, &mut rng)?;
            emit(observer, i, Block::Alpha, &before, &proposal, &theta_props, &step);
            out.count("alpha", step.accepted);
        }

        gibbs_update_lasso(&mut state.linear, lin, &mut rng)?;

        for j in 0..spec.blocks.len() {
            let before = state.clone();
            let step = img_step_theta_block(j, &mut state, &theta_props[j], spec, &mut rng);
            emit(observer, i, Block::Theta(j), &before, &proposal, &theta_props, &step);
            out.count(&labels[j], step.accepted);
            gibbs_update_phi(j, &mut state, spec, &mut rng)?;
            gibbs_update_h_sq(j, &mut state, spec, &mut rng)?;
        }

        adapt(&mut proposal, &state.linear, i, settings);
        let step = varsigma(i + 1, settings.adapt_c);
        for (p, b) in theta_props.iter_mut().zip(&state.blocks) {
            p.adapt(&b.eta, step, mode);
        }

        if i as usize > settings.burn_in {
            let l = &state.linear;
            let mut row: Vec<f64> = l.beta.iter().copied().collect();
            row.push(l.sigma);
            row.push(l.alpha);
            for b in &state.blocks {
                row.extend(b.theta.iter());
                row.push(b.phi);
                row.push(b.h_sq);
            }
            let mean = &lin.x * &l.beta + offset_of(&state, spec);
            out.push(row, log_likelihood_at(&lin.y, &mean, l.sigma, l.alpha, lin.tau));
        }
    }
    Ok(out.finish())
}

fn emit(
    observer: &mut dyn FnMut(&MhEvent<'_>),
    iteration: u64,
    block: Block,
    before: &GamState,
    proposal: &AdaptiveProposal,
    theta_proposals: &[GaussianProposal],
    step: &MhStep,
) {
    observer(&MhEvent {
        iteration,
        block,
        state: &before.linear,
        splines: &before.blocks,
        proposal,
        theta_proposals,
        step,
    });
}

/// Posterior-mean coefficients of block `j`.
pub fn posterior_mean_theta(draws: &PosteriorDraws, spec: &GamModelSpec, j: usize) -> Result<DVector<f64>> {
    let b = &spec.blocks[j];
    let means = draws.means();
    let mut out = DVector::zeros(b.dim());
    for k in 0..b.dim() {
        let name = format!("theta_{}_{k}", b.name);
        let idx = draws
            .index_of(&name)
            .ok_or_else(|| Error::Domain(format!("draws lack column `{name}`")))?;
        out[k] = means[idx];
    }
    Ok(out)
}

/// Posterior mean of the conditional quantile at the observed design:
/// `X mean(beta) + sum_j B_j mean(theta_j)`.
pub fn fitted_quantile(draws: &PosteriorDraws, spec: &GamModelSpec) -> Result<DVector<f64>> {
    let lin = &spec.linear;
    let means = draws.means();
    let mut beta = DVector::zeros(lin.p());
    for (k, name) in lin.names.iter().enumerate() {
        let idx = draws
            .index_of(name)
            .ok_or_else(|| Error::Domain(format!("draws lack column `{name}`")))?;
        beta[k] = means[idx];
    }
    let mut fit = &lin.x * beta;
    for j in 0..spec.blocks.len() {
        fit += &spec.blocks[j].basis * posterior_mean_theta(draws, spec, j)?;
    }
    Ok(fit)
}
