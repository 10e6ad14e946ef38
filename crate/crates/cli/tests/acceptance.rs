//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion.
//!
//! Criteria 5-7 compare desk-scale simulation summaries with reference
//! patterns and are reported without failing the run; every other criterion
//! must pass.

use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sepqr_core::distributions::{sep_cdf, sep_log_pdf, sep_sample, GigParams, SepParams};
use sepqr_core::gam::{
    build_difference_matrix, bspline_basis_raw, h_sq_full_conditional, phi_full_conditional,
    run_gam_sampler_observed, BlockState, GamModelSpec, GamState, SmoothTerm,
};
use sepqr_core::linear_sampler::{
    gamma_sq_full_conditional, omega_full_conditional, run_linear_sampler_observed, varsigma, Block, ChainState,
    LinearModelSpec, MhEvent, PriorHyper, SamplerSettings,
};
use sepqr_core::simulation::{
    median_by_method, run_curve_experiment, run_mixture_experiment, run_regression_experiment, Curve, CurveNoise,
    CurveSimSpec, ErrorKind, Method, MixtureSpec, RegressionSimSpec,
};
use statrs::distribution::{Beta, Continuous, ContinuousCDF, Gamma, LogNormal, Normal};
use statrs::function::gamma::ln_gamma;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

// ---------------------------------------------------------------------------
// independent oracles

/// SEP log density written out from its definition.
fn sep_direct(r: f64, sigma: f64, alpha: f64, tau: f64) -> f64 {
    let c = if r <= 0.0 { tau } else { 1.0 - tau };
    -(2.0f64.ln() + alpha.ln() / alpha + ln_gamma(1.0 + 1.0 / alpha)) - sigma.ln()
        - (r.abs() / (2.0 * c * sigma)).powf(alpha) / alpha
}

/// Asymmetric Laplace density in check-loss form with scale `2 tau (1 - tau) sigma`.
fn ald_density(y: f64, mu: f64, sigma: f64, tau: f64) -> f64 {
    let s = 2.0 * tau * (1.0 - tau) * sigma;
    let u = y - mu;
    let rho = u * (tau - if u < 0.0 { 1.0 } else { 0.0 });
    tau * (1.0 - tau) / s * (-rho / s).exp()
}

fn ks_statistic(mut draws: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
    draws.sort_by(|a, b| a.total_cmp(b));
    let n = draws.len() as f64;
    draws
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Two-sided KS critical constant at the 0.001 level.
const KS_CRIT_001: f64 = 1.949_466_186_580_061;

/// `int x^k f(x) dx` for an unnormalized log density on `(0, inf)`, by
/// composite Simpson in `u = ln x`.
fn log_moment(log_f: impl Fn(f64) -> f64, k: f64) -> f64 {
    let (lo, hi, n) = (-60.0, 60.0, 240_000);
    let h = (hi - lo) / n as f64;
    let g = |u: f64| log_f(u.exp()) + (k + 1.0) * u;
    let peak = (0..=n).map(|i| g(lo + i as f64 * h)).fold(f64::NEG_INFINITY, f64::max);
    let mut s = 0.0;
    for i in 0..=n {
        let w = if i == 0 || i == n {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        s += w * (g(lo + i as f64 * h) - peak).exp();
    }
    (s * h / 3.0).ln() + peak
}

fn gig_log_kernel(p: f64, chi: f64, psi: f64, x: f64) -> f64 {
    (p - 1.0) * x.ln() - 0.5 * (chi / x + psi * x)
}

fn ig_direct(x: f64, shape: f64, scale: f64) -> f64 {
    shape * scale.ln() - ln_gamma(shape) - (shape + 1.0) * x.ln() - scale / x
}

fn mvn(x: &DVector<f64>, mean: &DVector<f64>, cov: &DMatrix<f64>) -> f64 {
    let l = cov.clone().cholesky().expect("positive definite");
    let d = x - mean;
    let half_log_det: f64 = l.l().diagonal().iter().map(|v| v.ln()).sum();
    -0.5 * (x.len() as f64 * (2.0 * std::f64::consts::PI).ln() + d.dot(&l.solve(&d))) - half_log_det
}

fn loglik(
    y: &DVector<f64>,
    x: &DMatrix<f64>,
    beta: &DVector<f64>,
    offset: &DVector<f64>,
    sigma: f64,
    alpha: f64,
    tau: f64,
) -> f64 {
    let mean = x * beta + offset;
    y.iter().zip(mean.iter()).map(|(y, m)| sep_direct(y - m, sigma, alpha, tau)).sum()
}

fn spline_sum(spec: &GamModelSpec, thetas: &[DVector<f64>]) -> DVector<f64> {
    let mut s = DVector::zeros(spec.linear.y.len());
    for (b, th) in spec.blocks.iter().zip(thetas) {
        s += &b.basis * th;
    }
    s
}

/// Signed terms of one Metropolis log ratio: target at the candidate, minus
/// target at the current state, proposal at the current state, minus
/// proposal at the candidate. Priors on `beta` are conditional on `omega`.
fn ratio_terms(ev: &MhEvent<'_>, spec: &GamModelSpec) -> [f64; 4] {
    let lin = &spec.linear;
    let prior = &lin.prior;
    let s = ev.state;
    let thetas: Vec<DVector<f64>> = ev.splines.iter().map(|b| b.theta.clone()).collect();
    let off = spline_sum(spec, &thetas);
    let ll = |beta: &DVector<f64>, off: &DVector<f64>, sigma: f64, alpha: f64| {
        loglik(&lin.y, &lin.x, beta, off, sigma, alpha, lin.tau)
    };
    let cur = ll(&s.beta, &off, s.sigma, s.alpha);
    let beta_prior = |b: &DVector<f64>| -> f64 {
        b.iter()
            .zip(s.omega.iter())
            .map(|(&v, &w)| Normal::new(0.0, w.sqrt()).unwrap().ln_pdf(v))
            .sum()
    };
    match ev.block {
        Block::Beta => {
            let cand = DVector::from_vec(ev.step.proposed.clone());
            let q = &ev.proposal.beta;
            [
                ll(&cand, &off, s.sigma, s.alpha) + beta_prior(&cand),
                -(cur + beta_prior(&s.beta)),
                mvn(&s.beta, q.mean(), q.cov()),
                -mvn(&cand, q.mean(), q.cov()),
            ]
        }
        Block::Sigma => {
            let c = ev.step.proposed[0];
            let q = &ev.proposal.sigma_log;
            let ln = LogNormal::new(q.mean, q.var.sqrt()).unwrap();
            [
                ll(&s.beta, &off, c, s.alpha) + ig_direct(c, prior.a, prior.b),
                -(cur + ig_direct(s.sigma, prior.a, prior.b)),
                ln.ln_pdf(s.sigma),
                -ln.ln_pdf(c),
            ]
        }
        Block::Alpha => {
            let c = ev.step.proposed[0];
            let q = &ev.proposal.alpha;
            let n = Normal::new(q.mean, q.var.sqrt()).unwrap();
            let mass = (n.cdf(2.0) - n.cdf(0.0)).ln();
            let beta = Beta::new(prior.c, prior.d).unwrap();
            [
                ll(&s.beta, &off, s.sigma, c) + beta.ln_pdf(c / 2.0),
                -(cur + beta.ln_pdf(s.alpha / 2.0)),
                n.ln_pdf(s.alpha) - mass,
                -(n.ln_pdf(c) - mass),
            ]
        }
        Block::Theta(j) => {
            let b = &spec.blocks[j];
            let eta_c = DVector::from_vec(ev.step.proposed.clone());
            let mut cand = thetas.clone();
            cand[j] = &b.constraint * &eta_c;
            let phi = ev.splines[j].phi;
            let m = b.dim() as f64;
            let kernel = |th: &DVector<f64>| -0.5 * m * phi.ln() - (&b.difference * th).norm_squared() / (2.0 * phi);
            let q = &ev.theta_proposals[j];
            [
                ll(&s.beta, &spline_sum(spec, &cand), s.sigma, s.alpha) + kernel(&cand[j]),
                -(cur + kernel(&thetas[j])),
                mvn(&ev.splines[j].eta, q.mean(), q.cov()),
                -mvn(&eta_c, q.mean(), q.cov()),
            ]
        }
    }
}

/// Log joint of the augmented additive model under the lasso prior.
fn joint_direct(state: &GamState, spec: &GamModelSpec) -> f64 {
    let lin = &spec.linear;
    let pr = &lin.prior;
    let l = &state.linear;
    let thetas: Vec<DVector<f64>> = state.blocks.iter().map(|b| b.theta.clone()).collect();
    let mut lj = loglik(&lin.y, &lin.x, &l.beta, &spline_sum(spec, &thetas), l.sigma, l.alpha, lin.tau);
    for j in 0..l.beta.len() {
        lj += Normal::new(0.0, l.omega[j].sqrt()).unwrap().ln_pdf(l.beta[j]);
        lj += (0.5 * l.gamma_sq[j]).ln() - 0.5 * l.gamma_sq[j] * l.omega[j];
        lj += Gamma::new(pr.psi, pr.varpi).unwrap().ln_pdf(l.gamma_sq[j]);
    }
    lj += ig_direct(l.sigma, pr.a, pr.b);
    lj += Beta::new(pr.c, pr.d).unwrap().ln_pdf(l.alpha / 2.0) - 2.0f64.ln();
    for (s, b) in state.blocks.iter().zip(&spec.blocks) {
        let m = b.dim() as f64;
        lj += -0.5 * m * s.phi.ln() - (&b.difference * &s.theta).norm_squared() / (2.0 * s.phi);
        lj += Gamma::new(0.5 * (m + 1.0), 0.5 * s.h_sq).unwrap().ln_pdf(s.phi);
        lj += ig_direct(s.h_sq, 0.5 * pr.a_h, 0.5 * pr.b_h);
    }
    lj
}

// ---------------------------------------------------------------------------
// fixtures

fn sep_linear_spec(t: usize, beta: &[f64], seed: u64) -> LinearModelSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = beta.len();
    let x = DMatrix::from_fn(t, p, |_, j| if j == 0 { 1.0 } else { rng.random::<f64>() * 2.0 - 1.0 });
    let err = sep_sample(&SepParams::new(0.0, 0.5, 1.3, 0.3).unwrap(), t, &mut rng).unwrap();
    let y = &x * DVector::from_column_slice(beta) + DVector::from_vec(err);
    LinearModelSpec::new(x, y, 0.3).unwrap()
}

fn two_block_spec(seed: u64) -> GamModelSpec {
    let t = 120;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let z1: Vec<f64> = (1..=t).map(|i| i as f64 / (t + 1) as f64).collect();
    let z2: Vec<f64> = (0..t).map(|i| ((i * 37) % t) as f64 / t as f64).collect();
    let x = DMatrix::from_fn(t, 2, |i, j| if j == 0 { 1.0 } else { (i as f64 * 0.7).sin() });
    let err = sep_sample(&SepParams::new(0.0, 0.3, 1.0, 0.3).unwrap(), t, &mut rng).unwrap();
    let y = DVector::from_fn(t, |i, _| 0.5 + x[(i, 1)] + (6.0 * z1[i]).sin() + z2[i] * z2[i] + err[i]);
    let lin = LinearModelSpec::new(x, y, 0.3).unwrap();
    GamModelSpec::new(lin, &[SmoothTerm::new("a", z1, 6), SmoothTerm::new("b", z2, 5)]).unwrap()
}

fn some_state(spec: &GamModelSpec) -> GamState {
    let p = spec.linear.p();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    GamState {
        linear: ChainState {
            beta: DVector::from_fn(p, |i, _| 0.2 + 0.1 * i as f64),
            sigma: 0.4,
            alpha: 1.2,
            omega: DVector::from_element(p, 1.3),
            gamma_sq: DVector::from_element(p, 0.8),
        },
        blocks: spec
            .blocks
            .iter()
            .map(|b| {
                let eta = DVector::from_fn(b.dim() - 1, |_, _| rng.random::<f64>() - 0.5);
                BlockState {
                    theta: b.theta_from_reduced(&eta),
                    eta,
                    phi: 0.7,
                    h_sq: 2.0,
                }
            })
            .collect(),
    }
}

// ---------------------------------------------------------------------------
// criteria

fn c1_quantile_identity() -> Outcome {
    let mut worst: f64 = 0.0;
    for sigma in [0.5, 1.0, 3.0] {
        for alpha in [0.3, 0.7, 1.0, 1.5, 2.0] {
            for tau in [0.05, 0.25, 0.5, 0.9] {
                let p = SepParams::new(0.7, sigma, alpha, tau).unwrap();
                worst = worst.max((sep_cdf(0.7, &p).unwrap() - tau).abs());
            }
        }
    }
    outcome(worst < 1e-10, format!("max |F(mu) - tau| = {worst:.1e} over 60 settings"))
}

fn c2_reductions() -> Outcome {
    let mut worst_ald: f64 = 0.0;
    let mut worst_normal: f64 = 0.0;
    for (mu, sigma) in [(0.0, 1.0), (-1.5, 0.4), (2.0, 3.0)] {
        let grid: Vec<f64> = (0..1000).map(|i| mu - 8.0 * sigma + 16.0 * sigma * i as f64 / 999.0).collect();
        for tau in [0.1, 0.5, 0.8] {
            let p = SepParams::new(mu, sigma, 1.0, tau).unwrap();
            for &y in &grid {
                worst_ald = worst_ald.max((sep_log_pdf(y, &p).unwrap().exp() - ald_density(y, mu, sigma, tau)).abs());
            }
        }
        let p = SepParams::new(mu, sigma, 2.0, 0.5).unwrap();
        let n = Normal::new(mu, sigma).unwrap();
        for &y in &grid {
            worst_normal = worst_normal.max((sep_log_pdf(y, &p).unwrap().exp() - n.pdf(y)).abs());
        }
    }
    outcome(
        worst_ald < 1e-12 && worst_normal < 1e-12,
        format!("alpha=1 vs ALD {worst_ald:.1e}, alpha=2 tau=.5 vs Normal {worst_normal:.1e}"),
    )
}

fn c3_samplers() -> Outcome {
    let n = 100_000;
    let crit = KS_CRIT_001 / (n as f64).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut ks_ok = true;
    let mut worst_ks: f64 = 0.0;
    for (sigma, alpha, tau) in [
        (1.0, 1.0, 0.5),
        (0.5, 0.3, 0.1),
        (2.0, 0.7, 0.9),
        (1.0, 1.5, 0.25),
        (0.3, 2.0, 0.5),
        (1.2, 1.9, 0.05),
    ] {
        let p = SepParams::new(0.4, sigma, alpha, tau).unwrap();
        let draws = sep_sample(&p, n, &mut rng).unwrap();
        let d = ks_statistic(draws, |x| sep_cdf(x, &p).unwrap());
        worst_ks = worst_ks.max(d / crit);
        ks_ok &= d < crit;
    }

    let mut worst_z: f64 = 0.0;
    for (p, chi, psi) in [(0.5, 1.0, 2.0), (-1.5, 2.0, 0.5), (3.0, 0.1, 1.0), (0.2, 0.01, 0.5), (12.4995, 0.001, 0.7)] {
        let gig = GigParams::new(p, chi, psi).unwrap();
        let lk = |x: f64| gig_log_kernel(p, chi, psi, x);
        let z = log_moment(lk, 0.0);
        let draws: Vec<f64> = (0..n).map(|_| gig.sample(&mut rng)).collect();
        for k in [1.0, -1.0] {
            let m1 = (log_moment(lk, k) - z).exp();
            let m2 = (log_moment(lk, 2.0 * k) - z).exp();
            let se = ((m2 - m1 * m1) / n as f64).sqrt();
            let mc = draws.iter().map(|x| x.powf(k)).sum::<f64>() / n as f64;
            worst_z = worst_z.max((mc - m1).abs() / se);
        }
    }
    outcome(
        ks_ok && worst_z < 3.0,
        format!(
            "SEP KS max D/D_crit = {worst_ks:.2} (6 settings, n=1e5); GIG E[X], E[1/X] max |z| = {worst_z:.2}"
        ),
    )
}

fn c4_mcmc_correctness() -> Outcome {
    // (a) Metropolis ratios
    let mut worst: f64 = 0.0;
    let mut count = 0usize;
    let mut check = |ev: &MhEvent<'_>, spec: &GamModelSpec| {
        let terms = ratio_terms(ev, spec);
        let want: f64 = terms.iter().sum();
        let scale = terms.iter().map(|v| v.abs()).sum::<f64>().max(1.0);
        worst = worst.max((ev.step.log_ratio - want).abs() / scale);
        count += 1;
    };
    let mut lin = sep_linear_spec(150, &[1.0, -0.5, 0.0, 2.0], 41);
    lin.sampler = SamplerSettings {
        iterations: 100,
        burn_in: 50,
        seed: 5,
        ..SamplerSettings::default()
    };
    let lin_as_gam = GamModelSpec::from_linear(lin.clone());
    run_linear_sampler_observed(&lin, &mut |ev| check(ev, &lin_as_gam)).unwrap();
    let mut gam = two_block_spec(10);
    gam.linear.sampler = SamplerSettings {
        iterations: 100,
        burn_in: 50,
        seed: 6,
        ..SamplerSettings::default()
    };
    run_gam_sampler_observed(&gam, &mut |ev| check(ev, &gam)).unwrap();
    let ratios_ok = worst < 1e-12 && count == 100 * 3 + 100 * 5;

    // (b) Gibbs full conditionals against the joint
    let base = some_state(&gam);
    let mut worst_gibbs: f64 = 0.0;
    let mut consistent = |lhs: f64, a: &GamState, b: &GamState| {
        let rhs = joint_direct(b, &gam) - joint_direct(a, &gam);
        worst_gibbs = worst_gibbs.max((lhs - rhs).abs());
    };
    for j in 0..base.linear.beta.len() {
        let gig = omega_full_conditional(base.linear.beta[j], base.linear.gamma_sq[j]).unwrap();
        for (v0, v1) in [(0.2, 1.7), (0.05, 3.0)] {
            let (mut a, mut b) = (base.clone(), base.clone());
            a.linear.omega[j] = v0;
            b.linear.omega[j] = v1;
            consistent(gig.log_kernel(v1) - gig.log_kernel(v0), &a, &b);
        }
        let g = gamma_sq_full_conditional(base.linear.omega[j], &gam.linear.prior).unwrap();
        for (v0, v1) in [(0.1, 0.9), (1.0, 4.0)] {
            let (mut a, mut b) = (base.clone(), base.clone());
            a.linear.gamma_sq[j] = v0;
            b.linear.gamma_sq[j] = v1;
            consistent(g.log_pdf(v1) - g.log_pdf(v0), &a, &b);
        }
    }
    for (j, block) in gam.blocks.iter().enumerate() {
        let s = &base.blocks[j];
        let gig = phi_full_conditional(&s.theta, s.h_sq, block).unwrap();
        for (v0, v1) in [(0.3, 1.1), (0.02, 5.0)] {
            let (mut a, mut b) = (base.clone(), base.clone());
            a.blocks[j].phi = v0;
            b.blocks[j].phi = v1;
            consistent(gig.log_kernel(v1) - gig.log_kernel(v0), &a, &b);
        }
        let gig = h_sq_full_conditional(s.phi, block, &gam.linear.prior).unwrap();
        for (v0, v1) in [(0.5, 2.5), (3.0, 20.0)] {
            let (mut a, mut b) = (base.clone(), base.clone());
            a.blocks[j].h_sq = v0;
            b.blocks[j].h_sq = v1;
            consistent(gig.log_kernel(v1) - gig.log_kernel(v0), &a, &b);
        }
    }
    outcome(
        ratios_ok && worst_gibbs < 1e-8,
        format!(
            "(a) {count} Metropolis ratios, max error / term scale = {worst:.1e}; \
             (b) omega, gamma^2, phi, h^2 max joint-ratio error = {worst_gibbs:.1e}"
        ),
    )
}

fn c5_mixture() -> Outcome {
    let settings = SamplerSettings {
        iterations: 50_000,
        burn_in: 10_000,
        ..SamplerSettings::default()
    };
    let fits = run_mixture_experiment(&MixtureSpec::default(), &[0.1, 0.5, 0.9], 5, 1, settings).unwrap();
    let pick = |tau: f64, m: Method| -> Vec<_> { fits.iter().filter(|f| f.tau == tau && f.method == m).collect() };
    let alphas: Vec<f64> = pick(0.5, Method::Sep).iter().map(|f| f.alpha.unwrap()).collect();
    let mean_alpha = alphas.iter().sum::<f64>() / alphas.len() as f64;
    let a_ok = mean_alpha > 0.6 && mean_alpha < 1.0;
    let mut b_ok = true;
    let mut wins = Vec::new();
    for tau in [0.1, 0.9] {
        let (ald, sep) = (pick(tau, Method::Ald), pick(tau, Method::Sep));
        let n = ald
            .iter()
            .zip(&sep)
            .filter(|(a, s)| (s.slope - 0.6).abs() < (a.slope - 0.6).abs())
            .count();
        b_ok &= n >= 4;
        wins.push(n);
    }
    let fmt = |v: &[f64]| v.iter().map(|a| format!("{a:.3}")).collect::<Vec<_>>().join(" ");
    let slopes = |tau, m| fmt(&pick(tau, m).iter().map(|f| f.slope).collect::<Vec<_>>());
    outcome(
        a_ok && b_ok,
        format!(
            "(a) SEP alpha at tau=.5 mean {mean_alpha:.3} [{}] {}; (b) SEP slope closer to 0.6 in {}/5 (tau=.1), \
             {}/5 (tau=.9) {}; slopes tau=.1 ALD [{}] SEP [{}], tau=.9 ALD [{}] SEP [{}]",
            fmt(&alphas),
            if a_ok { "ok" } else { "out of (0.6, 1.0)" },
            wins[0],
            wins[1],
            if b_ok { "ok" } else { "needs >= 4" },
            slopes(0.1, Method::Ald),
            slopes(0.1, Method::Sep),
            slopes(0.9, Method::Ald),
            slopes(0.9, Method::Sep),
        ),
    )
}

fn c6_sparse_regression() -> Outcome {
    let settings = SamplerSettings {
        iterations: 20_000,
        burn_in: 5_000,
        ..SamplerSettings::default()
    };
    let mmads = |kind: ErrorKind, tau: f64| {
        let spec = RegressionSimSpec::new(1, kind, tau);
        let runs = run_regression_experiment(&spec, 1, settings, PriorHyper::default()).unwrap();
        median_by_method(&runs, |r| r.method, |r| r.mmad)
    };
    let mut t_ok = true;
    let mut parts = Vec::new();
    for tau in [0.1, 0.9] {
        let [(_, ald), (_, sep)] = mmads(ErrorKind::StudentT, tau);
        t_ok &= sep <= ald;
        parts.push(format!("t tau={tau}: ALD {ald:.3} SEP {sep:.3}"));
    }
    // reference Gaussian MMADs, (ALD, SEP) per tau
    let reference = [(0.1, 1.0131, 0.9096), (0.5, 1.1008, 1.0955), (0.9, 1.0579, 0.9708)];
    let mut g_ok = true;
    for (tau, p_ald, p_sep) in reference {
        let [(_, ald), (_, sep)] = mmads(ErrorKind::Gaussian, tau);
        g_ok &= (ald / p_ald - 1.0).abs() <= 0.25 && (sep / p_sep - 1.0).abs() <= 0.25;
        parts.push(format!("gaussian tau={tau}: ALD {ald:.3} ({p_ald}) SEP {sep:.3} ({p_sep})"));
    }
    outcome(
        t_ok && g_ok,
        format!(
            "t-error SEP <= ALD {}; Gaussian within 25% of reference {}; {}",
            if t_ok { "ok" } else { "fails" },
            if g_ok { "ok" } else { "fails" },
            parts.join("; ")
        ),
    )
}

fn c7_curves() -> Outcome {
    let settings = SamplerSettings {
        iterations: 10_000,
        burn_in: 5_000,
        ..SamplerSettings::default()
    };
    let mse = |curve: Curve, noise: CurveNoise, tau: f64| {
        let spec = CurveSimSpec::new(curve, noise);
        let runs = run_curve_experiment(&spec, tau, 1, settings, PriorHyper::default()).unwrap();
        median_by_method(&runs, |r| r.method, |r| r.mse)
    };
    let mut ok = true;
    let mut parts = Vec::new();
    for curve in [Curve::Wave, Curve::Doppler] {
        let [(_, ald), (_, sep)] = mse(curve, CurveNoise::QUAD_HET, 0.9);
        ok &= sep < ald;
        parts.push(format!("{} quad-het tau=.9: ALD {ald:.4} SEP {sep:.4}", curve.as_str()));
    }
    let [_, (_, sep)] = mse(Curve::Doppler, CurveNoise::GAUSSIAN, 0.5);
    let abs_ok = sep < 0.001;
    parts.push(format!("doppler gaussian tau=.5: SEP {sep:.4} (needs < 0.001)"));
    outcome(ok && abs_ok, parts.join("; "))
}

fn c8_structure() -> Outcome {
    let z: Vec<f64> = (0..=500).map(|i| i as f64 / 500.0).collect();
    let mut pou: f64 = 0.0;
    for k in [5, 20, 25] {
        let (b, _) = bspline_basis_raw(&z, k, 4).unwrap();
        for row in b.row_iter() {
            pou = pou.max((row.sum() - 1.0).abs());
        }
    }
    let mut annihilates = true;
    let mut ranks_ok = true;
    for m in [6, 24, 29] {
        let d = build_difference_matrix(m, 2).unwrap();
        let v = DVector::from_fn(m, |i, _| 3.0 - 2.0 * i as f64);
        annihilates &= (&d * v).iter().all(|&x| x == 0.0);
        let p = d.transpose() * &d;
        let sv = p.singular_values();
        let rank = sv.iter().filter(|&&s| s > 1e-9 * sv.max()).count();
        ranks_ok &= rank == m - 2;
    }
    let mut vs: f64 = 0.0;
    for i in 1..=1_000_000u64 {
        vs = vs.max((varsigma(i, 10.0) * (i as f64).sqrt() - 0.1).abs());
    }
    outcome(
        pou < 1e-12 && annihilates && ranks_ok && vs < 1e-15,
        format!(
            "partition of unity {pou:.1e}; D2 annihilates lines {annihilates}; rank(D2'D2) = m-2 {ranks_ok}; \
             max |varsigma(i) sqrt(i) - 0.1| = {vs:.1e}"
        ),
    )
}

fn sepqr(args: &[&str]) -> bool {
    Command::new(env!("CARGO_BIN_EXE_sepqr"))
        .args(args)
        .output()
        .map(|o| o.status.success())
        .unwrap_or(false)
}

fn read_dir_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().into_string().unwrap(), fs::read(e.path()).unwrap())
        })
        .collect();
    v.sort();
    v
}

fn c9_determinism() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let csv = tmp.path().join("data.csv");
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut text = String::from("y,x,z\n");
    for i in 0..80 {
        let x: f64 = rng.random();
        let z = i as f64 / 79.0;
        let e: f64 = rng.random::<f64>() - 0.5;
        text.push_str(&format!("{},{x},{z}\n", 1.0 + x + (5.0 * z).sin() + e));
    }
    fs::write(&csv, text).unwrap();
    let csv = csv.to_str().unwrap().to_string();
    let mut identical = Vec::new();
    let commands: Vec<(&str, Vec<&str>)> = vec![
        (
            "fit-linear",
            vec!["fit-linear", "--input", &csv, "--response", "y", "--covariates", "x", "--tau", "0.25,0.75",
                 "--iterations", "2000", "--burn-in", "500", "--seed", "11"],
        ),
        (
            "fit-gam",
            vec!["fit-gam", "--input", &csv, "--response", "y", "--covariates", "x", "--smooth", "z:8",
                 "--iterations", "1500", "--burn-in", "500", "--seed", "11"],
        ),
        (
            "simulate",
            vec!["simulate", "--experiment", "mixture", "--replicates", "2", "--tau", "0.1,0.5", "--iterations",
                 "2000", "--burn-in", "500", "--seed", "11"],
        ),
    ];
    for (name, args) in &commands {
        let runs: Vec<_> = ["a", "b"]
            .iter()
            .map(|r| {
                let out = tmp.path().join(format!("{name}_{r}"));
                let mut a = args.clone();
                let o = out.to_str().unwrap().to_string();
                a.extend(["--output", &o]);
                let ok = sepqr(&a);
                (ok, read_dir_bytes(&out))
            })
            .collect();
        identical.push((name.to_string(), runs[0].0 && runs[1].0 && !runs[0].1.is_empty() && runs[0].1 == runs[1].1));
    }
    let draws = tmp.path().join("fit-linear_a").join("draws_tau0.25.csv");
    let runs: Vec<_> = ["sa", "sb"]
        .iter()
        .map(|r| {
            let out = tmp.path().join(r);
            let ok = sepqr(&["summarize", "--input", draws.to_str().unwrap(), "--output", out.to_str().unwrap()]);
            (ok, read_dir_bytes(&out))
        })
        .collect();
    identical.push(("summarize".into(), runs[0].0 && runs[1].0 && runs[0].1 == runs[1].1));
    let ok = identical.iter().all(|(_, v)| *v);
    let detail = identical
        .iter()
        .map(|(n, v)| format!("{n} {}", if *v { "identical" } else { "DIFFERS" }))
        .collect::<Vec<_>>()
        .join(", ");
    outcome(ok, detail)
}

struct Criterion {
    id: u8,
    name: &'static str,
    /// Runtime bound, where one is stated as a hard limit.
    budget: Option<Duration>,
    /// Whether a failure fails the run.
    required: bool,
    run: fn() -> Outcome,
}

fn main() {
    let criteria = [
        Criterion { id: 1, name: "quantile identity", budget: Some(Duration::from_secs(1)), required: true, run: c1_quantile_identity },
        Criterion { id: 2, name: "distribution reductions", budget: Some(Duration::from_secs(1)), required: true, run: c2_reductions },
        Criterion { id: 3, name: "sampler exactness", budget: Some(Duration::from_secs(30)), required: true, run: c3_samplers },
        Criterion { id: 4, name: "MCMC correctness", budget: Some(Duration::from_secs(60)), required: true, run: c4_mcmc_correctness },
        Criterion { id: 5, name: "contaminated mixture pattern", budget: None, required: false, run: c5_mixture },
        Criterion { id: 6, name: "sparse regression pattern", budget: None, required: false, run: c6_sparse_regression },
        Criterion { id: 7, name: "nonlinear curve pattern", budget: None, required: false, run: c7_curves },
        Criterion { id: 8, name: "structural identities", budget: Some(Duration::from_secs(1)), required: true, run: c8_structure },
        Criterion { id: 9, name: "determinism", budget: None, required: true, run: c9_determinism },
    ];
    // `cargo test -- <filter>` style selection by criterion number
    let only: Vec<u8> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut required_failures = 0;
    for c in criteria.iter().filter(|c| only.is_empty() || only.contains(&c.id)) {
        let start = Instant::now();
        let o = (c.run)();
        let elapsed = start.elapsed();
        let in_time = c.budget.is_none_or(|b| elapsed <= b);
        let pass = o.pass && in_time;
        let budget = c.budget.map_or(String::new(), |b| format!(" of {:.0?}", b));
        println!(
            "criterion {} {:<28} {} ({:.2?}{budget}) {}",
            c.id,
            c.name,
            if pass { "PASS" } else { "FAIL" },
            elapsed,
            o.detail
        );
        if c.required && !pass {
            required_failures += 1;
        }
    }
    if required_failures > 0 {
        eprintln!("{required_failures} required acceptance criteria failed");
        std::process::exit(1);
    }
}
