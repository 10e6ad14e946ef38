//! Fixtures shared by the benchmarks.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sepqr_core::distributions::{sep_sample, SepParams};
use sepqr_core::gam::GamModelSpec;
use sepqr_core::linear_sampler::LinearModelSpec;
use sepqr_core::simulation::{curve_model, gen_curve_data, Curve, CurveNoise, CurveSimSpec};

/// Linear model with an intercept, `p - 1` uniform covariates and SEP errors.
pub fn linear_fixture(t: usize, p: usize, seed: u64) -> LinearModelSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = DMatrix::from_fn(t, p, |_, j| if j == 0 { 1.0 } else { rng.random::<f64>() * 2.0 - 1.0 });
    let beta = DVector::from_fn(p, |j, _| 1.0 / (j + 1) as f64);
    let err = sep_sample(&SepParams::new(0.0, 1.0, 1.2, 0.5).unwrap(), t, &mut rng).unwrap();
    LinearModelSpec::new(x.clone(), &x * beta + DVector::from_vec(err), 0.5).unwrap()
}

/// One simulated curve dataset with its additive model at `tau`.
pub fn curve_fixture(curve: Curve, tau: f64, seed: u64) -> GamModelSpec {
    let spec = CurveSimSpec::new(curve, CurveNoise::GAUSSIAN);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (y, x) = gen_curve_data(&spec, &mut rng);
    curve_model(&y, &x, spec.knots, tau).unwrap()
}

/// Residuals of a fixture at its generating coefficients.
pub fn residuals(spec: &LinearModelSpec) -> Vec<f64> {
    let beta = DVector::from_fn(spec.p(), |j, _| 1.0 / (j + 1) as f64);
    (&spec.y - &spec.x * beta).iter().copied().collect()
}
