//! Multivariate Laplace kernel for a group of spline coefficients.

use nalgebra::{DMatrix, DVector};

use crate::error::{check_dim, domain, Result};

/// `theta' P theta`, clipped at zero against round-off for a PSD `P`.
pub fn quadratic_form(theta: &DVector<f64>, penalty: &DMatrix<f64>) -> f64 {
    (penalty * theta).dot(theta).max(0.0)
}

/// θ-dependent part of the group-lasso log prior,
/// `m ln h - h sqrt(theta' P theta)` with `m = len(theta)`.
///
/// The `|P|^{1/2}` factor is left out: the difference penalty is singular.
pub fn mvlaplace_log_kernel(theta: &DVector<f64>, h: f64, penalty: &DMatrix<f64>) -> Result<f64> {
    check_dim(theta.len(), penalty.nrows(), "penalty rows")?;
    check_dim(theta.len(), penalty.ncols(), "penalty columns")?;
    if !(h > 0.0 && h.is_finite()) {
        return domain(format!("group-lasso scale h must be positive, got {h}"));
    }
    let q = quadratic_form(theta, penalty);
    Ok(theta.len() as f64 * h.ln() - h * q.sqrt())
}
