//! Equally spaced B-spline bases and difference penalties.

use nalgebra::{DMatrix, DVector};

use crate::error::{domain, Result};

/// Knot layout of an equally spaced B-spline basis on `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KnotGrid {
    pub lo: f64,
    pub hi: f64,
    /// Number of interior knots.
    pub interior: usize,
    /// Spline order (polynomial degree plus one).
    pub order: usize,
}

impl KnotGrid {
    pub fn new(lo: f64, hi: f64, interior: usize, order: usize) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return domain(format!("covariate range [{lo}, {hi}] is degenerate"));
        }
        if interior < 1 || order < 1 {
            return domain(format!(
                "need at least one interior knot and order >= 1, got {interior} and {order}"
            ));
        }
        Ok(Self { lo, hi, interior, order })
    }

    /// Number of basis functions, `interior + order`.
    pub fn len(&self) -> usize {
        self.interior + self.order
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn spacing(&self) -> f64 {
        (self.hi - self.lo) / (self.interior + 1) as f64
    }

    /// Knot `i` of the extended sequence, `i = 0 .. interior + 2 order`.
    fn knot(&self, i: usize) -> f64 {
        self.lo + (i as f64 - (self.order as f64 - 1.0)) * self.spacing()
    }

    /// Writes the `order` non-zero basis values at `x` into `out` and returns
    /// the index of the first one. Points outside the range are clamped.
    pub fn eval_nonzero(&self, x: f64, out: &mut [f64]) -> usize {
        let d = self.order;
        debug_assert!(out.len() >= d);
        let h = self.spacing();
        let x = x.clamp(self.lo, self.hi);
        let m = (((x - self.lo) / h).floor() as isize).clamp(0, self.interior as isize) as usize;
        let span = m + d - 1;
        let mut left = vec![0.0; d];
        let mut right = vec![0.0; d];
        out[0] = 1.0;
        for j in 1..d {
            left[j] = x - self.knot(span + 1 - j);
            right[j] = self.knot(span + j) - x;
            let mut saved = 0.0;
            for r in 0..j {
                let temp = out[r] / (right[r + 1] + left[j - r]);
                out[r] = saved + right[r + 1] * temp;
                saved = left[j - r] * temp;
            }
            out[j] = saved;
        }
        m
    }

    /// Uncentred `n x (interior + order)` basis matrix at `z`.
    pub fn basis(&self, z: &[f64]) -> DMatrix<f64> {
        let mut b = DMatrix::zeros(z.len(), self.len());
        let mut vals = vec![0.0; self.order];
        for (t, &x) in z.iter().enumerate() {
            let first = self.eval_nonzero(x, &mut vals);
            for (r, v) in vals.iter().enumerate() {
                b[(t, first + r)] = *v;
            }
        }
        b
    }
}

/// B-spline basis of the given order with `k` equally spaced interior knots
/// on `[min z, max z]`, before centring.
pub fn bspline_basis_raw(z: &[f64], k: usize, order: usize) -> Result<(DMatrix<f64>, KnotGrid)> {
    if z.is_empty() {
        return domain("covariate has no observations");
    }
    let lo = z.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let grid = KnotGrid::new(lo, hi, k, order)?;
    Ok((grid.basis(z), grid))
}

/// Column-centred B-spline basis, `T x (k + order)`, and the subtracted
/// column means.
pub fn build_bspline_basis(z: &[f64], k: usize, order: usize) -> Result<(DMatrix<f64>, DVector<f64>)> {
    let (mut b, _) = bspline_basis_raw(z, k, order)?;
    let means = DVector::from_iterator(b.ncols(), b.column_iter().map(|c| c.mean()));
    for (j, mut col) in b.column_iter_mut().enumerate() {
        col.add_scalar_mut(-means[j]);
    }
    Ok((b, means))
}

/// `(m - delta) x m` matrix of `delta`-th order differences.
pub fn build_difference_matrix(m: usize, delta: usize) -> Result<DMatrix<f64>> {
    if m <= delta {
        return domain(format!("difference order {delta} needs more than {delta} coefficients, got {m}"));
    }
    let mut d = DMatrix::<f64>::identity(m, m);
    for _ in 0..delta {
        let r = d.nrows();
        d = DMatrix::from_fn(r - 1, m, |i, j| d[(i + 1, j)] - d[(i, j)]);
    }
    Ok(d)
}
