//! Densities, distribution functions and samplers.

pub mod gig;
pub mod mvlaplace;
pub mod sep;
pub mod univariate;

pub use gig::{gig_sample, GigParams};
pub use mvlaplace::{mvlaplace_log_kernel, quadratic_form};
pub use sep::{sep_cdf, sep_log_pdf, sep_quantile, sep_sample, SepKernel, SepParams};
pub use univariate::{
    laplace_log_pdf, Exponential, Gamma, InverseGamma, Normal, ScaledBeta, TruncatedNormal,
};
