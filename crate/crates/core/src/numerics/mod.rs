//! Numerical kernels: normal and incomplete beta functions, adaptive
//! quadrature, bracketing root finding and monotone spline interpolation.

pub mod quadrature;
pub mod roots;
pub mod special;
pub mod spline;

pub use quadrature::{integrate, try_integrate, try_integrate_with, Estimate, QuadratureOptions};
pub use roots::{find_root, try_find_root};
pub use special::{
    ln_beta, ln_gamma, regularized_incomplete_beta, regularized_incomplete_beta_complement,
    std_normal_cdf, std_normal_pdf, std_normal_sf,
};
pub use spline::{eval_spline, fit_monotone_spline, MonotoneSpline};
