//! Shortley–Weller discretisation of the Dirichlet Laplacian, its first
//! eigenpair, and closed-form reference spectra.

mod field;
mod operator;
mod reference;
mod solver;

pub use field::{GridField, PlsfFile, Role};
pub use operator::{apply_laplacian, gradient, hessian, hessian_fourth_order, min_eigenvalue_2x2, spectral_norm_2x2};
pub use reference::{bessel_j0, j01, reference_lambda1};
pub use solver::{
    eigen_residual, rayleigh_quotient, richardson_lambda, smallest_eigenpair, solve_domain, EigenResult,
    RichardsonEstimate, SolverOptions,
};
