//! First Dirichlet eigenpairs on convex planar domains and numerical checks of
//! the (1/2)-logconcavity of the ground state.
//!
//! The crate is organised bottom-up:
//!
//! - [`geometry`]: exact convex domains and their rasterisation to masked grids.
//! - [`eigensolver`]: grid fields, the Shortley–Weller Laplacian, inverse
//!   iteration and closed-form reference spectra.
//! - [`transforms`]: the scalar maps `L_α`, `κ̄(Ω)`, `w_κ`, `u_κ`, `Ψ_κ` and the
//!   superlevel data `w̄_κ`, `ū_κ`, `Ω_κ`.
//! - [`envelope`]: discrete convex envelopes as lower hulls of lifted samples.
//! - [`verify`]: checks returning structured [`verify::CheckResult`]s.

// `!(x > 0.0)` is used on purpose so that NaN inputs are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod eigensolver;
pub mod envelope;
pub mod error;
pub mod geometry;
pub mod transforms;
pub mod verify;

pub use error::{Error, Result};
