//! JSON documents written by the commands.

use pls_core::eigensolver::RichardsonEstimate;
use pls_core::geometry::{DomainSpec, GridMask};
use pls_core::verify::CheckResult;
use serde::Serialize;

pub const TOOL: &str = "pls";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Serialize, Debug)]
pub struct GridInfo {
    pub dimension: usize,
    pub h: f64,
    pub dims: [usize; 2],
    pub origin: [f64; 2],
    pub nodes: usize,
}

impl GridInfo {
    pub fn of(mask: &GridMask) -> Self {
        GridInfo { dimension: mask.dimension(), h: mask.h(), dims: mask.dims(), origin: mask.origin(), nodes: mask.len() }
    }
}

/// Sidecar written next to a solved field.
#[derive(Serialize, Debug)]
pub struct SolveSidecar {
    pub tool: &'static str,
    pub version: &'static str,
    pub domain: DomainSpec,
    pub grid: GridInfo,
    pub lambda1: f64,
    pub residual: f64,
    pub iterations: usize,
    pub inner_iterations: usize,
    pub diameter: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub richardson: Option<RichardsonEstimate>,
}

#[derive(Serialize, Debug)]
pub struct ThresholdEntry {
    pub kappa: f64,
    pub w_bar: f64,
    pub u_bar: f64,
    pub omega_nodes: usize,
}

#[derive(Serialize, Debug)]
pub struct ThresholdReport {
    pub lambda1: f64,
    pub diameter: f64,
    pub kappa_bar: f64,
    pub kappas: Vec<ThresholdEntry>,
}

/// Checks run for one `(κ, α)` pair.
#[derive(Serialize, Debug)]
pub struct Run {
    pub kappa: f64,
    pub alpha: f64,
    /// Superlevel data; absent at `κ = 1`.
    pub w_bar: Option<f64>,
    pub u_bar: Option<f64>,
    pub omega_nodes: Option<usize>,
    pub checks: Vec<CheckResult>,
}

#[derive(Serialize, Debug)]
pub struct Report {
    pub tool: &'static str,
    pub version: &'static str,
    pub domain: DomainSpec,
    pub grid: GridInfo,
    pub lambda1: f64,
    /// `solved`, `sidecar` or `rayleigh_quotient`.
    pub lambda_source: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub richardson: Option<RichardsonEstimate>,
    pub diameter: f64,
    pub kappa_bar: f64,
    pub seed: u64,
    pub band: f64,
    pub pair_count: usize,
    pub runs: Vec<Run>,
    pub pass: bool,
    /// Names of checks that passed with nothing to measure, as `name@kappa`.
    pub vacuous: Vec<String>,
}
