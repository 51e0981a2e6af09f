//! Empirical search for the largest `κ` at which `w_κ` tests convex.

use serde::{Deserialize, Serialize};

use super::{hessian_convexity_check, CheckResult};
use crate::eigensolver::GridField;
use crate::transforms::{kappa_bar, w_field};
use crate::Result;

/// Largest value probed; `κ = 1` itself makes `w` vanish at the maximum.
pub const SWEEP_TOP: f64 = 1.0 - 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub kappa: f64,
    pub pass: bool,
    pub worst_violation: Option<f64>,
    pub tolerance: f64,
}

/// Outcome of [`sweep_kappa`]. The threshold is an observation on one grid,
/// not a proven bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub kappa_bar: f64,
    /// Largest passing `κ` found, `None` when even `κ̄` fails.
    pub threshold: Option<f64>,
    pub log: Vec<SweepPoint>,
    pub label: String,
}

/// Bisects `κ ∈ [κ̄, 1)` on [`hessian_convexity_check`] of `w_κ`. The top value
/// [`SWEEP_TOP`] is tried first; if it passes no bisection is needed.
pub fn sweep_kappa(u: &GridField, lambda1: f64, band: f64, iterations: usize) -> Result<SweepResult> {
    let kb = kappa_bar(lambda1, u.mask().domain().diameter())?;
    let mut log = Vec::new();
    let mut probe = |kappa: f64| -> Result<bool> {
        let r: CheckResult = hessian_convexity_check(&w_field(u, kappa)?, band)?;
        log.push(SweepPoint { kappa, pass: r.pass, worst_violation: r.worst_violation, tolerance: r.tolerance });
        Ok(r.pass)
    };
    let threshold = if probe(SWEEP_TOP)? {
        Some(SWEEP_TOP)
    } else if !probe(kb)? {
        None
    } else {
        let (mut lo, mut hi) = (kb, SWEEP_TOP);
        for _ in 0..iterations {
            let mid = 0.5 * (lo + hi);
            if probe(mid)? {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Some(lo)
    };
    Ok(SweepResult { kappa_bar: kb, threshold, log, label: "empirical, not proven".into() })
}
