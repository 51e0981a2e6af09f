//! Segment inequalities `L_α(κu(z)) ≥ (1−t)L_α(κu(x)) + tL_α(κu(y))`.

use serde::{Deserialize, Serialize};

use super::{band_nodes, interpolate, max_hessian_norm, sample_pairs, CheckResult, SamplerConfig};
use crate::eigensolver::GridField;
use crate::geometry::GridMask;
use crate::transforms::{l_alpha, ConcavityParams};
use crate::{Error, Result};

fn lerp(mask: &GridMask, a: usize, b: usize, t: f64) -> [f64; 2] {
    let (p, q) = (mask.point(a), mask.point(b));
    [(1.0 - t) * p[0] + t * q[0], (1.0 - t) * p[1] + t * q[1]]
}

/// `L_α(κs)` for `s` in `(0, 1]`, clamping roundoff above 1.
fn lk(alpha: f64, kappa: f64, s: f64) -> f64 {
    l_alpha(alpha, (kappa * s).min(1.0)).unwrap_or(f64::NEG_INFINITY)
}

/// Margin `LHS − RHS` of the segment inequality at one triple.
fn margin(alpha: f64, kappa: f64, ux: f64, uy: f64, uz: f64, t: f64) -> f64 {
    lk(alpha, kappa, uz) - ((1.0 - t) * lk(alpha, kappa, ux) + t * lk(alpha, kappa, uy))
}

fn check_u(u: &GridField, kappa: f64) -> Result<()> {
    match u.values().iter().find(|&&v| !(v > 0.0) || kappa * v > 1.0 + 1e-12) {
        Some(&v) => Err(Error::DomainViolation { what: "u", value: v }),
        None => Ok(()),
    }
}

/// Samples the `(α, κ)` segment inequality on pairs of banded nodes, with `u`
/// interpolated bilinearly at the intermediate point.
///
/// The tolerance bounds the interpolation error: `κ·max|L_α′(κu)|·(h²/4)·M₂`,
/// with `M₂` the largest Hessian norm of `u` on the band, plus `10⁻¹²` for
/// roundoff.
pub fn segment_concavity_check(u: &GridField, params: ConcavityParams, sampler: &SamplerConfig) -> Result<CheckResult> {
    sampler.validate()?;
    let ConcavityParams { alpha, kappa } = params;
    check_u(u, kappa)?;
    let mask = u.mask();
    let band = sampler.band_for(mask);
    let nodes = band_nodes(mask, band);
    if nodes.len() < 2 {
        return Err(Error::EmptyBand(band));
    }
    let values = u.values();
    let m2 = max_hessian_norm(mask, values, &nodes)?;
    // L_α′(s) = α(−log s)^{α−1}/s, unbounded only where κu = 1.
    let max_slope = nodes
        .iter()
        .map(|&k| kappa * values[k])
        .filter(|&s| s < 1.0)
        .map(|s| alpha * (-s.ln()).powf(alpha - 1.0) / s)
        .fold(0.0, f64::max);
    let h = mask.h();
    let tolerance = kappa * max_slope * 0.25 * h * h * m2 + 1e-12;
    let ts = &sampler.t_values;
    let (worst, location, pairs) = sample_pairs(sampler.seed, sampler.pair_count, &nodes, |a, b| {
        let mut worst = f64::NEG_INFINITY;
        for &t in ts {
            let uz = interpolate(mask, values, lerp(mask, a, b, t));
            worst = worst.max(-margin(alpha, kappa, values[a], values[b], uz, t));
        }
        Some((worst, vec![a, b]))
    });
    Ok(CheckResult::measured("segment_concavity", worst, tolerance, pairs * ts.len(), location)
        .input("alpha", alpha)
        .input("kappa", kappa)
        .input("h", h)
        .input("m2", m2)
        .input("max_slope", max_slope)
        .input("band", band))
}

/// Premise and conclusion pairs for [`alpha_kappa_monotonicity`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityPairs {
    /// `(α, β)` with `α ≤ β`.
    pub alpha_pairs: Vec<(f64, f64)>,
    /// `(κ, κ′)` with `κ′ ≤ κ`.
    pub kappa_pairs: Vec<(f64, f64)>,
}

impl Default for MonotonicityPairs {
    fn default() -> Self {
        MonotonicityPairs {
            alpha_pairs: vec![(0.5, 0.75), (0.5, 1.0), (0.25, 0.5), (0.75, 1.0), (0.5, 0.5)],
            kappa_pairs: vec![(1.0, 0.5), (0.99, 0.9), (0.5, 0.25), (0.2, 0.1), (0.9, 0.9)],
        }
    }
}

/// Whenever the `(α, κ)` segment inequality holds with nonnegative margin at a
/// sampled triple, the `(β, κ)` and `(α, κ′)` inequalities must hold at the
/// same triple with margin at least `−10⁻¹²`. The worst violation is the most
/// negative implied margin; triples whose premise fails are not counted.
///
/// Reversed pairs (`β < α` or `κ′ > κ`) are accepted, which gives this check
/// its negative controls.
pub fn alpha_kappa_monotonicity(
    u: &GridField,
    pairs: &MonotonicityPairs,
    sampler: &SamplerConfig,
) -> Result<CheckResult> {
    sampler.validate()?;
    for &(a, b) in &pairs.alpha_pairs {
        ConcavityParams::new(a, 1.0)?;
        ConcavityParams::new(b, 1.0)?;
    }
    for &(k, k2) in &pairs.kappa_pairs {
        ConcavityParams::new(1.0, k)?;
        ConcavityParams::new(1.0, k2)?;
        check_u(u, k.max(k2))?;
    }
    let mask = u.mask();
    let band = sampler.band_for(mask);
    let nodes = band_nodes(mask, band);
    if nodes.len() < 2 {
        return Err(Error::EmptyBand(band));
    }
    let values = u.values();
    let ts = &sampler.t_values;
    let tolerance = 1e-12;
    let (worst, location, _) = sample_pairs(sampler.seed, sampler.pair_count, &nodes, |a, b| {
        let mut worst = f64::NEG_INFINITY;
        for &t in ts {
            let (ux, uy) = (values[a], values[b]);
            let uz = interpolate(mask, values, lerp(mask, a, b, t));
            for &(alpha, beta) in &pairs.alpha_pairs {
                for &(kappa, kappa2) in &pairs.kappa_pairs {
                    if margin(alpha, kappa, ux, uy, uz, t) >= 0.0 {
                        worst = worst.max(-margin(beta, kappa, ux, uy, uz, t));
                        worst = worst.max(-margin(alpha, kappa2, ux, uy, uz, t));
                    }
                }
            }
        }
        // Premise never held: nothing implied at this pair.
        (worst > f64::NEG_INFINITY).then(|| (worst, vec![a, b]))
    });
    let combos = pairs.alpha_pairs.len() * pairs.kappa_pairs.len();
    let samples = sampler.pair_count * ts.len() * combos;
    let mut result = if worst == f64::NEG_INFINITY {
        CheckResult::vacuous("alpha_kappa_monotonicity", tolerance)
    } else {
        CheckResult::measured("alpha_kappa_monotonicity", worst, tolerance, samples, location)
    };
    result.samples = samples;
    Ok(result.input("band", band).metric("combinations", combos as f64))
}
