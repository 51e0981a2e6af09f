//! Two-point modulus of concavity for `v = −log u`.

use std::f64::consts::PI;

use super::{band_nodes, sample_pairs, CheckResult, SamplerConfig};
use crate::eigensolver::{gradient, GridField};
use crate::geometry::Point;
use crate::transforms::log_neg_field;
use crate::{Error, Result};

/// `rhs − lhs` for `⟨∇v(z) − ∇v(y), (z−y)/|z−y|⟩ ≥ (2π/D)·tan(π|z−y|/(2D))`.
fn violation(py: Point, pz: Point, gy: [f64; 2], gz: [f64; 2], diameter: f64) -> f64 {
    let d = [pz[0] - py[0], pz[1] - py[1]];
    let len = d[0].hypot(d[1]);
    let lhs = ((gz[0] - gy[0]) * d[0] + (gz[1] - gy[1]) * d[1]) / len;
    let rhs = 2.0 * PI / diameter * (PI * len / (2.0 * diameter)).tan();
    rhs - lhs
}

/// The modulus inequality at explicit pairs of points with supplied gradients
/// of `v`. The smallest violation is reported as the metric `min_violation`.
pub fn ac_modulus_on_pairs(
    points: &[Point],
    grads: &[[f64; 2]],
    pairs: &[(usize, usize)],
    diameter: f64,
    tolerance: f64,
) -> Result<CheckResult> {
    if points.len() != grads.len() {
        return Err(Error::MaskMismatch(format!("{} points but {} gradients", points.len(), grads.len())));
    }
    let mut worst = (f64::NEG_INFINITY, Vec::new());
    let mut lowest = f64::INFINITY;
    for &(y, z) in pairs {
        if points[y] == points[z] {
            return Err(Error::InvalidParameter(format!("pair ({y}, {z}) has coincident points")));
        }
        let v = violation(points[y], points[z], grads[y], grads[z], diameter);
        lowest = lowest.min(v);
        if v > worst.0 {
            worst = (v, vec![y, z]);
        }
    }
    if pairs.is_empty() {
        return Ok(CheckResult::vacuous("ac_modulus", tolerance));
    }
    Ok(CheckResult::measured("ac_modulus", worst.0, tolerance, pairs.len(), worst.1)
        .input("diameter", diameter)
        .metric("min_violation", lowest))
}

/// Samples the modulus inequality on banded node pairs, with `∇v` from the
/// solver's gradient operator. Tolerance `10·h·max|∇v|` over the band.
pub fn ac_modulus_check(u: &GridField, diameter: f64, sampler: &SamplerConfig) -> Result<CheckResult> {
    sampler.validate()?;
    let mask = u.mask();
    let band = sampler.band_for(mask);
    let nodes = band_nodes(mask, band);
    if nodes.len() < 2 {
        return Err(Error::EmptyBand(band));
    }
    if let Some(&k) = nodes.iter().find(|&&k| !(u.values()[k] > 0.0)) {
        return Err(Error::DomainViolation { what: "u", value: u.values()[k] });
    }
    // Values outside the band are never read by central differences at banded
    // nodes, so clamping them only keeps the logarithm finite.
    let positive = u.with_values(u.values().iter().map(|&x| x.max(f64::MIN_POSITIVE)).collect(), u.role())?;
    let v = log_neg_field(&positive)?;
    let grads = gradient(mask, v.values())?;
    let max_grad = nodes.iter().map(|&k| grads[k][0].hypot(grads[k][1])).fold(0.0, f64::max);
    let h = mask.h();
    let tolerance = 10.0 * h * max_grad;
    let (worst, location, samples) = sample_pairs(sampler.seed, sampler.pair_count, &nodes, |a, b| {
        Some((violation(mask.point(a), mask.point(b), grads[a], grads[b], diameter), vec![a, b]))
    });
    Ok(CheckResult::measured("ac_modulus", worst, tolerance, samples, location)
        .input("h", h)
        .input("max_grad_v", max_grad)
        .input("diameter", diameter)
        .input("band", band))
}
