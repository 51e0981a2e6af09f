//! Checks that need the convex envelope of `w_κ`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{default_envelope_band, eps_conv, CheckResult};
use crate::eigensolver::GridField;
use crate::envelope::{convex_envelope, Envelope};
use crate::geometry::GridMask;
use crate::transforms::{locality_data, omega_kappa_mask, w_field, LocalityData};
use crate::Result;

/// Slope bound on gap facets: wherever `w − w** > ε_conv`, the facet slope `p`
/// must satisfy `|p|² ≥ π²/(2D²)`. Tolerance `(π²/(2D²))·4h/D`; an empty gap
/// set is a vacuous pass.
pub fn envelope_gradient_check(w: &GridField, env: &Envelope, diameter: f64) -> Result<CheckResult> {
    let mask = w.mask();
    let eps = eps_conv(w, env.band())?;
    let bound = PI * PI / (2.0 * diameter * diameter);
    let tolerance = bound * 4.0 * mask.h() / diameter;
    let values = w.values();
    let gaps: Vec<usize> =
        (0..w.len()).filter(|&k| env.included()[k] && values[k] - env.values()[k] > eps.value).collect();
    let result = if gaps.is_empty() {
        CheckResult::vacuous("envelope_gradient", tolerance)
    } else {
        let mut worst = (f64::NEG_INFINITY, 0);
        for &k in &gaps {
            let Some(f) = env.node_facet(k) else { continue };
            let p = env.facets()[f].gradient;
            let v = bound - (p[0] * p[0] + p[1] * p[1]);
            if v > worst.0 {
                worst = (v, k);
            }
        }
        CheckResult::measured("envelope_gradient", worst.0, tolerance, gaps.len(), vec![worst.1])
    };
    Ok(result
        .input("bound", bound)
        .input("h", mask.h())
        .input("diameter", diameter)
        .input("eps_conv", eps.value)
        .metric("gap_nodes", gaps.len() as f64))
}

/// Superlevel data and the check outcome of [`locality_check`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalityReport {
    pub data: LocalityData,
    /// Number of nodes in `Ω_κ`.
    pub members: usize,
    pub check: CheckResult,
}

/// Deepest non-member node inside the convex hull of the members, in grid
/// units; zero when every interior node of the hull belongs to the set.
fn hull_hole_depth(mask: &GridMask, members: &[bool]) -> (f64, Option<usize>) {
    let coords: Vec<[i64; 2]> =
        (0..mask.len()).filter(|&k| members[k]).map(|k| mask.grid_index(k).map(|c| c as i64)).collect();
    let hull = convex_hull(coords);
    let mut worst = (0.0, None);
    for k in (0..mask.len()).filter(|&k| !members[k]) {
        let q = mask.grid_index(k).map(|c| c as i64);
        let depth = if mask.dimension() == 1 || hull.len() < 3 {
            // Segment hull (or a point): depth along the line through it.
            match hull.as_slice() {
                [a, b] if orient(*a, *b, q) == 0 => {
                    let t = dot(sub(q, *a), sub(*b, *a)) as f64;
                    let len2 = dot(sub(*b, *a), sub(*b, *a)) as f64;
                    (t.min(len2 - t) / len2.sqrt()).max(0.0)
                }
                _ => 0.0,
            }
        } else {
            hull.iter()
                .zip(hull.iter().cycle().skip(1))
                .map(|(&a, &b)| {
                    let e = sub(b, a);
                    orient(a, b, q) as f64 / (dot(e, e) as f64).sqrt()
                })
                .fold(f64::INFINITY, f64::min)
                .max(0.0)
        };
        if depth > worst.0 {
            worst = (depth, Some(k));
        }
    }
    worst
}

fn sub(a: [i64; 2], b: [i64; 2]) -> [i64; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

fn dot(a: [i64; 2], b: [i64; 2]) -> i64 {
    a[0] * b[0] + a[1] * b[1]
}

fn orient(a: [i64; 2], b: [i64; 2], c: [i64; 2]) -> i64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

/// Counter-clockwise hull of integer points without collinear vertices.
fn convex_hull(mut pts: Vec<[i64; 2]>) -> Vec<[i64; 2]> {
    pts.sort_unstable();
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut hull: Vec<[i64; 2]> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &[i64; 2]>> =
            if pass == 0 { Box::new(pts.iter()) } else { Box::new(pts.iter().rev()) };
        for &p in iter {
            while hull.len() >= start + 2 && orient(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0 {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    if hull.len() == 2 && hull[0] == hull[1] {
        hull.pop();
    }
    hull
}

/// Local convexity on the superlevel set `Ω_κ = {u > ū_κ}`: the set must be
/// nonempty, discretely convex (no non-member node deeper than one cell inside
/// the hull of the members), and `w_κ − w_κ** ≤ ε_conv` on its nodes.
///
/// The worst violation is the largest envelope gap on `Ω_κ`; it is `None` when
/// the set is empty or not convex.
pub fn locality_check(
    u: &GridField,
    lambda1: f64,
    kappa: f64,
    envelope_band: Option<f64>,
) -> Result<LocalityReport> {
    let mask = u.mask();
    let diameter = mask.domain().diameter();
    let data = locality_data(kappa, lambda1, diameter)?;
    let members = omega_kappa_mask(u, data.u_bar);
    let count = members.iter().filter(|&&m| m).count();
    let band = envelope_band.unwrap_or_else(|| default_envelope_band(mask));
    let w = w_field(u, kappa)?;
    let eps = eps_conv(&w, band)?;
    let (depth, hole) = hull_hole_depth(mask, &members);
    let convex = depth <= 1.0 + 1e-9;
    let check = if count == 0 || !convex {
        let mut r = CheckResult::structural_failure("locality", eps.value, count);
        r.worst_location = hole.into_iter().collect();
        r
    } else {
        let env = convex_envelope(&w, band)?;
        let mut worst = (f64::NEG_INFINITY, 0);
        for k in (0..mask.len()).filter(|&k| members[k]) {
            let gap = w.values()[k] - env.values()[k];
            if gap > worst.0 {
                worst = (gap, k);
            }
        }
        CheckResult::measured("locality", worst.0, eps.value, count, vec![worst.1])
    };
    let check = check
        .input("h", eps.h)
        .input("m2", eps.m2)
        .input("range", eps.range)
        .input("band", band)
        .metric("members", count as f64)
        .metric("hull_hole_depth_cells", depth)
        .metric("u_bar", data.u_bar)
        .metric("w_bar", data.w_bar);
    Ok(LocalityReport { data, members: count, check })
}
