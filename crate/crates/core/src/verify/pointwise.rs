//! Nodewise checks over the interior band.

use super::{band_nodes, eps_conv, CheckResult};
use crate::eigensolver::{apply_laplacian, gradient, hessian, hessian_fourth_order, min_eigenvalue_2x2, GridField};
use crate::geometry::GridMask;
use crate::{Error, Result};

/// Constant of the PDE residual tolerance `C·h²·λ₁²`.
///
/// Calibrated on the exact `w_κ` of `sin(πx)` at `κ = 1/2`: the median residual
/// there is about `0.2·h²λ₁²` and halves twice per halving of `h`.
pub const PDE_RESIDUAL_CONSTANT: f64 = 2.0;

fn nonempty_band(mask: &GridMask, band: f64) -> Result<Vec<usize>> {
    let nodes = band_nodes(mask, band);
    if nodes.is_empty() {
        Err(Error::EmptyBand(band))
    } else {
        Ok(nodes)
    }
}

fn check_lambda(lambda1: f64) -> Result<()> {
    if lambda1 > 0.0 && lambda1.is_finite() {
        Ok(())
    } else {
        Err(Error::DomainViolation { what: "lambda1", value: lambda1 })
    }
}

fn norm2(g: [f64; 2]) -> f64 {
    g[0] * g[0] + g[1] * g[1]
}

/// Largest `f(k)` over `nodes` and the node attaining it.
fn worst_over(nodes: &[usize], f: impl Fn(usize) -> f64) -> (f64, usize) {
    nodes.iter().map(|&k| (f(k), k)).fold((f64::NEG_INFINITY, usize::MAX), |a, b| if b.0 > a.0 { b } else { a })
}

/// Convexity of `w` through the smallest eigenvalue of its finite-difference
/// Hessian at banded nodes; the violation is minus that eigenvalue and the
/// tolerance is [`eps_conv`].
///
/// Two Hessians are evaluated and a node counts as non-convex only when both
/// say so. The 3-point stencil is monotone, so it never reports a kink of a
/// convex function (the apex of `w_κ` as `κ → 1`) as concave, but its `h²∂⁴`
/// error leaks the steep normal curvature near the boundary into the
/// tangential eigenvalue. The fourth-order stencil removes that error and is
/// wrong only at kinks. On smooth non-convex fields both converge to the true
/// eigenvalue. The metric `second_order_worst` is the 3-point value alone.
pub fn hessian_convexity_check(w: &GridField, band: f64) -> Result<CheckResult> {
    let mask = w.mask();
    let narrow = hessian(mask, w.values())?;
    let wide = hessian_fourth_order(mask, w.values())?;
    let nodes: Vec<usize> = band_nodes(mask, band).into_iter().filter(|&k| narrow[k].is_some()).collect();
    if nodes.is_empty() {
        return Err(Error::EmptyBand(band));
    }
    let eps = eps_conv(w, band)?;
    let second = |k: usize| -min_eigenvalue_2x2(narrow[k].expect("filtered"));
    let (second_worst, _) = worst_over(&nodes, second);
    let (worst, at) = worst_over(&nodes, |k| second(k).min(-min_eigenvalue_2x2(wide[k].expect("superset"))));
    Ok(CheckResult::measured("hessian_convexity", worst, eps.value, nodes.len(), vec![at])
        .input("h", eps.h)
        .input("m2", eps.m2)
        .input("range", eps.range)
        .input("band", band)
        .metric("second_order_worst", second_worst))
}

/// `|∇u|² + λ₁u² ≤ λ₁` at the given nodes with supplied gradients. The most
/// negative slack is reported as the metric `min_value`, so equality cases can
/// be asserted from both sides.
pub fn li_yau_with_gradients(
    values: &[f64],
    grads: &[[f64; 2]],
    nodes: &[usize],
    lambda1: f64,
    tolerance: f64,
) -> Result<CheckResult> {
    check_lambda(lambda1)?;
    if values.len() != grads.len() {
        return Err(Error::MaskMismatch(format!("{} values but {} gradients", values.len(), grads.len())));
    }
    if nodes.is_empty() {
        return Err(Error::EmptyBand(0.0));
    }
    let slack = |k: usize| norm2(grads[k]) + lambda1 * values[k] * values[k] - lambda1;
    let (worst, at) = worst_over(nodes, slack);
    let lowest = nodes.iter().map(|&k| slack(k)).fold(f64::INFINITY, f64::min);
    Ok(CheckResult::measured("li_yau", worst, tolerance, nodes.len(), vec![at]).metric("min_value", lowest))
}

/// Gradient bound `|∇u|² + λ₁u² ≤ λ₁` on banded nodes, tolerance
/// `10·h·λ₁^{3/2}·D`.
pub fn li_yau_check(u: &GridField, lambda1: f64, band: f64) -> Result<CheckResult> {
    let mask = u.mask();
    let nodes = nonempty_band(mask, band)?;
    let grads = gradient(mask, u.values())?;
    let (h, d) = (mask.h(), mask.domain().diameter());
    let tolerance = 10.0 * h * lambda1.powf(1.5) * d;
    Ok(li_yau_with_gradients(u.values(), &grads, &nodes, lambda1, tolerance)?
        .input("h", h)
        .input("lambda1", lambda1)
        .input("diameter", d)
        .input("band", band))
}

/// Residual of `−Δw + (1/w)[(2w² − 1)|∇w|² + λ₁/2] = 0` on banded nodes.
/// Passes when the median absolute residual is at most
/// `PDE_RESIDUAL_CONSTANT·h²·λ₁²`; the maximum is reported as a metric.
pub fn pde_residual_check(w: &GridField, lambda1: f64, band: f64) -> Result<CheckResult> {
    check_lambda(lambda1)?;
    let mask = w.mask();
    let nodes = nonempty_band(mask, band)?;
    let values = w.values();
    if let Some(&k) = nodes.iter().find(|&&k| !(values[k] >= 1e-10)) {
        return Err(Error::DomainViolation { what: "w", value: values[k] });
    }
    let lap = apply_laplacian(mask, values)?;
    let grads = gradient(mask, values)?;
    let residual = |k: usize| {
        let v = values[k];
        (lap[k] + ((2.0 * v * v - 1.0) * norm2(grads[k]) + 0.5 * lambda1) / v).abs()
    };
    let mut all: Vec<f64> = nodes.iter().map(|&k| residual(k)).collect();
    let (max, at) = worst_over(&nodes, residual);
    all.sort_by(f64::total_cmp);
    let n = all.len();
    let median = if n % 2 == 1 { all[n / 2] } else { 0.5 * (all[n / 2 - 1] + all[n / 2]) };
    let h = mask.h();
    let tolerance = PDE_RESIDUAL_CONSTANT * h * h * lambda1 * lambda1;
    Ok(CheckResult::measured("pde_residual", median, tolerance, n, vec![at])
        .input("h", h)
        .input("lambda1", lambda1)
        .input("constant", PDE_RESIDUAL_CONSTANT)
        .input("band", band)
        .metric("median", median)
        .metric("max", max))
}

/// Viscosity subsolution test `−Δ_h u_κ ≤ λ₁u_κ` on banded nodes, tolerance
/// `h²λ₁²`.
pub fn subsolution_check(u_kappa: &GridField, lambda1: f64, band: f64) -> Result<CheckResult> {
    check_lambda(lambda1)?;
    let mask = u_kappa.mask();
    let nodes = nonempty_band(mask, band)?;
    let values = u_kappa.values();
    let lap = apply_laplacian(mask, values)?;
    let (worst, at) = worst_over(&nodes, |k| lap[k] - lambda1 * values[k]);
    let h = mask.h();
    Ok(CheckResult::measured("subsolution", worst, h * h * lambda1 * lambda1, nodes.len(), vec![at])
        .input("h", h)
        .input("lambda1", lambda1)
        .input("band", band))
}

/// `|∇u_κ| ≤ √λ₁` on banded nodes, tolerance `10·h²·λ₁^{3/2}`.
pub fn lipschitz_check(u_kappa: &GridField, lambda1: f64, band: f64) -> Result<CheckResult> {
    check_lambda(lambda1)?;
    let mask = u_kappa.mask();
    let nodes = nonempty_band(mask, band)?;
    let grads = gradient(mask, u_kappa.values())?;
    let root = lambda1.sqrt();
    let (worst, at) = worst_over(&nodes, |k| norm2(grads[k]).sqrt() - root);
    let h = mask.h();
    Ok(CheckResult::measured("lipschitz", worst, 10.0 * h * h * lambda1.powf(1.5), nodes.len(), vec![at])
        .input("h", h)
        .input("lambda1", lambda1)
        .input("band", band))
}

/// Relative excess `∫|∇u_κ|²/(λ₁∫u_κ²) − 1`, tolerance `10⁻²`.
///
/// The Dirichlet integral sums squared differences over grid edges, including
/// the shortened edges to the boundary where `u_κ = 0`, so the gradient next
/// to the boundary is not lost; the mass uses the nodal rule.
pub fn rayleigh_check(u_kappa: &GridField, lambda1: f64) -> Result<CheckResult> {
    check_lambda(lambda1)?;
    let mask = u_kappa.mask();
    let values = u_kappa.values();
    let dim = mask.dimension();
    let h = mask.h();
    let mut edges = 0.0;
    for (k, &v) in values.iter().enumerate() {
        let s = mask.stencil(k);
        for axis in 0..dim {
            let (lo, hi) = (2 * axis, 2 * axis + 1);
            edges += match s.neighbors[hi] {
                Some(n) => (v - values[n]).powi(2),
                None => v * v / s.gaps[hi],
            };
            if s.neighbors[lo].is_none() {
                edges += v * v / s.gaps[lo];
            }
        }
    }
    let dirichlet = edges * h.powi(dim as i32 - 2);
    let mass: f64 = values.iter().map(|v| v * v).sum::<f64>() * h.powi(dim as i32);
    if !(mass > 0.0) {
        return Err(Error::Degenerate("u_kappa has zero mass".into()));
    }
    let excess = dirichlet / (lambda1 * mass) - 1.0;
    Ok(CheckResult::measured("rayleigh", excess, 1e-2, values.len(), Vec::new())
        .input("lambda1", lambda1)
        .metric("dirichlet_integral", dirichlet)
        .metric("mass", mass))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigensolver::Role;
    use crate::geometry::{make_domain, rasterize, DomainSpec};
    use crate::transforms::w_field;
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn interval_field(h: f64, f: impl Fn(f64) -> f64) -> GridField {
        let d = make_domain(&DomainSpec::Interval { a: 0.0, b: 1.0 }).unwrap();
        GridField::from_fn(Arc::new(rasterize(&d, h).unwrap()), Role::U, |p| f(p[0]))
    }

    fn unit_square(h: f64, f: impl Fn(f64, f64) -> f64) -> GridField {
        let spec = DomainSpec::Polygon { vertices: vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]] };
        let mask = Arc::new(rasterize(&make_domain(&spec).unwrap(), h).unwrap());
        GridField::from_fn(mask, Role::U, |p| f(p[0], p[1]))
    }

    #[test]
    fn hessian_of_sine_product_w_is_convex_and_double_well_is_not() {
        let u = unit_square(1.0 / 64.0, |x, y| (PI * x).sin() * (PI * y).sin());
        let w = w_field(&u, 1.0).unwrap();
        let r = hessian_convexity_check(&w, 0.0625).unwrap();
        assert!(r.pass, "{r:?}");
        let well = interval_field(0.005, |x| ((4.0 * x - 2.0).powi(2) - 1.0).powi(2));
        let r = hessian_convexity_check(&well, 0.02).unwrap();
        assert!(!r.pass);
        let hump = well.mask().point(r.worst_location[0])[0];
        assert!((hump - 0.5).abs() < 0.01, "{hump}");
    }

    #[test]
    fn cone_apex_is_convex_and_a_saddle_is_not() {
        // The wide stencil alone reports negative curvature beside the apex.
        let cone = unit_square(1.0 / 64.0, |x, y| (x - 0.5).hypot(y - 0.5));
        let r = hessian_convexity_check(&cone, 0.1).unwrap();
        assert!(r.pass, "{r:?}");
        let wide = crate::eigensolver::hessian_fourth_order(cone.mask(), cone.values()).unwrap();
        assert!(wide.iter().flatten().any(|&h| min_eigenvalue_2x2(h) < -1.0));
        let saddle = unit_square(1.0 / 64.0, |x, y| (x - 0.5).powi(2) - 0.1 * (y - 0.5).powi(2));
        let r = hessian_convexity_check(&saddle, 0.1).unwrap();
        assert!(!r.pass);
        assert!((r.worst_violation.unwrap() - 0.2).abs() < 1e-8);
        assert!((r.metrics["second_order_worst"] - 0.2).abs() < 1e-8);
    }

    #[test]
    fn affine_fields_have_zero_worst_eigenvalue() {
        let f = unit_square(1.0 / 32.0, |x, y| 3.0 * x - 2.0 * y + 1.0);
        let r = hessian_convexity_check(&f, 0.1).unwrap();
        assert!(r.pass);
        assert!(r.worst_violation.unwrap().abs() < 1e-9);
    }

    #[test]
    fn empty_band_is_an_error() {
        let f = unit_square(1.0 / 32.0, |_, _| 1.0);
        assert!(matches!(hessian_convexity_check(&f, 0.6), Err(Error::EmptyBand(_))));
        assert!(matches!(li_yau_check(&f, 1.0, 0.6), Err(Error::EmptyBand(_))));
    }

    #[test]
    fn li_yau_is_an_equality_for_the_analytic_sine() {
        let u = interval_field(1.0 / 256.0, |x| (PI * x).sin());
        let grads: Vec<[f64; 2]> = (0..u.len()).map(|k| [PI * (PI * u.mask().point(k)[0]).cos(), 0.0]).collect();
        let nodes: Vec<usize> = (0..u.len()).collect();
        let r = li_yau_with_gradients(u.values(), &grads, &nodes, PI * PI, 1e-12).unwrap();
        assert!(r.pass);
        assert!(r.metrics["min_value"] >= -1e-12);
        // Doubling the amplitude breaks the bound.
        let big: Vec<f64> = u.values().iter().map(|v| 2.0 * v).collect();
        let r = li_yau_with_gradients(&big, &grads, &nodes, PI * PI, 1e-12).unwrap();
        assert!(!r.pass);
    }

    fn sine_w(h: f64) -> GridField {
        w_field(&interval_field(h, |x| (PI * x).sin()), 0.5).unwrap()
    }

    #[test]
    fn pde_residual_is_second_order_on_the_exact_field() {
        let coarse = pde_residual_check(&sine_w(1.0 / 128.0), PI * PI, 0.1).unwrap();
        let fine = pde_residual_check(&sine_w(1.0 / 256.0), PI * PI, 0.1).unwrap();
        assert!(fine.pass && coarse.pass, "{fine:?}");
        assert!(fine.metrics["median"] <= 1e-2);
        let ratio = coarse.metrics["median"] / fine.metrics["median"];
        assert!((3.5..4.5).contains(&ratio), "{ratio}");
    }

    #[test]
    fn constant_w_leaves_the_bare_eigenvalue_term() {
        let w = interval_field(1.0 / 128.0, |_| 2.0);
        let r = pde_residual_check(&w, PI * PI, 0.1).unwrap();
        assert!(!r.pass);
        assert_eq!(r.metrics["max"], PI * PI / 4.0);
        assert_eq!(r.metrics["median"], PI * PI / 4.0);
        let zero = interval_field(1.0 / 128.0, |_| 0.0);
        assert!(pde_residual_check(&zero, PI * PI, 0.1).is_err());
    }

    #[test]
    fn sine_satisfies_the_eigen_bounds_and_controls_fail() {
        let u = interval_field(1.0 / 256.0, |x| (PI * x).sin());
        let lambda = PI * PI;
        assert!(subsolution_check(&u, lambda, 0.02).unwrap().pass);
        assert!(lipschitz_check(&u, lambda, 0.0).unwrap().pass);
        let r = rayleigh_check(&u, lambda).unwrap();
        assert!(r.pass && r.worst_violation.unwrap().abs() < 1e-3, "{r:?}");

        let parabola = interval_field(1.0 / 256.0, |x| 4.0 * x * (1.0 - x));
        assert!(!subsolution_check(&parabola, lambda, 0.02).unwrap().pass);
        let fast = interval_field(1.0 / 256.0, |x| (3.0 * PI * x).sin());
        assert!(!lipschitz_check(&fast, lambda, 0.02).unwrap().pass);
        assert!(!rayleigh_check(&fast, lambda).unwrap().pass);
    }
}
