//! Scalar maps of the power-logconcavity theory and the superlevel data
//! `w̄_κ`, `ū_κ`, `Ω_κ`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::eigensolver::{GridField, Role};
use crate::{Error, Result};

/// Exponent and normalisation of `L_α(κu)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConcavityParams {
    pub alpha: f64,
    pub kappa: f64,
}

impl ConcavityParams {
    pub fn new(alpha: f64, kappa: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::DomainViolation { what: "alpha", value: alpha });
        }
        if !(kappa > 0.0 && kappa <= 1.0) {
            return Err(Error::DomainViolation { what: "kappa", value: kappa });
        }
        Ok(ConcavityParams { alpha, kappa })
    }
}

/// `L_α(s) = −(−log s)^α` for `s ∈ (0, 1]`.
pub fn l_alpha(alpha: f64, s: f64) -> Result<f64> {
    if !(s > 0.0 && s <= 1.0) {
        return Err(Error::DomainViolation { what: "s", value: s });
    }
    if s == 1.0 {
        return Ok(0.0);
    }
    Ok(-(-s.ln()).powf(alpha))
}

/// Global threshold `κ̄ = exp[−(3/2)(λ₁D²/π² − 1)]`.
///
/// Every convex domain has `λ₁D² ≥ π²`. Discrete eigenvalues on intervals sit
/// slightly below `π²/ℓ²`, so products within `10⁻³` relative below `π²` are
/// treated as `π²`; anything lower is rejected.
pub fn kappa_bar(lambda1: f64, diameter: f64) -> Result<f64> {
    if !(lambda1 > 0.0 && lambda1.is_finite()) {
        return Err(Error::DomainViolation { what: "lambda1", value: lambda1 });
    }
    if !(diameter > 0.0 && diameter.is_finite()) {
        return Err(Error::DomainViolation { what: "diameter", value: diameter });
    }
    let ratio = lambda1 * diameter * diameter / (PI * PI);
    if ratio < 1.0 - 1e-3 {
        return Err(Error::InconsistentInputs(format!(
            "lambda1 * D^2 = {} is below pi^2; no convex domain has this spectrum",
            lambda1 * diameter * diameter
        )));
    }
    Ok((-1.5 * (ratio.max(1.0) - 1.0)).exp())
}

/// `√(−log κ)`, the minimum of `w_κ`. Shared by the forward and inverse maps
/// so that the maximum node round-trips exactly.
fn w_floor(kappa: f64) -> f64 {
    (-kappa.ln()).sqrt()
}

fn check_kappa(kappa: f64) -> Result<()> {
    if kappa > 0.0 && kappa <= 1.0 {
        Ok(())
    } else {
        Err(Error::DomainViolation { what: "kappa", value: kappa })
    }
}

/// `w_κ = (−log(κu))^{1/2}` nodewise.
pub fn w_field(u: &GridField, kappa: f64) -> Result<GridField> {
    check_kappa(kappa)?;
    let log_kappa = kappa.ln();
    let values = u
        .values()
        .iter()
        .map(|&v| {
            if !(v > 0.0) || v * kappa > 1.0 {
                return Err(Error::DomainViolation { what: "u", value: v });
            }
            Ok((-log_kappa - v.ln()).sqrt())
        })
        .collect::<Result<Vec<_>>>()?;
    u.with_values(values, Role::WKappa)
}

/// `v = −log u` nodewise.
pub fn log_neg_field(u: &GridField) -> Result<GridField> {
    let values = u
        .values()
        .iter()
        .map(|&v| if v > 0.0 { Ok(-v.ln()) } else { Err(Error::DomainViolation { what: "u", value: v }) })
        .collect::<Result<Vec<_>>>()?;
    u.with_values(values, Role::LogNeg)
}

/// `u_κ = exp(−log κ − w²)` nodewise, evaluated as `exp(−(w − w₀)(w + w₀))`
/// with `w₀ = √(−log κ)`; a node at `w₀` maps to exactly 1.
pub fn reconstruct_u_kappa(w_env: &GridField, kappa: f64) -> Result<GridField> {
    check_kappa(kappa)?;
    let floor = w_floor(kappa);
    let values = w_env
        .values()
        .iter()
        .map(|&w| {
            if !(w >= floor - 1e-12) {
                return Err(Error::DomainViolation { what: "w", value: w });
            }
            let w = w.max(floor);
            Ok((-(w - floor) * (w + floor)).exp())
        })
        .collect::<Result<Vec<_>>>()?;
    w_env.with_values(values, Role::UKappa)
}

/// `Ψ_κ(s) = (κ²e^{2s²} − 1)/(2s²)`, with the numerator evaluated as
/// `expm1(2(s² + log κ))`. For `κ = 1` the limit 1 is returned when `s < 10⁻⁸`.
pub fn psi(kappa: f64, s: f64) -> f64 {
    if kappa == 1.0 && s.abs() < 1e-8 {
        return 1.0;
    }
    let s2 = s * s;
    (2.0 * (s2 + kappa.ln())).exp_m1() / (2.0 * s2)
}

/// Superlevel data for one `κ ∈ (0, 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalityData {
    pub kappa: f64,
    /// Root of `Ψ_κ = target`.
    pub w_bar: f64,
    /// `ū_κ = e^{−w̄²}/κ`.
    pub u_bar: f64,
    /// `π²/(λ₁D²)`.
    pub target: f64,
}

/// Unique root of `Ψ_κ(s) = π²/(λ₁D²)` on `(√(−log κ), ∞)`, by bisection.
pub fn w_bar(kappa: f64, lambda1: f64, diameter: f64) -> Result<f64> {
    if !(kappa > 0.0 && kappa < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "w_bar needs 0 < kappa < 1 (the superlevel construction degenerates at kappa = 1), got {kappa}"
        )));
    }
    if !(lambda1 > 0.0 && diameter > 0.0) {
        return Err(Error::InconsistentInputs(format!("lambda1 = {lambda1}, D = {diameter}")));
    }
    let target = PI * PI / (lambda1 * diameter * diameter);
    let mut lo = w_floor(kappa);
    let mut hi = (2.0 * lo).max(1.0);
    while psi(kappa, hi) <= target {
        lo = hi;
        hi *= 2.0;
    }
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if psi(kappa, mid) > target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    // The lower end may still be the zero of Ψ itself, which is never the root.
    let closer_low = (psi(kappa, lo) - target).abs() <= (psi(kappa, hi) - target).abs();
    Ok(if closer_low && lo > w_floor(kappa) { lo } else { hi })
}

/// `ū_κ = exp(−w̄²)/κ`.
pub fn u_bar(kappa: f64, w_bar: f64) -> f64 {
    (-w_bar * w_bar - kappa.ln()).exp()
}

/// Computes `w̄_κ`, `ū_κ` and the target together.
pub fn locality_data(kappa: f64, lambda1: f64, diameter: f64) -> Result<LocalityData> {
    let w = w_bar(kappa, lambda1, diameter)?;
    Ok(LocalityData { kappa, w_bar: w, u_bar: u_bar(kappa, w), target: PI * PI / (lambda1 * diameter * diameter) })
}

/// Nodes of `Ω_κ = {u > ū_κ}`.
pub fn omega_kappa_mask(u: &GridField, u_bar: f64) -> Vec<bool> {
    u.values().iter().map(|&v| v > u_bar).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigensolver::j01;
    use crate::geometry::{make_domain, rasterize, DomainSpec};
    use proptest::prelude::*;
    use std::sync::Arc;

    /// Centred grids always have an odd number of interior nodes.
    fn interval_field(values: Vec<f64>) -> GridField {
        assert!(values.len() % 2 == 1);
        let d = make_domain(&DomainSpec::Interval { a: 0.0, b: 1.0 }).unwrap();
        let h = 1.0 / (values.len() + 1) as f64;
        let mask = Arc::new(rasterize(&d, h).unwrap());
        GridField::new(mask, values, Role::U).unwrap()
    }

    #[test]
    fn l_alpha_values() {
        assert_eq!(l_alpha(0.3, 1.0).unwrap(), 0.0);
        assert!((l_alpha(0.5, (-4.0f64).exp()).unwrap() + 2.0).abs() < 1e-15);
        assert!((l_alpha(1.0, (-1.0f64).exp()).unwrap() + 1.0).abs() < 1e-15);
        assert!(l_alpha(0.5, 0.0).is_err());
        assert!(l_alpha(0.5, 1.5).is_err());
    }

    #[test]
    fn kappa_bar_values() {
        assert_eq!(kappa_bar(PI * PI, 1.0).unwrap(), 1.0);
        let disc = kappa_bar(j01() * j01(), 2.0).unwrap();
        assert!((disc - 0.1332).abs() < 2e-4, "{disc}");
        assert!((disc - 0.133).abs() < 3e-3);
        let square = kappa_bar(2.0 * PI * PI, 2f64.sqrt()).unwrap();
        assert!((square - (-4.5f64).exp()).abs() < 1e-15);
        assert!((square - 0.011109).abs() < 1e-6);
        assert!(matches!(kappa_bar(1.0, 1.0), Err(Error::InconsistentInputs(_))));
        assert!(kappa_bar(0.0, 1.0).is_err());
    }

    #[test]
    fn kappa_bar_is_strictly_decreasing_in_the_product() {
        let mut prev = f64::INFINITY;
        for k in 0..200 {
            let product = PI * PI * (1.0 + 0.05 * k as f64);
            let kb = kappa_bar(product, 1.0).unwrap();
            assert!(kb < prev && kb > 0.0 && kb <= 1.0);
            prev = kb;
        }
    }

    #[test]
    fn w_field_values() {
        let u = interval_field(vec![0.5, 1.0, 0.25]);
        let w = w_field(&u, 0.5).unwrap();
        assert!((w.values()[0] - 4f64.ln().sqrt()).abs() < 1e-15);
        assert!((1.177_41 - w.values()[0]).abs() < 1e-5);
        assert_eq!(w.values()[1], (-(0.5f64).ln()).sqrt());
        let w = w_field(&interval_field(vec![1.0, 0.3, 0.2]), (-1.0f64).exp()).unwrap();
        assert_eq!(w.values()[0], 1.0);
        assert!(w_field(&interval_field(vec![0.0, 1.0, 0.5]), 0.5).is_err());
        assert_eq!(w.role(), Role::WKappa);
    }

    #[test]
    fn reconstruction_examples() {
        let kappa = 0.5_f64;
        let floor = (-kappa.ln()).sqrt();
        let u = interval_field(vec![0.3, 1.0, 0.7, 0.01, 0.5]);
        let w = w_field(&u, kappa).unwrap();
        let back = reconstruct_u_kappa(&w, kappa).unwrap();
        for (a, b) in u.values().iter().zip(back.values()) {
            assert!((a - b).abs() < 1e-12);
        }
        assert_eq!(back.values()[1], 1.0);
        let w = w.with_values(vec![(-kappa.ln() + 1.0).sqrt(), floor, floor + 1.0, floor + 2.0, floor], Role::WEnvelope)
            .unwrap();
        let uk = reconstruct_u_kappa(&w, kappa).unwrap();
        assert!((uk.values()[0] - (-1.0f64).exp()).abs() < 1e-15);
        assert_eq!(uk.values()[1], 1.0);
        let bad = w.with_values(vec![floor - 1e-6, floor, floor, floor, floor], Role::WEnvelope).unwrap();
        assert!(reconstruct_u_kappa(&bad, kappa).is_err());
    }

    #[test]
    fn psi_values() {
        assert!(psi(0.5, 2f64.ln().sqrt()).abs() < 1e-12);
        assert_eq!(psi(1.0, 1e-9), 1.0);
        assert!((psi(1.0, 1e-4) - 1.0).abs() < 1e-7);
        assert!(psi(0.5, 0.1) < 0.0);
        let s: f64 = 1.3;
        let direct = (0.49 * (2.0 * s * s).exp() - 1.0) / (2.0 * s * s);
        assert!((psi(0.7, s) - direct).abs() < 1e-13);
    }

    #[test]
    fn psi_vanishes_at_the_floor_and_then_increases() {
        for kappa in [0.5, 1.0 / 2f64.sqrt(), (2.0f64 / 3.0).sqrt(), 0.1, 0.99] {
            let floor = (-kappa.ln()).sqrt();
            assert!(psi(kappa, floor).abs() < 1e-12);
            let mut prev = psi(kappa, floor);
            for k in 1..=1000 {
                let s = floor + 3.0 * k as f64 / 1000.0;
                let v = psi(kappa, s);
                assert!(v > prev, "kappa {kappa}, s {s}");
                prev = v;
            }
        }
    }

    #[test]
    fn w_bar_solves_the_root_equation() {
        let (lambda, d) = (j01() * j01(), 2.0);
        let target = PI * PI / (lambda * d * d);
        assert!(target > 0.0 && target < 1.0);
        let r = w_bar(0.5, lambda, d).unwrap();
        assert!((psi(0.5, r) - target).abs() < 1e-12);
        assert!(r > 2f64.ln().sqrt());
        let mut prev = f64::INFINITY;
        for kappa in [0.9, 0.99, 0.999, 0.9999, 0.999_999] {
            let r = w_bar(kappa, lambda, d).unwrap();
            assert!(r < prev && r > (-kappa.ln()).sqrt());
            prev = r;
        }
        assert!(prev < 0.01);
        assert!(w_bar(1.0, lambda, d).is_err());
    }

    #[test]
    fn u_bar_values() {
        assert!((u_bar(0.5, 4f64.ln().sqrt()) - 0.5).abs() < 1e-15);
        let data = locality_data(0.999_999, j01() * j01(), 2.0).unwrap();
        assert!(data.u_bar < 1.0 && data.u_bar > 0.9999);
        let u = interval_field(vec![0.2, 0.6, 1.0, 0.6, 0.2]);
        assert_eq!(omega_kappa_mask(&u, 0.5), vec![false, true, true, true, false]);
    }

    proptest! {
        #[test]
        fn l_alpha_inverts_on_its_range(alpha in 0.1f64..=1.0, log10_s in -100.0f64..-1e-6) {
            let s = 10f64.powf(log10_s);
            let value = l_alpha(alpha, s).unwrap();
            prop_assert!(value < 0.0);
            let back = (-(-value).powf(1.0 / alpha)).exp();
            prop_assert!((back / s - 1.0).abs() <= 1e-12);
        }

        #[test]
        fn locality_invariants(kappa in 0.01f64..0.999, ratio in 1.0f64..20.0) {
            let (lambda, d) = (ratio * PI * PI, 1.0);
            let data = locality_data(kappa, lambda, d).unwrap();
            prop_assert!(data.w_bar > (-kappa.ln()).sqrt());
            prop_assert!(data.u_bar > 0.0 && data.u_bar < 1.0);
            prop_assert!(data.target > 0.0 && data.target <= 1.0);
            prop_assert!((psi(kappa, data.w_bar) - data.target).abs() <= 1e-12);
        }
    }
}
