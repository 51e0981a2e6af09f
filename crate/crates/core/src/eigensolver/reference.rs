//! Closed-form first eigenvalues and the first zero of `J₀`.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::geometry::{ConvexDomain, Shape};

/// `J₀(x)` from its ascending series `Σ (−x²/4)^k / (k!)²`.
///
/// Accurate to a few ulps of the largest term for `|x| ≤ 8`; used on `[2, 3]`.
pub fn bessel_j0(x: f64) -> f64 {
    let q = -0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..200 {
        let kf = k as f64;
        term *= q / (kf * kf);
        let next = sum + term;
        if next == sum {
            break;
        }
        sum = next;
    }
    sum
}

/// First positive zero of `J₀`, bisected on `[2, 3]` to floating-point
/// resolution.
pub fn j01() -> f64 {
    static J01: OnceLock<f64> = OnceLock::new();
    *J01.get_or_init(|| {
        let (mut lo, mut hi) = (2.0_f64, 3.0_f64);
        debug_assert!(bessel_j0(lo) > 0.0 && bessel_j0(hi) < 0.0);
        loop {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if bessel_j0(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        if bessel_j0(lo).abs() <= bessel_j0(hi).abs() {
            lo
        } else {
            hi
        }
    })
}

/// Closed-form λ₁ for intervals, axis-aligned rectangles and discs.
pub fn reference_lambda1(domain: &ConvexDomain) -> Option<f64> {
    match domain.shape() {
        Shape::Interval { a, b } => Some(PI * PI / ((b - a) * (b - a))),
        Shape::Disc { radius, .. } => Some(j01() * j01() / (radius * radius)),
        Shape::Ellipse { semi_axes, .. } if semi_axes[0] == semi_axes[1] => {
            Some(j01() * j01() / (semi_axes[0] * semi_axes[0]))
        }
        Shape::Polygon { .. } => domain
            .as_rectangle()
            .map(|[a, b]| PI * PI * (1.0 / (a * a) + 1.0 / (b * b))),
        _ => None,
    }
}
