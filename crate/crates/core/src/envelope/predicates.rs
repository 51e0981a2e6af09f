//! Exact signs of small sums of products, using floating-point expansions.
//!
//! Inputs are grid-integer coordinates (exact in `f64`) combined with
//! arbitrary doubles, so every product is representable as a two-term
//! expansion and the sum can be evaluated without rounding.

use std::cmp::Ordering;

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let x = a + b;
    let bv = x - a;
    let av = x - bv;
    (x, (a - av) + (b - bv))
}

#[inline]
fn two_product(a: f64, b: f64) -> (f64, f64) {
    let x = a * b;
    (x, a.mul_add(b, -x))
}

/// Adds `b` to the nonoverlapping expansion `e` (increasing magnitude),
/// dropping zero components.
fn grow_expansion(e: &mut Vec<f64>, b: f64) {
    let mut q = b;
    let mut out = Vec::with_capacity(e.len() + 1);
    for &c in e.iter() {
        let (sum, err) = two_sum(q, c);
        if err != 0.0 {
            out.push(err);
        }
        q = sum;
    }
    if q != 0.0 {
        out.push(q);
    }
    *e = out;
}

/// Exact sign of `Σ aᵢ·bᵢ`, assuming no product underflows.
pub(crate) fn sign_of_dot(terms: &[(f64, f64)]) -> Ordering {
    let mut approx = 0.0;
    let mut magnitude = 0.0;
    for &(a, b) in terms {
        let p = a * b;
        approx += p;
        magnitude += p.abs();
    }
    let bound = (2 * terms.len() + 2) as f64 * f64::EPSILON * magnitude;
    if approx > bound {
        return Ordering::Greater;
    }
    if approx < -bound {
        return Ordering::Less;
    }
    let mut e = Vec::with_capacity(2 * terms.len());
    for &(a, b) in terms {
        let (x, y) = two_product(a, b);
        grow_expansion(&mut e, y);
        grow_expansion(&mut e, x);
    }
    e.last().map_or(Ordering::Equal, |v| v.partial_cmp(&0.0).unwrap_or(Ordering::Equal))
}

/// Orientation of integer points: positive when `a, b, c` turn counter-clockwise.
#[inline]
pub(crate) fn orient_int(a: [i64; 2], b: [i64; 2], c: [i64; 2]) -> i64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

/// Exact orientation of integer points `a, b` and a real query point `q`.
pub(crate) fn orient_query(a: [i64; 2], b: [i64; 2], q: [f64; 2]) -> Ordering {
    // (b−a) × (q−a) = (bx−ax)·qy − (by−ay)·qx + (by−ay)·ax − (bx−ax)·ay
    let dx = b[0] - a[0];
    let dy = b[1] - a[1];
    let constant = dy * a[0] - dx * a[1];
    sign_of_dot(&[(dx as f64, q[1]), (-dy as f64, q[0]), (constant as f64, 1.0)])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resolves_cancellation_exactly() {
        // 1e16 + 1 − 1e16 is lost by plain summation.
        let terms = [(1e16, 1.0), (1.0, 1.0), (-1e16, 1.0)];
        assert_eq!(sign_of_dot(&terms), Ordering::Greater);
        let terms = [(0.1, 3.0), (-0.3, 1.0)];
        // 0.1·3 rounds to 0.30000000000000004 but the exact product of the
        // stored doubles still exceeds the stored 0.3.
        let exact = sign_of_dot(&terms);
        assert_eq!(exact, Ordering::Greater);
        assert_eq!(sign_of_dot(&[(0.5, 2.0), (-1.0, 1.0)]), Ordering::Equal);
        assert_eq!(sign_of_dot(&[]), Ordering::Equal);
    }

    #[test]
    fn query_orientation_matches_integers() {
        let (a, b) = ([0, 0], [4, 2]);
        assert_eq!(orient_query(a, b, [2.0, 1.0]), Ordering::Equal);
        assert_eq!(orient_query(a, b, [2.0, 1.0 + 1e-15]), Ordering::Greater);
        assert_eq!(orient_query(a, b, [2.0, 1.0 - 1e-15]), Ordering::Less);
        assert_eq!(orient_int(a, b, [2, 1]), 0);
        assert!(orient_int([0, 0], [1, 0], [0, 1]) > 0);
    }
}
