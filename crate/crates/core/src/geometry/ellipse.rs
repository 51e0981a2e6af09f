//! Distance from an interior point to an axis-aligned ellipse.
//!
//! The nearest boundary point solves a scalar equation in the Lagrange
//! multiplier; it is bracketed and bisected until the bracket stops shrinking
//! in floating point (D. Eberly, "Distance from a point to an ellipse").

/// Bisects `(n0/(s+r0))² + (z1/(s+1))² = 1` for the multiplier `s`.
fn root(r0: f64, z0: f64, z1: f64, g: f64) -> f64 {
    let n0 = r0 * z0;
    let mut s0 = z1 - 1.0;
    let mut s1 = if g < 0.0 { 0.0 } else { n0.hypot(z1) - 1.0 };
    let mut s = 0.0;
    for _ in 0..1100 {
        s = 0.5 * (s0 + s1);
        if s == s0 || s == s1 {
            break;
        }
        let ratio0 = n0 / (s + r0);
        let ratio1 = z1 / (s + 1.0);
        let g = ratio0 * ratio0 + ratio1 * ratio1 - 1.0;
        if g > 0.0 {
            s0 = s;
        } else if g < 0.0 {
            s1 = s;
        } else {
            break;
        }
    }
    s
}

/// Distance from `(x, y)`, given relative to the centre, to the ellipse with
/// semi-axes `a` (along x) and `b` (along y).
pub(crate) fn distance_to_boundary(a: f64, b: f64, x: f64, y: f64) -> f64 {
    // Reduce to the first quadrant with the major axis along the first coordinate.
    let (e0, e1, y0, y1) = if a >= b { (a, b, x.abs(), y.abs()) } else { (b, a, y.abs(), x.abs()) };
    if y1 > 0.0 {
        if y0 > 0.0 {
            let z0 = y0 / e0;
            let z1 = y1 / e1;
            let g = z0 * z0 + z1 * z1 - 1.0;
            if g == 0.0 {
                return 0.0;
            }
            let r0 = (e0 / e1) * (e0 / e1);
            let s = root(r0, z0, z1, g);
            let x0 = r0 * y0 / (s + r0);
            let x1 = y1 / (s + 1.0);
            (x0 - y0).hypot(x1 - y1)
        } else {
            (e1 - y1).abs()
        }
    } else {
        let numer = e0 * y0;
        let denom = e0 * e0 - e1 * e1;
        if numer < denom {
            let t = numer / denom;
            let x0 = e0 * t;
            let x1 = e1 * (1.0 - t * t).sqrt();
            (x0 - y0).hypot(x1)
        } else {
            (e0 - y0).abs()
        }
    }
}
