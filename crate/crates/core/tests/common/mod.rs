//! Brute-force oracles shared by the integration tests.

#![allow(dead_code)]

use std::sync::Arc;

use pls_core::eigensolver::{GridField, Role};
use pls_core::geometry::{make_domain, rasterize, DomainSpec};

pub fn square_field(half: f64, h: f64, f: impl Fn(f64, f64) -> f64) -> GridField {
    let spec = DomainSpec::Polygon { vertices: vec![[-half, -half], [half, -half], [half, half], [-half, half]] };
    let mask = Arc::new(rasterize(&make_domain(&spec).unwrap(), h).unwrap());
    GridField::from_fn(mask, Role::WKappa, |p| f(p[0], p[1]))
}

fn orient(a: [i64; 2], b: [i64; 2], c: [i64; 2]) -> i64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

/// Integer `x` range on row `y` where `orient(a, b, (x, y)) ≥ 0`.
fn half_plane_row(a: [i64; 2], b: [i64; 2], y: i64) -> (i64, i64) {
    // orient = (bx − ax)(y − ay) − dy·(x − ax) = k − dy·x
    let dy = b[1] - a[1];
    let k = (b[0] - a[0]) * (y - a[1]) + dy * a[0];
    match dy.signum() {
        1 => (i64::MIN, k.div_euclid(dy)),
        -1 => (-(k.div_euclid(-dy)), i64::MAX),
        _ if k >= 0 => (i64::MIN, i64::MAX),
        _ => (1, 0),
    }
}

/// Minimum of `Σ tᵢ w(xᵢ)` over every node triple whose triangle contains the
/// node, and over the node itself.
pub fn brute_force_2d(field: &GridField) -> Vec<f64> {
    let mask = field.mask();
    let w = field.values();
    let n = mask.len();
    let pts: Vec<[i64; 2]> = (0..n).map(|k| mask.grid_index(k).map(|c| c as i64)).collect();
    let mut best = w.to_vec();
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                let (mut pa, mut pb, pc) = (pts[a], pts[b], pts[c]);
                let (mut wa, mut wb, wc) = (w[a], w[b], w[c]);
                let mut area = orient(pa, pb, pc);
                if area == 0 {
                    // Degenerate triangles are covered by the chords of proper ones.
                    continue;
                }
                if area < 0 {
                    std::mem::swap(&mut pa, &mut pb);
                    std::mem::swap(&mut wa, &mut wb);
                    area = -area;
                }
                let y0 = pa[1].min(pb[1]).min(pc[1]);
                let y1 = pa[1].max(pb[1]).max(pc[1]);
                for y in y0..=y1 {
                    let mut lo = i64::MIN;
                    let mut hi = i64::MAX;
                    for (p, q) in [(pb, pc), (pc, pa), (pa, pb)] {
                        let (l, h) = half_plane_row(p, q, y);
                        lo = lo.max(l);
                        hi = hi.min(h);
                    }
                    for x in lo..=hi {
                        let q = [x, y];
                        let (la, lb, lc) = (orient(pb, pc, q), orient(pc, pa, q), orient(pa, pb, q));
                        assert!(la >= 0 && lb >= 0 && lc >= 0);
                        let Some(k) = mask.node_at(x as isize, y as isize) else { continue };
                        let v = (la as f64 * wa + lb as f64 * wb + lc as f64 * wc) / area as f64;
                        if v < best[k] {
                            best[k] = v;
                        }
                    }
                }
            }
        }
    }
    best
}

/// Minimum over every chord through the node.
pub fn brute_force_1d(xs: &[f64], w: &[f64]) -> Vec<f64> {
    let n = xs.len();
    let mut best = w.to_vec();
    for a in 0..n {
        for b in a + 2..n {
            for k in a + 1..b {
                let t = (xs[k] - xs[a]) / (xs[b] - xs[a]);
                best[k] = best[k].min((1.0 - t) * w[a] + t * w[b]);
            }
        }
    }
    best
}
