//! Finite-difference operators with Shortley–Weller boundary treatment.
//!
//! Values beyond `∂Ω` are the Dirichlet datum 0, placed at the fractional
//! gaps stored in the mask.

use rayon::prelude::*;

use crate::geometry::GridMask;
use crate::{Error, Result};

const PAR_MIN_LEN: usize = 2048;

fn check_len(mask: &GridMask, values: &[f64]) -> Result<()> {
    if values.len() == mask.len() {
        Ok(())
    } else {
        Err(Error::MaskMismatch(format!("{} values for {} interior nodes", values.len(), mask.len())))
    }
}

fn neighbor_value(values: &[f64], n: Option<usize>) -> f64 {
    n.map_or(0.0, |k| values[k])
}

/// `−∂²u` along one axis at node `k` from the three-point nonuniform stencil.
#[inline]
fn neg_second_difference(mask: &GridMask, values: &[f64], k: usize, axis: usize) -> f64 {
    let s = mask.stencil(k);
    let (lo, hi) = (2 * axis, 2 * axis + 1);
    let (tm, tp) = (s.gaps[lo], s.gaps[hi]);
    let um = neighbor_value(values, s.neighbors[lo]);
    let up = neighbor_value(values, s.neighbors[hi]);
    let u0 = values[k];
    let h2 = mask.h() * mask.h();
    if tm == 1.0 && tp == 1.0 {
        return (2.0 * u0 - um - up) / h2;
    }
    2.0 / h2 * (u0 / (tm * tp) - um / (tm * (tm + tp)) - up / (tp * (tm + tp)))
}

#[inline]
fn laplacian_at(mask: &GridMask, values: &[f64], k: usize) -> f64 {
    (0..mask.dimension()).map(|axis| neg_second_difference(mask, values, k, axis)).sum()
}

/// Discrete `−Δ` into a caller-provided buffer.
pub(crate) fn apply_into(mask: &GridMask, values: &[f64], out: &mut [f64]) {
    out.par_iter_mut()
        .with_min_len(PAR_MIN_LEN)
        .enumerate()
        .for_each(|(k, o)| *o = laplacian_at(mask, values, k));
}

/// Diagonal of the discrete `−Δ`.
pub(crate) fn diagonal(mask: &GridMask) -> Vec<f64> {
    let h2 = mask.h() * mask.h();
    (0..mask.len())
        .map(|k| {
            let s = mask.stencil(k);
            (0..mask.dimension()).map(|axis| 2.0 / (h2 * s.gaps[2 * axis] * s.gaps[2 * axis + 1])).sum()
        })
        .collect()
}

/// Whether the discrete operator is symmetric, i.e. no node sees a
/// fractional boundary gap.
pub(crate) fn is_symmetric(mask: &GridMask) -> bool {
    (0..mask.len()).all(|k| mask.stencil(k).gaps[..2 * mask.dimension()].iter().all(|&g| g == 1.0))
}

/// Second-order discrete `−Δ` of nodal values on `mask`.
pub fn apply_laplacian(mask: &GridMask, values: &[f64]) -> Result<Vec<f64>> {
    check_len(mask, values)?;
    let mut out = vec![0.0; values.len()];
    apply_into(mask, values, &mut out);
    Ok(out)
}

/// Nodal gradient: central differences where both axis neighbours are
/// interior, the three-point nonuniform formula through the boundary datum
/// otherwise. The second component is zero in one dimension.
pub fn gradient(mask: &GridMask, values: &[f64]) -> Result<Vec<[f64; 2]>> {
    check_len(mask, values)?;
    let h = mask.h();
    let dim = mask.dimension();
    Ok((0..mask.len())
        .into_par_iter()
        .with_min_len(PAR_MIN_LEN)
        .map(|k| {
            let s = mask.stencil(k);
            let mut g = [0.0; 2];
            for (axis, gk) in g.iter_mut().enumerate().take(dim) {
                let (lo, hi) = (2 * axis, 2 * axis + 1);
                let um = neighbor_value(values, s.neighbors[lo]);
                let up = neighbor_value(values, s.neighbors[hi]);
                let (a, b) = (s.gaps[lo], s.gaps[hi]);
                *gk = if a == 1.0 && b == 1.0 {
                    (up - um) / (2.0 * h)
                } else {
                    let u0 = values[k];
                    (a * a * (up - u0) + b * b * (u0 - um)) / (h * a * b * (a + b))
                };
            }
            g
        })
        .collect())
}

/// Finite-difference Hessian `[∂xx, ∂xy, ∂yy]` at nodes whose 3×3 block (three
/// nodes in one dimension) is interior; `None` elsewhere.
pub fn hessian(mask: &GridMask, values: &[f64]) -> Result<Vec<Option<[f64; 3]>>> {
    check_len(mask, values)?;
    let h2 = mask.h() * mask.h();
    let dim = mask.dimension();
    Ok((0..mask.len())
        .map(|k| {
            let [i, j] = mask.grid_index(k);
            let (i, j) = (i as isize, j as isize);
            let at = |di: isize, dj: isize| mask.node_at(i + di, j + dj).map(|n| values[n]);
            let u0 = values[k];
            let xx = (at(-1, 0)? - 2.0 * u0 + at(1, 0)?) / h2;
            if dim == 1 {
                return Some([xx, 0.0, 0.0]);
            }
            let yy = (at(0, -1)? - 2.0 * u0 + at(0, 1)?) / h2;
            let xy = (at(1, 1)? - at(1, -1)? - at(-1, 1)? + at(-1, -1)?) / (4.0 * h2);
            Some([xx, xy, yy])
        })
        .collect())
}

/// Fourth-order Hessian from the 5-point stencils `(−1, 16, −30, 16, −1)/12h²`
/// and the tensor product of `(1, −8, 0, 8, −1)/12h` for `∂xy`, at nodes whose
/// 5×5 block is interior. Elsewhere it falls back to [`hessian`].
///
/// Next to a boundary the field varies fast in the normal direction, and the
/// 3-point stencil leaks that curvature into the tangential eigenvalue through
/// its `h²∂⁴` truncation; the wider stencil removes that term.
pub fn hessian_fourth_order(mask: &GridMask, values: &[f64]) -> Result<Vec<Option<[f64; 3]>>> {
    let fallback = hessian(mask, values)?;
    let h = mask.h();
    let dim = mask.dimension();
    const SECOND: [f64; 5] = [-1.0, 16.0, -30.0, 16.0, -1.0];
    const FIRST: [f64; 5] = [1.0, -8.0, 0.0, 8.0, -1.0];
    Ok((0..mask.len())
        .map(|k| {
            let [i, j] = mask.grid_index(k);
            let (i, j) = (i as isize, j as isize);
            let at = |di: isize, dj: isize| mask.node_at(i + di, j + dj).map(|n| values[n]);
            let wide = || -> Option<[f64; 3]> {
                let mut xx = 0.0;
                for (c, d) in SECOND.iter().zip(-2..=2) {
                    xx += c * at(d, 0)?;
                }
                if dim == 1 {
                    return Some([xx / (12.0 * h * h), 0.0, 0.0]);
                }
                let (mut yy, mut xy) = (0.0, 0.0);
                for (c, d) in SECOND.iter().zip(-2..=2) {
                    yy += c * at(0, d)?;
                }
                for (a, di) in FIRST.iter().zip(-2..=2) {
                    for (b, dj) in FIRST.iter().zip(-2..=2) {
                        if a * b != 0.0 {
                            xy += a * b * at(di, dj)?;
                        }
                    }
                }
                Some([xx / (12.0 * h * h), xy / (144.0 * h * h), yy / (12.0 * h * h)])
            };
            wide().or(fallback[k])
        })
        .collect())
}

/// Smallest eigenvalue of the symmetric 2×2 matrix `[[a, b], [b, c]]`.
pub fn min_eigenvalue_2x2([a, b, c]: [f64; 3]) -> f64 {
    let mean = 0.5 * (a + c);
    let radius = (0.5 * (a - c)).hypot(b);
    mean - radius
}

/// Spectral norm of the symmetric 2×2 matrix `[[a, b], [b, c]]`.
pub fn spectral_norm_2x2([a, b, c]: [f64; 3]) -> f64 {
    let mean = 0.5 * (a + c);
    mean.abs() + (0.5 * (a - c)).hypot(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{make_domain, rasterize, DomainSpec};
    use std::f64::consts::PI;

    fn mask(spec: DomainSpec, h: f64) -> GridMask {
        rasterize(&make_domain(&spec).unwrap(), h).unwrap()
    }

    fn sample(mask: &GridMask, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        (0..mask.len()).map(|k| {
            let p = mask.point(k);
            f(p[0], p[1])
        }).collect()
    }

    #[test]
    fn sine_laplacian_truncation_bound() {
        let h = 1.0 / 256.0;
        let m = mask(DomainSpec::Interval { a: 0.0, b: 1.0 }, h);
        let u = sample(&m, |x, _| (PI * x).sin());
        let lu = apply_laplacian(&m, &u).unwrap();
        let bound = 5.0 * PI.powi(4) * h * h / 12.0;
        for k in 0..m.len() {
            let x = m.point(k)[0];
            assert!((lu[k] - PI * PI * (PI * x).sin()).abs() <= bound);
        }
    }

    #[test]
    fn constant_field_is_harmonic_away_from_boundary() {
        let m = mask(DomainSpec::Polygon { vertices: vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]] }, 0.05);
        let lu = apply_laplacian(&m, &vec![1.0; m.len()]).unwrap();
        let mut seen = 0;
        for k in 0..m.len() {
            if m.is_full_stencil(k) {
                assert_eq!(lu[k], 0.0);
                seen += 1;
            }
        }
        assert!(seen > 0);
    }

    #[test]
    fn quadratic_is_exact_including_boundary_rows() {
        // x² + y² − 1 vanishes on the unit circle, so the Dirichlet datum is
        // consistent and every row, curved boundary included, is exact.
        let m = mask(DomainSpec::Disc { center: [0.0, 0.0], radius: 1.0 }, 1.0 / 32.0);
        let u = sample(&m, |x, y| x * x + y * y - 1.0);
        let lu = apply_laplacian(&m, &u).unwrap();
        for v in lu {
            assert!((v + 4.0).abs() < 1e-7, "{v}");
        }
        let sq = mask(DomainSpec::Polygon { vertices: vec![[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]] }, 0.1);
        let u = sample(&sq, |x, y| x * x + y * y);
        let lu = apply_laplacian(&sq, &u).unwrap();
        for k in 0..sq.len() {
            if sq.is_full_stencil(k) {
                assert!((lu[k] + 4.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn gradient_of_affine_field() {
        let m = mask(DomainSpec::Ellipse { center: [0.0, 0.0], semi_axes: [1.0, 0.7] }, 0.05);
        let u = sample(&m, |x, y| 3.0 * x - 2.0 * y + 0.5);
        let g = gradient(&m, &u).unwrap();
        for k in 0..m.len() {
            if m.is_full_stencil(k) {
                assert!((g[k][0] - 3.0).abs() < 1e-12 && (g[k][1] + 2.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn gradient_of_sine_truncation_bound() {
        let h = 1.0 / 256.0;
        let m = mask(DomainSpec::Interval { a: 0.0, b: 1.0 }, h);
        let u = sample(&m, |x, _| (PI * x).sin());
        let g = gradient(&m, &u).unwrap();
        let bound = PI.powi(3) * h * h / 6.0;
        for k in 0..m.len() {
            let x = m.point(k)[0];
            assert!((g[k][0] - PI * (PI * x).cos()).abs() <= bound);
        }
    }

    #[test]
    fn radial_gradient_is_odd() {
        let m = mask(DomainSpec::Disc { center: [0.0, 0.0], radius: 1.0 }, 1.0 / 20.0);
        let u = sample(&m, |x, y| (1.0 - x * x - y * y).powi(2));
        let g = gradient(&m, &u).unwrap();
        let [nx, ny] = m.dims();
        for k in 0..m.len() {
            let [i, j] = m.grid_index(k);
            let r = m.node_at((nx - 1 - i) as isize, (ny - 1 - j) as isize).unwrap();
            assert!((g[k][0] + g[r][0]).abs() < 1e-12 && (g[k][1] + g[r][1]).abs() < 1e-12);
        }
    }

    #[test]
    fn fourth_order_hessian_is_exact_on_quartics() {
        let spec = DomainSpec::Polygon { vertices: vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]] };
        let m = rasterize(&make_domain(&spec).unwrap(), 1.0 / 32.0).unwrap();
        let f = |p: [f64; 2]| p[0].powi(4) + p[0] * p[0] * p[1] * p[1] - p[0] * p[1].powi(3);
        let u: Vec<f64> = (0..m.len()).map(|k| f(m.point(k))).collect();
        let hs = hessian_fourth_order(&m, &u).unwrap();
        let mut wide = 0;
        for k in 0..m.len() {
            let [x, y] = m.point(k);
            let exact = [12.0 * x * x + 2.0 * y * y, 4.0 * x * y - 3.0 * y * y, 2.0 * x * x - 6.0 * x * y];
            let Some(got) = hs[k] else { continue };
            let interior = (0..2).all(|a| {
                let g = m.grid_index(k)[a] as isize;
                g >= 2 && g + 2 < m.dims()[a] as isize
            });
            if interior && m.boundary_distance(k) > 2.0 * m.h() {
                wide += 1;
                for c in 0..3 {
                    assert!((got[c] - exact[c]).abs() < 1e-8, "{got:?} vs {exact:?} at {:?}", m.point(k));
                }
            }
        }
        assert!(wide > 500);
        // Near the boundary the 3-point stencil is used.
        assert_eq!(hs.iter().flatten().count(), hessian(&m, &u).unwrap().iter().flatten().count());
    }

    #[test]
    fn hessian_of_quadratic() {
        let m = mask(DomainSpec::Disc { center: [0.0, 0.0], radius: 1.0 }, 0.1);
        let u = sample(&m, |x, y| x * x + 3.0 * x * y - 0.5 * y * y);
        for hs in hessian(&m, &u).unwrap().into_iter().flatten() {
            assert!((hs[0] - 2.0).abs() < 1e-9 && (hs[1] - 3.0).abs() < 1e-9 && (hs[2] + 1.0).abs() < 1e-9);
        }
        assert!((min_eigenvalue_2x2([2.0, 0.0, 1.0]) - 1.0).abs() < 1e-15);
        assert!((spectral_norm_2x2([1.0, 2.0, 1.0]) - 3.0).abs() < 1e-15);
    }
}
