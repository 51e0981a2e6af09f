//! Discrete convex envelopes `w**` of grid fields.
//!
//! The envelope of sampled values is the lower boundary of the convex hull of
//! the lifted samples `(x, w(x))`. Its facets carry the affine pieces, their
//! slopes `p`, and the Carathéodory decompositions of every point they cover.

mod chain;
mod hull2d;
mod predicates;

use std::cmp::Ordering;
use std::io::Write;

use serde::Serialize;

use crate::eigensolver::{GridField, Role};
use crate::geometry::Point;
use crate::{Error, Result};
use hull2d::LowerHull;
use predicates::orient_int;

/// One affine piece of the envelope: `w**(x) = p·x + offset` on the simplex
/// spanned by `vertices`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Facet {
    /// Node indices, two in one dimension and three in two.
    pub vertices: Vec<usize>,
    /// Slope `p` in physical units; the second component is zero in 1D.
    pub gradient: [f64; 2],
    pub offset: f64,
}

/// A point written as a convex combination of contact nodes.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FacetDecomposition {
    /// Positive weights summing to one.
    pub weights: Vec<f64>,
    pub nodes: Vec<usize>,
    pub points: Vec<Point>,
    /// Slope of the facet containing the point.
    pub gradient: [f64; 2],
}

// One per envelope, so the size gap between variants costs nothing.
#[allow(clippy::large_enum_variant)]
enum Structure {
    /// Hull vertices (node indices) left to right and their grid abscissae.
    Chain { vertices: Vec<usize>, xs: Vec<i64> },
    Plane {
        hull: LowerHull,
        shift: [i64; 2],
        /// Node index of each hull input point.
        node_of: Vec<usize>,
        /// Facet index per triangle slot, `usize::MAX` for non-facets.
        facet_of_tri: Vec<usize>,
    },
}

/// Lower convex envelope of a grid field over the nodes outside a boundary band.
pub struct Envelope {
    source: GridField,
    values: Vec<f64>,
    included: Vec<bool>,
    band: f64,
    facets: Vec<Facet>,
    node_facet: Vec<Option<usize>>,
    structure: Structure,
}

fn grid_coord(field: &GridField, k: usize) -> [i64; 2] {
    let [i, j] = field.mask().grid_index(k);
    [i as i64, j as i64]
}

/// Builds the envelope of `field` from the nodes at distance at least
/// `exclusion_band` from `∂Ω`. Excluded nodes keep their source values.
pub fn convex_envelope(field: &GridField, exclusion_band: f64) -> Result<Envelope> {
    if !(exclusion_band >= 0.0) {
        return Err(Error::InvalidParameter(format!("exclusion band {exclusion_band} must be nonnegative")));
    }
    let mask = field.mask().clone();
    let dim = mask.dimension();
    let w = field.values();
    let included: Vec<bool> = (0..mask.len()).map(|k| mask.boundary_distance(k) >= exclusion_band).collect();
    let nodes: Vec<usize> = (0..mask.len()).filter(|&k| included[k]).collect();
    if nodes.len() < dim + 2 {
        return Err(Error::TooFewNodes { found: nodes.len(), required: dim + 2 });
    }
    if let Some(&k) = nodes.iter().find(|&&k| !w[k].is_finite()) {
        return Err(Error::InvalidParameter(format!("field value {} at node {k} is not finite", w[k])));
    }
    let h = mask.h();
    let mut values = w.to_vec();
    let mut node_facet = vec![None; mask.len()];
    let mut facets = Vec::new();

    let structure = if dim == 1 {
        let xs: Vec<i64> = nodes.iter().map(|&k| grid_coord(field, k)[0]).collect();
        let ws: Vec<f64> = nodes.iter().map(|&k| w[k]).collect();
        let chain = chain::lower_chain(&xs, &ws);
        let vertices: Vec<usize> = chain.iter().map(|&c| nodes[c]).collect();
        let vx: Vec<i64> = chain.iter().map(|&c| xs[c]).collect();
        for pair in vertices.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            let slope = (w[b] - w[a]) / ((mask.grid_index(b)[0] - mask.grid_index(a)[0]) as f64 * h);
            facets.push(Facet { vertices: vec![a, b], gradient: [slope, 0.0], offset: w[a] - slope * mask.point(a)[0] });
        }
        let mut seg = 0;
        for (pos, &k) in nodes.iter().enumerate() {
            let x = xs[pos];
            while seg + 1 < facets.len() && x > vx[seg + 1] {
                seg += 1;
            }
            node_facet[k] = Some(seg);
            let (xa, xb) = (vx[seg], vx[seg + 1]);
            let (a, b) = (vertices[seg], vertices[seg + 1]);
            let t = (x - xa) as f64 / (xb - xa) as f64;
            let value = if x == xa {
                w[a]
            } else if x == xb {
                w[b]
            } else {
                (1.0 - t) * w[a] + t * w[b]
            };
            values[k] = value.min(w[k]);
        }
        Structure::Chain { vertices, xs: vx }
    } else {
        let coords: Vec<[i64; 2]> = nodes.iter().map(|&k| grid_coord(field, k)).collect();
        let heights: Vec<f64> = nodes.iter().map(|&k| w[k]).collect();
        let shift = LowerHull::shift_of(&coords);
        let hull = LowerHull::build(&coords, &heights);
        let mut facet_of_tri = Vec::new();
        let mut vertex_facet = vec![usize::MAX; nodes.len()];
        for (t, tri) in hull.triangles() {
            if !hull.is_real(t) {
                continue;
            }
            let id = facets.len();
            if facet_of_tri.len() <= t as usize {
                facet_of_tri.resize(t as usize + 1, usize::MAX);
            }
            facet_of_tri[t as usize] = id;
            let [a, b, c] = tri.v.map(|v| v as usize);
            let (pa, pb, pc) = (coords[a], coords[b], coords[c]);
            let det = orient_int(pa, pb, pc) as f64;
            let (dwb, dwc) = (heights[b] - heights[a], heights[c] - heights[a]);
            let (bx, by) = ((pb[0] - pa[0]) as f64, (pb[1] - pa[1]) as f64);
            let (cx, cy) = ((pc[0] - pa[0]) as f64, (pc[1] - pa[1]) as f64);
            let gx = (dwb * cy - dwc * by) / det / h;
            let gy = (bx * dwc - cx * dwb) / det / h;
            let xa = mask.point(nodes[a]);
            facets.push(Facet {
                vertices: vec![nodes[a], nodes[b], nodes[c]],
                gradient: [gx, gy],
                offset: heights[a] - gx * xa[0] - gy * xa[1],
            });
            for v in [a, b, c] {
                if vertex_facet[v] == usize::MAX {
                    vertex_facet[v] = id;
                }
            }
        }
        if facets.is_empty() {
            return Err(Error::Degenerate("included nodes are collinear".into()));
        }
        let mut start = hull.any_triangle();
        for (pos, &k) in nodes.iter().enumerate() {
            if hull.is_vertex(pos as u32) && vertex_facet[pos] != usize::MAX {
                node_facet[k] = Some(vertex_facet[pos]);
                continue;
            }
            let c = coords[pos];
            let q = [(c[0] - shift[0]) as f64, (c[1] - shift[1]) as f64];
            let t = real_triangle_at(&hull, start, q).ok_or_else(|| {
                let p = mask.point(k);
                Error::OutsideHull(p[0], p[1])
            })?;
            start = t;
            let id = facet_of_tri[t as usize];
            node_facet[k] = Some(id);
            let tri = hull.triangle(t);
            let qi = [c[0] - shift[0], c[1] - shift[1]];
            let pv = tri.v.map(|v| hull.coord(v));
            let area = orient_int(pv[0], pv[1], pv[2]) as f64;
            let lam = [
                orient_int(pv[1], pv[2], qi) as f64 / area,
                orient_int(pv[2], pv[0], qi) as f64 / area,
                orient_int(pv[0], pv[1], qi) as f64 / area,
            ];
            let value: f64 = (0..3).map(|r| lam[r] * heights[tri.v[r] as usize]).sum();
            values[k] = value.min(w[k]);
        }
        Structure::Plane { hull, shift, node_of: nodes.clone(), facet_of_tri }
    };

    Ok(Envelope { source: field.clone(), values, included, band: exclusion_band, facets, node_facet, structure })
}

/// Walks to the triangle containing `q` and, if it touches an artificial
/// vertex, steps across a real edge through `q`. `None` outside the hull.
fn real_triangle_at(hull: &LowerHull, start: u32, q: [f64; 2]) -> Option<u32> {
    let t = hull.locate(start, q);
    if hull.is_real(t) {
        return Some(t);
    }
    let tri = hull.triangle(t);
    for i in 0..3 {
        let (a, b) = (tri.v[(i + 1) % 3], tri.v[(i + 2) % 3]);
        if hull.is_artificial(a) || hull.is_artificial(b) || tri.n[i] == hull2d::NONE {
            continue;
        }
        if predicates::orient_query(hull.coord(a), hull.coord(b), q) == Ordering::Equal {
            let (ca, cb) = (hull.coord(a), hull.coord(b));
            // q must also lie within the segment.
            let within = |k: usize| q[k] >= ca[k].min(cb[k]) as f64 && q[k] <= ca[k].max(cb[k]) as f64;
            if within(0) && within(1) && hull.is_real(tri.n[i]) {
                return Some(tri.n[i]);
            }
        }
    }
    None
}

impl Envelope {
    /// The field the envelope was built from.
    pub fn source(&self) -> &GridField {
        &self.source
    }

    /// Envelope values per node; excluded nodes carry the source value.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// The envelope as a field with role `w_envelope`.
    pub fn field(&self) -> GridField {
        self.source.with_values(self.values.clone(), Role::WEnvelope).expect("same mask")
    }

    /// Whether each node took part in the hull.
    pub fn included(&self) -> &[bool] {
        &self.included
    }

    pub fn band(&self) -> f64 {
        self.band
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    /// Facet whose projection contains included node `k`.
    pub fn node_facet(&self, k: usize) -> Option<usize> {
        self.node_facet[k]
    }

    /// Containing facet and barycentric weights of `point` over the facet
    /// vertices.
    fn locate(&self, point: Point) -> Result<(usize, Vec<f64>)> {
        let mask = self.source.mask();
        let g = mask.grid_coords(point);
        let outside = || Error::OutsideHull(point[0], point[1]);
        if !(g[0].is_finite() && g[1].is_finite()) {
            return Err(outside());
        }
        match &self.structure {
            Structure::Chain { xs, .. } => {
                let x = g[0];
                let (first, last) = (xs[0] as f64, xs[xs.len() - 1] as f64);
                if x < first || x > last {
                    return Err(outside());
                }
                let seg = xs.partition_point(|&v| (v as f64) <= x).clamp(1, xs.len() - 1) - 1;
                let (a, b) = (xs[seg] as f64, xs[seg + 1] as f64);
                let t = (x - a) / (b - a);
                Ok((seg, vec![1.0 - t, t]))
            }
            Structure::Plane { hull, shift, facet_of_tri, .. } => {
                let q = [g[0] - shift[0] as f64, g[1] - shift[1] as f64];
                let t = real_triangle_at(hull, hull.any_triangle(), q).ok_or_else(outside)?;
                let tri = hull.triangle(t);
                let pv = tri.v.map(|v| hull.coord(v).map(|c| c as f64));
                let cross = |a: [f64; 2], b: [f64; 2], c: [f64; 2]| {
                    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
                };
                let area = cross(pv[0], pv[1], pv[2]);
                let mut lam = [
                    cross(pv[1], pv[2], q) / area,
                    cross(pv[2], pv[0], q) / area,
                    cross(pv[0], pv[1], q) / area,
                ];
                lam.iter_mut().for_each(|l| *l = l.max(0.0));
                let total: f64 = lam.iter().sum();
                Ok((facet_of_tri[t as usize], lam.iter().map(|l| l / total).collect()))
            }
        }
    }

    /// Envelope value at an arbitrary point of the hull.
    pub fn evaluate(&self, point: Point) -> Result<f64> {
        let (facet, weights) = self.locate(point)?;
        let w = self.source.values();
        Ok(self.facets[facet].vertices.iter().zip(&weights).map(|(&v, t)| t * w[v]).sum())
    }

    /// Carathéodory decomposition of `point` over the contact vertices of its
    /// facet. A contact node decomposes trivially into itself.
    pub fn facet_decomposition(&self, point: Point) -> Result<FacetDecomposition> {
        let mask = self.source.mask();
        let w = self.source.values();
        let g = mask.grid_coords(point);
        let (ri, rj) = (g[0].round(), g[1].round());
        if (g[0] - ri).abs() <= 1e-9 && (g[1] - rj).abs() <= 1e-9 {
            if let Some(k) = mask.node_at(ri as isize, rj as isize) {
                let scale = w[k].abs().max(1.0);
                if self.included[k] && w[k] - self.values[k] <= 1e-12 * scale {
                    let facet = self.node_facet[k].ok_or_else(|| Error::OutsideHull(point[0], point[1]))?;
                    return Ok(FacetDecomposition {
                        weights: vec![1.0],
                        nodes: vec![k],
                        points: vec![mask.point(k)],
                        gradient: self.facets[facet].gradient,
                    });
                }
            }
        }
        let (facet, weights) = self.locate(point)?;
        let f = &self.facets[facet];
        let kept: Vec<(usize, f64)> =
            f.vertices.iter().zip(&weights).filter(|(_, &t)| t >= 1e-12).map(|(&v, &t)| (v, t)).collect();
        let total: f64 = kept.iter().map(|(_, t)| t).sum();
        Ok(FacetDecomposition {
            weights: kept.iter().map(|(_, t)| t / total).collect(),
            nodes: kept.iter().map(|(v, _)| *v).collect(),
            points: kept.iter().map(|(v, _)| mask.point(*v)).collect(),
            gradient: f.gradient,
        })
    }

    /// Included nodes where `w − w** ≤ tol`.
    pub fn contact_set(&self, tol: f64) -> Vec<bool> {
        let w = self.source.values();
        (0..w.len()).map(|k| self.included[k] && w[k] - self.values[k] <= tol).collect()
    }

    /// Writes `facet_id, vertex node ids, slope components, offset` rows.
    pub fn write_facets_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let two_d = matches!(self.structure, Structure::Plane { .. });
        if two_d {
            writeln!(out, "facet_id,v0,v1,v2,p_x,p_y,offset")?;
        } else {
            writeln!(out, "facet_id,v0,v1,p_x,offset")?;
        }
        for (id, f) in self.facets.iter().enumerate() {
            let ids: Vec<String> = f.vertices.iter().map(|v| v.to_string()).collect();
            let slope = if two_d {
                format!("{:e},{:e}", f.gradient[0], f.gradient[1])
            } else {
                format!("{:e}", f.gradient[0])
            };
            writeln!(out, "{id},{},{slope},{:e}", ids.join(","), f.offset)?;
        }
        Ok(())
    }

    /// Nodes of the hull input that are hull vertices.
    pub fn hull_vertices(&self) -> Vec<usize> {
        match &self.structure {
            Structure::Chain { vertices, .. } => vertices.clone(),
            Structure::Plane { hull, node_of, .. } => {
                (0..node_of.len()).filter(|&p| hull.is_vertex(p as u32)).map(|p| node_of[p]).collect()
            }
        }
    }
}

/// Convenience wrapper matching [`Envelope::evaluate`].
pub fn evaluate_envelope(env: &Envelope, point: Point) -> Result<f64> {
    env.evaluate(point)
}

/// Convenience wrapper matching [`Envelope::contact_set`].
pub fn contact_set(env: &Envelope, tol: f64) -> Vec<bool> {
    env.contact_set(tol)
}

/// Convenience wrapper matching [`Envelope::facet_decomposition`].
pub fn facet_decomposition(env: &Envelope, point: Point) -> Result<FacetDecomposition> {
    env.facet_decomposition(point)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{make_domain, rasterize, DomainSpec};
    use std::sync::Arc;

    fn field_on(spec: DomainSpec, h: f64, f: impl Fn(f64, f64) -> f64) -> GridField {
        let mask = Arc::new(rasterize(&make_domain(&spec).unwrap(), h).unwrap());
        GridField::from_fn(mask, Role::WKappa, |p| f(p[0], p[1]))
    }

    fn double_well() -> GridField {
        field_on(DomainSpec::Interval { a: -2.0, b: 2.0 }, 0.01, |x, _| (x * x - 1.0).powi(2))
    }

    #[test]
    fn convex_input_is_its_own_envelope() {
        let f = field_on(DomainSpec::Disc { center: [0.0, 0.0], radius: 1.0 }, 0.05, |x, y| {
            x * x + 2.0 * y * y + 0.3 * x
        });
        let env = convex_envelope(&f, 0.0).unwrap();
        for (a, b) in f.values().iter().zip(env.values()) {
            assert!((a - b).abs() < 1e-10);
        }
        assert!(env.contact_set(1e-12).iter().all(|&c| c));
        let g = field_on(DomainSpec::Interval { a: 0.0, b: 1.0 }, 0.01, |x, _| (x - 0.3).powi(2));
        let env = convex_envelope(&g, 0.0).unwrap();
        assert!(g.values().iter().zip(env.values()).all(|(a, b)| (a - b).abs() < 1e-10));
    }

    #[test]
    fn double_well_envelope() {
        let f = double_well();
        let env = convex_envelope(&f, 0.0).unwrap();
        let mask = f.mask();
        for k in 0..mask.len() {
            let x = mask.point(k)[0];
            let expected = if x.abs() <= 1.0 { 0.0 } else { (x * x - 1.0).powi(2) };
            assert!((env.values()[k] - expected).abs() < 1e-9, "x = {x}");
        }
        assert!(env.evaluate([0.5, 0.0]).unwrap().abs() < 1e-12);
        let h = mask.h();
        let contact = env.contact_set(5.0 * h * h);
        for k in 0..mask.len() {
            let x = mask.point(k)[0];
            assert_eq!(contact[k], x.abs() >= 1.0 - h - 1e-12, "x = {x}");
        }
    }

    #[test]
    fn double_well_decompositions() {
        let env = convex_envelope(&double_well(), 0.0).unwrap();
        let d = env.facet_decomposition([0.0, 0.0]).unwrap();
        assert_eq!(d.weights, vec![0.5, 0.5]);
        assert_eq!(d.points.iter().map(|p| p[0]).collect::<Vec<_>>(), vec![-1.0, 1.0]);
        assert!(d.gradient[0].abs() < 1e-12);
        let d = env.facet_decomposition([0.5, 0.0]).unwrap();
        assert!((d.weights[0] - 0.25).abs() < 1e-12 && (d.weights[1] - 0.75).abs() < 1e-12);
        let x: f64 = d.weights.iter().zip(&d.points).map(|(t, p)| t * p[0]).sum();
        assert!((x - 0.5).abs() < 1e-12);
        let d = env.facet_decomposition([1.5, 0.0]).unwrap();
        assert_eq!(d.weights, vec![1.0]);
        assert!(env.facet_decomposition([2.5, 0.0]).is_err());
    }

    #[test]
    fn strictly_concave_input_touches_only_the_ends() {
        let f = field_on(DomainSpec::Interval { a: 0.0, b: 1.0 }, 0.01, |x, _| -(x - 0.5).powi(2));
        let env = convex_envelope(&f, 0.0).unwrap();
        let contact = env.contact_set(1e-12);
        let members: Vec<usize> = (0..contact.len()).filter(|&k| contact[k]).collect();
        assert_eq!(members, vec![0, f.len() - 1]);
    }

    #[test]
    fn band_excludes_nodes() {
        let f = field_on(DomainSpec::Interval { a: 0.0, b: 1.0 }, 0.01, |x, _| x);
        let env = convex_envelope(&f, 0.1).unwrap();
        let mask = f.mask();
        for k in 0..mask.len() {
            assert_eq!(env.included()[k], mask.boundary_distance(k) >= 0.1);
        }
        assert!(matches!(convex_envelope(&f, 0.6), Err(Error::TooFewNodes { .. })));
    }

    #[test]
    fn planar_facets_and_evaluation() {
        let f = field_on(
            DomainSpec::Polygon { vertices: vec![[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]] },
            0.1,
            |x, y| (x.abs() - 0.5).abs() + 0.2 * y,
        );
        let env = convex_envelope(&f, 0.0).unwrap();
        // Envelope of |(|x| − 1/2)| + 0.2y on [−0.9, 0.9]² is max(0, |x| − 1/2) + 0.2y.
        for k in 0..f.len() {
            let p = f.mask().point(k);
            let expected = (p[0].abs() - 0.5).max(0.0) + 0.2 * p[1];
            assert!((env.values()[k] - expected).abs() < 1e-12, "{p:?}");
        }
        let v = env.evaluate([0.05, 0.33]).unwrap();
        assert!((v - 0.2 * 0.33).abs() < 1e-12);
        let d = env.facet_decomposition([0.05, 0.33]).unwrap();
        assert!(d.gradient[0].abs() < 1e-12 && (d.gradient[1] - 0.2).abs() < 1e-12);
        let total: f64 = d.weights.iter().sum();
        assert!((total - 1.0).abs() < 1e-12 && d.weights.iter().all(|&t| t > 0.0) && d.weights.len() <= 3);
        let x: f64 = d.weights.iter().zip(&d.points).map(|(t, p)| t * p[0]).sum();
        let y: f64 = d.weights.iter().zip(&d.points).map(|(t, p)| t * p[1]).sum();
        assert!((x - 0.05).abs() < 1e-10 && (y - 0.33).abs() < 1e-10);
        assert!(env.evaluate([0.95, 0.0]).is_err());
        let mut csv = Vec::new();
        env.write_facets_csv(&mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert!(text.starts_with("facet_id,v0,v1,v2,p_x,p_y,offset\n"));
        assert_eq!(text.lines().count(), env.facets().len() + 1);
    }
}
