//! Convex domains with exact membership, boundary distance and diameter.

mod ellipse;
mod mask;

pub use mask::{rasterize, GridMask, Stencil, AXIS_DIRECTIONS};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A point in the plane. One-dimensional domains use the first coordinate only.
pub type Point = [f64; 2];

/// Serialised description of a domain, as read from the domain JSON files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DomainSpec {
    Interval { a: f64, b: f64 },
    Polygon { vertices: Vec<[f64; 2]> },
    Disc { center: [f64; 2], radius: f64 },
    Ellipse { center: [f64; 2], semi_axes: [f64; 2] },
}

impl DomainSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Validated geometry of a [`ConvexDomain`].
#[derive(Clone, Debug, PartialEq)]
pub enum Shape {
    Interval { a: f64, b: f64 },
    /// Vertices in counter-clockwise order.
    Polygon { vertices: Vec<Point> },
    Disc { center: Point, radius: f64 },
    /// Axis-aligned ellipse.
    Ellipse { center: Point, semi_axes: [f64; 2] },
}

/// An open, bounded, convex domain in one or two dimensions.
///
/// Instances are only produced by [`make_domain`], which validates convexity
/// and non-degeneracy, so every method can assume a well-formed shape.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvexDomain {
    shape: Shape,
    spec: DomainSpec,
}

fn finite(values: &[f64], what: &str) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::Degenerate(format!("{what} has non-finite coordinates")))
    }
}

fn cross(a: Point, b: Point) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

/// Validates a domain description.
pub fn make_domain(spec: &DomainSpec) -> Result<ConvexDomain> {
    let shape = match spec {
        DomainSpec::Interval { a, b } => {
            finite(&[*a, *b], "interval")?;
            if b <= a {
                return Err(Error::Degenerate(format!("interval ({a}, {b}) has non-positive length")));
            }
            Shape::Interval { a: *a, b: *b }
        }
        DomainSpec::Disc { center, radius } => {
            finite(&[center[0], center[1], *radius], "disc")?;
            if *radius <= 0.0 {
                return Err(Error::Degenerate(format!("disc radius {radius} is not positive")));
            }
            Shape::Disc { center: *center, radius: *radius }
        }
        DomainSpec::Ellipse { center, semi_axes } => {
            finite(&[center[0], center[1], semi_axes[0], semi_axes[1]], "ellipse")?;
            if semi_axes[0] <= 0.0 || semi_axes[1] <= 0.0 {
                return Err(Error::Degenerate(format!(
                    "ellipse semi-axes ({}, {}) must be positive",
                    semi_axes[0], semi_axes[1]
                )));
            }
            Shape::Ellipse { center: *center, semi_axes: *semi_axes }
        }
        DomainSpec::Polygon { vertices } => Shape::Polygon { vertices: validate_polygon(vertices)? },
    };
    Ok(ConvexDomain { shape, spec: spec.clone() })
}

fn validate_polygon(vertices: &[[f64; 2]]) -> Result<Vec<Point>> {
    let n = vertices.len();
    if n < 3 {
        return Err(Error::Degenerate(format!("polygon needs at least 3 vertices, got {n}")));
    }
    for v in vertices {
        finite(v, "polygon")?;
    }
    let scale = vertices
        .iter()
        .flat_map(|v| v.iter())
        .fold(0.0_f64, |m, c| m.max(c.abs()))
        .max(f64::MIN_POSITIVE);
    let area2: f64 = (0..n).map(|i| cross(vertices[i], vertices[(i + 1) % n])).sum();
    if area2.abs() <= 1e-14 * scale * scale {
        return Err(Error::Degenerate("polygon has zero area".into()));
    }
    let orientation = area2.signum();
    let mut turning = 0.0;
    for i in 0..n {
        let prev = vertices[(i + n - 1) % n];
        let cur = vertices[i];
        let next = vertices[(i + 1) % n];
        let e0 = sub(cur, prev);
        let e1 = sub(next, cur);
        let c = cross(e0, e1) * orientation;
        let len = (e0[0].hypot(e0[1])) * (e1[0].hypot(e1[1]));
        if len == 0.0 || c.abs() <= 1e-14 * len {
            return Err(Error::CollinearVertices { index: i });
        }
        if c < 0.0 {
            return Err(Error::ReflexVertex { index: i, cross: c * orientation });
        }
        turning += c.atan2((e0[0] * e1[0] + e0[1] * e1[1]) * 1.0);
    }
    // A star polygon turns consistently but winds more than once.
    if (turning - std::f64::consts::TAU).abs() > 1e-6 {
        return Err(Error::Degenerate(format!(
            "polygon winds {:.3} times around its interior",
            turning / std::f64::consts::TAU
        )));
    }
    let mut out: Vec<Point> = vertices.to_vec();
    if orientation < 0.0 {
        out.reverse();
    }
    Ok(out)
}

impl ConvexDomain {
    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    /// The description this domain was built from.
    pub fn spec(&self) -> &DomainSpec {
        &self.spec
    }

    pub fn dimension(&self) -> usize {
        match self.shape {
            Shape::Interval { .. } => 1,
            _ => 2,
        }
    }

    /// Exact diameter `D_Ω`.
    pub fn diameter(&self) -> f64 {
        match &self.shape {
            Shape::Interval { a, b } => b - a,
            Shape::Disc { radius, .. } => 2.0 * radius,
            Shape::Ellipse { semi_axes, .. } => 2.0 * semi_axes[0].max(semi_axes[1]),
            Shape::Polygon { vertices } => {
                let mut best = 0.0_f64;
                for (i, p) in vertices.iter().enumerate() {
                    for q in &vertices[i + 1..] {
                        best = best.max((p[0] - q[0]).hypot(p[1] - q[1]));
                    }
                }
                best
            }
        }
    }

    /// Open-set membership. Points on the boundary are outside.
    pub fn contains(&self, p: Point) -> bool {
        match &self.shape {
            Shape::Interval { a, b } => *a < p[0] && p[0] < *b,
            Shape::Disc { center, radius } => {
                let d = sub(p, *center);
                d[0] * d[0] + d[1] * d[1] < radius * radius
            }
            Shape::Ellipse { center, semi_axes } => {
                let x = (p[0] - center[0]) / semi_axes[0];
                let y = (p[1] - center[1]) / semi_axes[1];
                x * x + y * y < 1.0
            }
            Shape::Polygon { vertices } => {
                let n = vertices.len();
                (0..n).all(|k| cross(sub(vertices[(k + 1) % n], vertices[k]), sub(p, vertices[k])) > 0.0)
            }
        }
    }

    /// Euclidean distance to `∂Ω` for interior points, zero otherwise.
    pub fn boundary_distance(&self, p: Point) -> f64 {
        if !self.contains(p) {
            return 0.0;
        }
        match &self.shape {
            Shape::Interval { a, b } => (p[0] - a).min(b - p[0]),
            Shape::Disc { center, radius } => (radius - (p[0] - center[0]).hypot(p[1] - center[1])).max(0.0),
            Shape::Ellipse { center, semi_axes } => {
                ellipse::distance_to_boundary(semi_axes[0], semi_axes[1], p[0] - center[0], p[1] - center[1])
            }
            Shape::Polygon { vertices } => {
                let n = vertices.len();
                (0..n)
                    .map(|k| {
                        let e = sub(vertices[(k + 1) % n], vertices[k]);
                        cross(e, sub(p, vertices[k])) / e[0].hypot(e[1])
                    })
                    .fold(f64::INFINITY, f64::min)
            }
        }
    }

    /// Distance from an interior point to `∂Ω` along the unit axis direction `dir`.
    pub fn exit_distance(&self, p: Point, dir: Point) -> f64 {
        match &self.shape {
            Shape::Interval { a, b } => {
                if dir[0] > 0.0 {
                    b - p[0]
                } else {
                    p[0] - a
                }
            }
            Shape::Disc { center, radius } => {
                let q = sub(p, *center);
                let qd = q[0] * dir[0] + q[1] * dir[1];
                let c = q[0] * q[0] + q[1] * q[1] - radius * radius;
                let disc = (qd * qd - c).max(0.0);
                // c < 0 inside: the positive root, written without cancellation.
                let root = qd + disc.sqrt();
                if root > 0.0 {
                    -c / root
                } else {
                    -qd + disc.sqrt()
                }
            }
            Shape::Ellipse { center, semi_axes } => {
                // Scale to the unit disc; axis directions keep their direction.
                let q = [(p[0] - center[0]) / semi_axes[0], (p[1] - center[1]) / semi_axes[1]];
                let d = [dir[0] / semi_axes[0], dir[1] / semi_axes[1]];
                let dd = d[0] * d[0] + d[1] * d[1];
                let qd = q[0] * d[0] + q[1] * d[1];
                let c = q[0] * q[0] + q[1] * q[1] - 1.0;
                let disc = (qd * qd - dd * c).max(0.0);
                let root = qd + disc.sqrt();
                if root > 0.0 {
                    -c / root
                } else {
                    (-qd + disc.sqrt()) / dd
                }
            }
            Shape::Polygon { vertices } => {
                let n = vertices.len();
                let mut best = f64::INFINITY;
                for k in 0..n {
                    let v = vertices[k];
                    let e = sub(vertices[(k + 1) % n], v);
                    let normal = [e[1], -e[0]];
                    let nd = normal[0] * dir[0] + normal[1] * dir[1];
                    if nd > 0.0 {
                        let slack = normal[0] * (v[0] - p[0]) + normal[1] * (v[1] - p[1]);
                        best = best.min(slack / nd);
                    }
                }
                best
            }
        }
    }

    /// Axis-aligned bounding box `(min, max)`.
    pub fn bounding_box(&self) -> (Point, Point) {
        match &self.shape {
            Shape::Interval { a, b } => ([*a, 0.0], [*b, 0.0]),
            Shape::Disc { center, radius } => (
                [center[0] - radius, center[1] - radius],
                [center[0] + radius, center[1] + radius],
            ),
            Shape::Ellipse { center, semi_axes } => (
                [center[0] - semi_axes[0], center[1] - semi_axes[1]],
                [center[0] + semi_axes[0], center[1] + semi_axes[1]],
            ),
            Shape::Polygon { vertices } => {
                let mut lo = [f64::INFINITY; 2];
                let mut hi = [f64::NEG_INFINITY; 2];
                for v in vertices {
                    for k in 0..2 {
                        lo[k] = lo[k].min(v[k]);
                        hi[k] = hi[k].max(v[k]);
                    }
                }
                (lo, hi)
            }
        }
    }

    /// Side lengths when the domain is an axis-aligned rectangle.
    pub fn as_rectangle(&self) -> Option<[f64; 2]> {
        let Shape::Polygon { vertices } = &self.shape else {
            return None;
        };
        if vertices.len() != 4 {
            return None;
        }
        let axis_aligned = (0..4).all(|k| {
            let e = sub(vertices[(k + 1) % 4], vertices[k]);
            e[0] == 0.0 || e[1] == 0.0
        });
        if !axis_aligned {
            return None;
        }
        let (lo, hi) = self.bounding_box();
        Some([hi[0] - lo[0], hi[1] - lo[1]])
    }
}

/// Random convex polygon with vertices at sorted random angles on an
/// axis-aligned ellipse centred at the origin.
///
/// Angles are redrawn until consecutive vertices are at least `0.2 / n`
/// radians apart, which keeps the polygon strictly convex and free of
/// near-duplicate vertices.
pub fn random_convex_polygon(seed: u64, n: usize, semi_axes: [f64; 2]) -> Result<DomainSpec> {
    if n < 3 {
        return Err(Error::InvalidParameter(format!("random polygon needs n >= 3, got {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let min_gap = 0.2 / n as f64;
    loop {
        let mut angles: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * std::f64::consts::TAU).collect();
        angles.sort_by(f64::total_cmp);
        let ok = (0..n).all(|k| {
            let next = if k + 1 == n { angles[0] + std::f64::consts::TAU } else { angles[k + 1] };
            next - angles[k] >= min_gap
        });
        // Reject polygons that leave a half-plane empty; they become slivers.
        let max_gap = (0..n)
            .map(|k| {
                let next = if k + 1 == n { angles[0] + std::f64::consts::TAU } else { angles[k + 1] };
                next - angles[k]
            })
            .fold(0.0, f64::max);
        if ok && max_gap < std::f64::consts::PI {
            let vertices = angles
                .iter()
                .map(|t| [semi_axes[0] * t.cos(), semi_axes[1] * t.sin()])
                .collect();
            return Ok(DomainSpec::Polygon { vertices });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> ConvexDomain {
        make_domain(&DomainSpec::Polygon { vertices: vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]] }).unwrap()
    }

    #[test]
    fn unit_square_is_a_two_dimensional_polygon() {
        let d = square();
        assert_eq!(d.dimension(), 2);
        assert!(matches!(d.shape(), Shape::Polygon { .. }));
        assert!((d.diameter() - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn reflex_vertex_is_reported_with_its_index() {
        let spec = DomainSpec::Polygon { vertices: vec![[0.0, 0.0], [1.0, 0.0], [0.5, 0.1], [0.5, 1.0]] };
        match make_domain(&spec) {
            Err(Error::ReflexVertex { index, cross }) => {
                assert_eq!(index, 2);
                // e1 = (-0.5, 0.1), e2 = (0, 0.9): cross = -0.45.
                assert!((cross + 0.45).abs() < 1e-12);
            }
            other => panic!("expected reflex vertex error, got {other:?}"),
        }
    }

    #[test]
    fn degenerate_inputs_are_rejected() {
        assert!(matches!(
            make_domain(&DomainSpec::Disc { center: [0.0, 0.0], radius: 0.0 }),
            Err(Error::Degenerate(_))
        ));
        assert!(matches!(
            make_domain(&DomainSpec::Polygon { vertices: vec![[0.0, 0.0], [1.0, 0.0]] }),
            Err(Error::Degenerate(_))
        ));
        assert!(matches!(
            make_domain(&DomainSpec::Polygon { vertices: vec![[0.0, 0.0], [1.0, 0.0], [2.0, 0.0], [1.0, 1.0]] }),
            Err(Error::CollinearVertices { index: 1 })
        ));
        assert!(make_domain(&DomainSpec::Interval { a: 1.0, b: 1.0 }).is_err());
        assert!(make_domain(&DomainSpec::Ellipse { center: [0.0, 0.0], semi_axes: [1.0, -1.0] }).is_err());
    }

    #[test]
    fn pentagram_is_not_convex() {
        let vertices = (0..5)
            .map(|k| {
                let t = std::f64::consts::TAU * (2 * k) as f64 / 5.0;
                [t.cos(), t.sin()]
            })
            .collect();
        assert!(make_domain(&DomainSpec::Polygon { vertices }).is_err());
    }

    #[test]
    fn clockwise_input_is_reoriented() {
        let d = make_domain(&DomainSpec::Polygon { vertices: vec![[0.0, 0.0], [0.0, 1.0], [1.0, 1.0], [1.0, 0.0]] })
            .unwrap();
        assert!(d.contains([0.5, 0.5]));
        assert!((d.boundary_distance([0.5, 0.25]) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn diameters() {
        let disc = make_domain(&DomainSpec::Disc { center: [0.0, 0.0], radius: 1.0 }).unwrap();
        assert_eq!(disc.diameter(), 2.0);
        let hexagon: Vec<[f64; 2]> = (0..6)
            .map(|k| {
                let t = std::f64::consts::TAU * k as f64 / 6.0;
                [t.cos(), t.sin()]
            })
            .collect();
        let hex = make_domain(&DomainSpec::Polygon { vertices: hexagon }).unwrap();
        assert!((hex.diameter() - 2.0).abs() < 1e-15);
        let ellipse = make_domain(&DomainSpec::Ellipse { center: [1.0, 1.0], semi_axes: [0.5, 2.0] }).unwrap();
        assert_eq!(ellipse.diameter(), 4.0);
        let interval = make_domain(&DomainSpec::Interval { a: -1.0, b: 2.5 }).unwrap();
        assert_eq!(interval.diameter(), 3.5);
    }

    #[test]
    fn membership_and_distance() {
        let sq = square();
        assert!(sq.contains([0.5, 0.5]));
        assert_eq!(sq.boundary_distance([0.5, 0.5]), 0.5);
        assert!(!sq.contains([2.0, 2.0]));
        assert_eq!(sq.boundary_distance([2.0, 2.0]), 0.0);
        assert!(!sq.contains([1.0, 0.5]), "boundary points are outside");

        let disc = make_domain(&DomainSpec::Disc { center: [0.0, 0.0], radius: 1.0 }).unwrap();
        assert!(disc.contains([0.6, 0.0]));
        assert!((disc.boundary_distance([0.6, 0.0]) - 0.4).abs() < 1e-15);
    }

    #[test]
    fn ellipse_distance_matches_circle_when_round() {
        let e = make_domain(&DomainSpec::Ellipse { center: [0.0, 0.0], semi_axes: [1.0, 1.0] }).unwrap();
        for p in [[0.3, 0.4], [0.0, 0.9], [-0.5, 0.1], [0.0, 0.0_f64]] {
            let expected = 1.0 - p[0].hypot(p[1]);
            assert!((e.boundary_distance(p) - expected).abs() < 1e-12, "{p:?}");
        }
    }

    #[test]
    fn ellipse_distance_against_dense_boundary_sampling() {
        let (a, b) = (2.0, 0.7);
        let e = make_domain(&DomainSpec::Ellipse { center: [0.0, 0.0], semi_axes: [a, b] }).unwrap();
        let samples = 400_000;
        for p in [[0.3, 0.2], [1.5, 0.1], [-1.2, -0.3], [0.0, 0.5], [1.0, 0.0], [0.0, 0.0]] {
            let brute = (0..samples)
                .map(|k| {
                    let t = std::f64::consts::TAU * k as f64 / samples as f64;
                    (a * t.cos() - p[0]).hypot(b * t.sin() - p[1])
                })
                .fold(f64::INFINITY, f64::min);
            let d = e.boundary_distance(p);
            assert!(d <= brute + 1e-12, "{p:?}: {d} vs {brute}");
            assert!(brute - d < 1e-9, "{p:?}: {d} vs {brute}");
        }
    }

    #[test]
    fn random_polygons_are_valid_and_reproducible() {
        for seed in 0..20 {
            let spec = random_convex_polygon(seed, 3 + (seed as usize % 9), [1.0, 0.6]).unwrap();
            assert_eq!(spec, random_convex_polygon(seed, 3 + (seed as usize % 9), [1.0, 0.6]).unwrap());
            make_domain(&spec).unwrap();
        }
    }

    #[test]
    fn spec_json_round_trip() {
        let text = r#"{"kind":"ellipse","center":[0.5,0.0],"semi_axes":[1.0,0.5]}"#;
        let spec = DomainSpec::from_json(text).unwrap();
        assert_eq!(spec, DomainSpec::Ellipse { center: [0.5, 0.0], semi_axes: [1.0, 0.5] });
        let interval = DomainSpec::from_json(r#"{"kind":"interval","a":0,"b":1}"#).unwrap();
        assert_eq!(interval, DomainSpec::Interval { a: 0.0, b: 1.0 });
    }
}
