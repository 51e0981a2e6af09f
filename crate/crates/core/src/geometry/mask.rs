//! Uniform grids masked to a domain, with Shortley–Weller boundary gaps.

use super::{ConvexDomain, Point};
use crate::{Error, Result};

/// Unit axis directions in stencil order: −x, +x, −y, +y.
pub const AXIS_DIRECTIONS: [Point; 4] = [[-1.0, 0.0], [1.0, 0.0], [0.0, -1.0], [0.0, 1.0]];

/// Axis neighbourhood of one interior node.
///
/// Slots follow [`AXIS_DIRECTIONS`]. A missing neighbour means `∂Ω` is crossed
/// first; `gaps[k]` is then the distance to `∂Ω` in units of `h`, in `(0, 1]`.
/// For interior neighbours the gap is exactly 1. One-dimensional grids only
/// use the first two slots.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Stencil {
    pub neighbors: [Option<usize>; 4],
    pub gaps: [f64; 4],
}

/// A uniform grid over the bounding box of a domain with its interior nodes
/// enumerated row-major (x fastest).
#[derive(Clone, Debug)]
pub struct GridMask {
    domain: ConvexDomain,
    origin: Point,
    h: f64,
    dims: [usize; 2],
    inside: Vec<bool>,
    index: Vec<Option<usize>>,
    nodes: Vec<[usize; 2]>,
    stencils: Vec<Stencil>,
    distance: Vec<f64>,
}

/// Rasterises `domain` with spacing `h`.
///
/// The grid is centred on the bounding box so that symmetric domains get
/// symmetric masks. Nodes exactly on `∂Ω` are outside.
pub fn rasterize(domain: &ConvexDomain, h: f64) -> Result<GridMask> {
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::InvalidSpacing(h));
    }
    let dim = domain.dimension();
    let (lo, hi) = domain.bounding_box();
    let mut origin = [0.0; 2];
    let mut dims = [1usize; 2];
    let mut offsets = [0usize; 2];
    let mut centers = [0.0; 2];
    for k in 0..dim {
        let center = 0.5 * (lo[k] + hi[k]);
        let half = 0.5 * (hi[k] - lo[k]);
        let steps = (half / h - 1e-9).ceil().max(0.0) as usize;
        centers[k] = center;
        offsets[k] = steps;
        dims[k] = 2 * steps + 1;
        origin[k] = center - steps as f64 * h;
    }
    if dim == 1 {
        origin[1] = 0.0;
    }
    let total = dims[0] * dims[1];
    if total > 200_000_000 {
        return Err(Error::InvalidParameter(format!("grid with {total} nodes is too large")));
    }
    let coord = |i: usize, k: usize| centers[k] + (i as f64 - offsets[k] as f64) * h;

    let mut inside = vec![false; total];
    let mut index = vec![None; total];
    let mut nodes = Vec::new();
    for j in 0..dims[1] {
        for i in 0..dims[0] {
            let p = [coord(i, 0), if dim == 2 { coord(j, 1) } else { 0.0 }];
            if domain.contains(p) {
                let flat = j * dims[0] + i;
                inside[flat] = true;
                index[flat] = Some(nodes.len());
                nodes.push([i, j]);
            }
        }
    }

    let mut stencils = Vec::with_capacity(nodes.len());
    let mut distance = Vec::with_capacity(nodes.len());
    for &[i, j] in &nodes {
        let p = [coord(i, 0), if dim == 2 { coord(j, 1) } else { 0.0 }];
        let mut stencil = Stencil { neighbors: [None; 4], gaps: [1.0; 4] };
        for (slot, dir) in AXIS_DIRECTIONS.iter().enumerate().take(2 * dim) {
            let (ni, nj) = (i as isize + dir[0] as isize, j as isize + dir[1] as isize);
            let neighbor = if ni >= 0 && nj >= 0 && (ni as usize) < dims[0] && (nj as usize) < dims[1] {
                index[nj as usize * dims[0] + ni as usize]
            } else {
                None
            };
            stencil.neighbors[slot] = neighbor;
            if neighbor.is_none() {
                let gap = domain.exit_distance(p, *dir) / h;
                stencil.gaps[slot] = gap.clamp(f64::MIN_POSITIVE, 1.0);
            }
        }
        stencils.push(stencil);
        distance.push(domain.boundary_distance(p));
    }

    Ok(GridMask {
        domain: domain.clone(),
        origin,
        h,
        dims,
        inside,
        index,
        nodes,
        stencils,
        distance,
    })
}

impl GridMask {
    pub fn domain(&self) -> &ConvexDomain {
        &self.domain
    }

    pub fn dimension(&self) -> usize {
        self.domain.dimension()
    }

    /// Coordinates of grid node `(0, 0)`.
    pub fn origin(&self) -> Point {
        self.origin
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// Node counts per axis; the second is 1 for one-dimensional grids.
    pub fn dims(&self) -> [usize; 2] {
        self.dims
    }

    /// Inside flags for every grid node, row-major.
    pub fn inside_flags(&self) -> &[bool] {
        &self.inside
    }

    /// Number of interior nodes.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Grid indices `(i, j)` of interior node `k`.
    pub fn grid_index(&self, k: usize) -> [usize; 2] {
        self.nodes[k]
    }

    /// Interior node at grid position `(i, j)`, if any.
    pub fn node_at(&self, i: isize, j: isize) -> Option<usize> {
        if i < 0 || j < 0 || i as usize >= self.dims[0] || j as usize >= self.dims[1] {
            return None;
        }
        self.index[j as usize * self.dims[0] + i as usize]
    }

    pub fn point(&self, k: usize) -> Point {
        let [i, j] = self.nodes[k];
        self.grid_point(i as f64, j as f64)
    }

    /// Coordinates of a (possibly fractional) grid position.
    pub fn grid_point(&self, i: f64, j: f64) -> Point {
        let y = if self.dimension() == 2 { self.origin[1] + j * self.h } else { 0.0 };
        [self.origin[0] + i * self.h, y]
    }

    /// Fractional grid position of a point.
    pub fn grid_coords(&self, p: Point) -> [f64; 2] {
        let gy = if self.dimension() == 2 { (p[1] - self.origin[1]) / self.h } else { 0.0 };
        [(p[0] - self.origin[0]) / self.h, gy]
    }

    pub fn stencil(&self, k: usize) -> &Stencil {
        &self.stencils[k]
    }

    /// Distance from interior node `k` to `∂Ω`.
    pub fn boundary_distance(&self, k: usize) -> f64 {
        self.distance[k]
    }

    /// Whether every axis neighbour of node `k` is interior.
    pub fn is_full_stencil(&self, k: usize) -> bool {
        self.stencils[k].neighbors[..2 * self.dimension()].iter().all(Option::is_some)
    }

    /// Fails when fewer than 8 grid spacings fit across the diameter.
    pub fn check_resolution(&self) -> Result<()> {
        let across = self.domain.diameter() / self.h;
        if across < 8.0 || self.nodes.is_empty() {
            return Err(Error::GridTooCoarse { nodes_across: across, required: 8 });
        }
        Ok(())
    }

    /// Whether two masks describe the same grid and node set.
    pub fn same_grid(&self, other: &GridMask) -> bool {
        self.dims == other.dims
            && self.origin == other.origin
            && self.h == other.h
            && self.dimension() == other.dimension()
            && self.inside == other.inside
    }
}
