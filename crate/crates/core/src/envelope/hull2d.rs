//! Lower convex hull of lifted planar grid points, maintained as a regular
//! triangulation under incremental insertion.
//!
//! Three artificial vertices at symbolic height `+∞` enclose the points, so
//! every real point lies inside the current triangulation. A new point
//! removes the triangles whose lifted plane passes above it and is joined to
//! the boundary of that cavity; points above every plane are left out.
//! Ties are broken by simulation of simplicity: vertex `i` is lifted by
//! `εᵢ` with `ε₀ ≫ ε₁ ≫ …`, so the result does not depend on insertion order.

use std::cmp::Ordering;

use super::predicates::{orient_int, orient_query, sign_of_dot};

pub(crate) const NONE: u32 = u32::MAX;

/// Triangle with counter-clockwise vertices; `n[i]` is the neighbour across
/// the edge opposite `v[i]`.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Tri {
    pub v: [u32; 3],
    pub n: [u32; 3],
}

pub(crate) struct LowerHull {
    coords: Vec<[i64; 2]>,
    heights: Vec<f64>,
    n_real: usize,
    tris: Vec<Tri>,
    alive: Vec<bool>,
    free: Vec<u32>,
    in_hull: Vec<bool>,
    stamp: Vec<u32>,
    epoch: u32,
    start_of: Vec<u32>,
    last: u32,
    rng: u64,
}

fn hilbert_index(order: u64, x: u64, y: u64) -> u64 {
    let (mut x, mut y) = (x, y);
    let mut d = 0;
    let mut s = order / 2;
    while s > 0 {
        let rx = u64::from(x & s > 0);
        let ry = u64::from(y & s > 0);
        d += s * s * ((3 * rx) ^ ry);
        if ry == 0 {
            if rx == 1 {
                x = s.wrapping_sub(1).wrapping_sub(x) & (order - 1);
                y = s.wrapping_sub(1).wrapping_sub(y) & (order - 1);
            }
            std::mem::swap(&mut x, &mut y);
        }
        s /= 2;
    }
    d
}

impl LowerHull {
    /// Builds the lower hull of `(coords[i], heights[i])`. Coordinates must be
    /// distinct; they are shifted internally to start at the origin.
    pub fn build(coords: &[[i64; 2]], heights: &[f64]) -> Self {
        let n = coords.len();
        let min_x = coords.iter().map(|c| c[0]).min().unwrap_or(0);
        let min_y = coords.iter().map(|c| c[1]).min().unwrap_or(0);
        let mut shifted: Vec<[i64; 2]> = coords.iter().map(|c| [c[0] - min_x, c[1] - min_y]).collect();
        let extent = shifted.iter().map(|c| c[0].max(c[1])).max().unwrap_or(0);
        let m = extent + 1;
        shifted.extend_from_slice(&[[-m, -m], [4 * m, -m], [-m, 4 * m]]);
        let (a0, a1, a2) = (n as u32, n as u32 + 1, n as u32 + 2);
        let mut hull = LowerHull {
            coords: shifted,
            heights: heights.to_vec(),
            n_real: n,
            tris: vec![Tri { v: [a0, a1, a2], n: [NONE; 3] }],
            alive: vec![true],
            free: Vec::new(),
            in_hull: vec![false; n + 3],
            stamp: vec![0],
            epoch: 0,
            start_of: vec![NONE; n + 3],
            last: 0,
            rng: 0x9E37_79B9_7F4A_7C15,
        };
        hull.in_hull[n..].fill(true);

        let order = (extent.max(1) as u64 + 1).next_power_of_two();
        let mut sequence: Vec<u32> = (0..n as u32).collect();
        sequence.sort_by_key(|&i| {
            let c = hull.coords[i as usize];
            (hilbert_index(order, c[0] as u64, c[1] as u64), i)
        });
        for p in sequence {
            hull.insert(p);
        }
        hull
    }

    pub fn is_artificial(&self, v: u32) -> bool {
        v as usize >= self.n_real
    }

    pub fn triangles(&self) -> impl Iterator<Item = (u32, &Tri)> {
        self.tris.iter().enumerate().filter(|(t, _)| self.alive[*t]).map(|(t, tri)| (t as u32, tri))
    }

    pub fn triangle(&self, t: u32) -> &Tri {
        &self.tris[t as usize]
    }

    pub fn is_real(&self, t: u32) -> bool {
        self.tris[t as usize].v.iter().all(|&v| !self.is_artificial(v))
    }

    /// Whether real vertex `v` is a vertex of the lower hull.
    pub fn is_vertex(&self, v: u32) -> bool {
        self.in_hull[v as usize]
    }

    /// Shifted integer coordinates of a vertex.
    pub fn coord(&self, v: u32) -> [i64; 2] {
        self.coords[v as usize]
    }

    /// Offset subtracted from the input coordinates.
    pub fn shift_of(coords: &[[i64; 2]]) -> [i64; 2] {
        [
            coords.iter().map(|c| c[0]).min().unwrap_or(0),
            coords.iter().map(|c| c[1]).min().unwrap_or(0),
        ]
    }

    /// Visibility walk towards a point; `side(a, b)` is the orientation of the
    /// query with respect to the directed edge `a → b`. The edge to test first
    /// is drawn from `rng`, which guarantees termination.
    pub fn walk(&self, start: u32, rng: &mut u64, side: impl Fn(u32, u32) -> Ordering) -> u32 {
        let mut t = if self.alive[start as usize] { start } else { self.last };
        'outer: loop {
            *rng ^= *rng << 13;
            *rng ^= *rng >> 7;
            *rng ^= *rng << 17;
            let r = (*rng % 3) as usize;
            let tri = self.tris[t as usize];
            for k in 0..3 {
                let i = (r + k) % 3;
                let (a, b) = (tri.v[(i + 1) % 3], tri.v[(i + 2) % 3]);
                if side(a, b) == Ordering::Less && tri.n[i] != NONE {
                    t = tri.n[i];
                    continue 'outer;
                }
            }
            return t;
        }
    }

    /// Locates a query point given in shifted grid coordinates.
    pub fn locate(&self, start: u32, q: [f64; 2]) -> u32 {
        let mut rng = 0x2545_F491_4F6C_DD1D;
        self.walk(start, &mut rng, |a, b| orient_query(self.coords[a as usize], self.coords[b as usize], q))
    }

    /// Any live triangle, to start walks from.
    pub fn any_triangle(&self) -> u32 {
        self.last
    }

    /// Whether the point `p` lies strictly below the lifted plane of `t`.
    fn conflict(&self, t: u32, p: u32) -> bool {
        let [a, b, c] = self.tris[t as usize].v;
        let rows = [a, b, c, p];
        let pt = |v: u32| self.coords[v as usize];
        // Cofactors of the height column of det[[x, y, z, 1]].
        let s = [
            orient_int(pt(b), pt(c), pt(p)),
            -orient_int(pt(a), pt(c), pt(p)),
            orient_int(pt(a), pt(b), pt(p)),
            -orient_int(pt(a), pt(b), pt(c)),
        ];
        let infinite: i128 = rows
            .iter()
            .zip(&s)
            .filter(|(v, _)| self.is_artificial(**v))
            .map(|(_, &si)| si as i128)
            .sum();
        if infinite != 0 {
            return infinite > 0;
        }
        let mut terms = [(0.0, 0.0); 4];
        let mut count = 0;
        for (v, &si) in rows.iter().zip(&s) {
            if !self.is_artificial(*v) && si != 0 {
                terms[count] = (si as f64, self.heights[*v as usize]);
                count += 1;
            }
        }
        match sign_of_dot(&terms[..count]) {
            Ordering::Greater => true,
            Ordering::Less => false,
            Ordering::Equal => {
                // Symbolic lift: the lowest-indexed row with a nonzero cofactor decides.
                let mut order = [0usize, 1, 2, 3];
                order.sort_by_key(|&r| rows[r]);
                let r = order.into_iter().find(|&r| s[r] != 0).expect("triangle is nondegenerate");
                s[r] > 0
            }
        }
    }

    fn alloc(&mut self, tri: Tri) -> u32 {
        if let Some(t) = self.free.pop() {
            self.tris[t as usize] = tri;
            self.alive[t as usize] = true;
            t
        } else {
            self.tris.push(tri);
            self.alive.push(true);
            self.stamp.push(0);
            (self.tris.len() - 1) as u32
        }
    }

    fn insert(&mut self, p: u32) {
        let q = self.coords[p as usize];
        let mut rng = self.rng;
        let t0 = self.walk(self.last, &mut rng, |a, b| {
            orient_int(self.coords[a as usize], self.coords[b as usize], q).cmp(&0)
        });
        self.rng = rng;
        if !self.conflict(t0, p) {
            return;
        }
        self.epoch += 1;
        let epoch = self.epoch;
        let mut cavity = vec![t0];
        self.stamp[t0 as usize] = epoch;
        let mut k = 0;
        while k < cavity.len() {
            let t = cavity[k];
            k += 1;
            for nb in self.tris[t as usize].n {
                if nb != NONE && self.stamp[nb as usize] != epoch && self.conflict(nb, p) {
                    self.stamp[nb as usize] = epoch;
                    cavity.push(nb);
                }
            }
        }

        // Horizon edges (a, b, outside neighbour), counter-clockwise around the cavity.
        let mut horizon = Vec::with_capacity(cavity.len() + 2);
        for &t in &cavity {
            let tri = self.tris[t as usize];
            for i in 0..3 {
                let nb = tri.n[i];
                if nb == NONE || self.stamp[nb as usize] != epoch {
                    horizon.push((tri.v[(i + 1) % 3], tri.v[(i + 2) % 3], nb));
                }
            }
        }
        for &t in &cavity {
            for v in self.tris[t as usize].v {
                self.in_hull[v as usize] = false;
            }
        }
        for &(a, b, _) in &horizon {
            self.in_hull[a as usize] = true;
            self.in_hull[b as usize] = true;
        }
        self.in_hull[p as usize] = true;
        for &t in &cavity {
            self.alive[t as usize] = false;
            self.free.push(t);
        }

        let mut created = Vec::with_capacity(horizon.len());
        for &(a, b, nb) in &horizon {
            let t = self.alloc(Tri { v: [a, b, p], n: [NONE, NONE, nb] });
            if nb != NONE {
                let outer = &mut self.tris[nb as usize];
                let slot = (0..3).find(|&j| outer.v[j] != a && outer.v[j] != b).expect("shared edge");
                outer.n[slot] = t;
            }
            self.start_of[a as usize] = t;
            created.push(t);
        }
        for &t in &created {
            let b = self.tris[t as usize].v[1];
            let next = self.start_of[b as usize];
            self.tris[t as usize].n[0] = next;
            self.tris[next as usize].n[1] = t;
        }
        self.last = created[0];
    }
}
