//! Genus-g surfaces from the regular hyperbolic 4g-gon.
//!
//! The polygon has interior angles `pi / (2g)`, so its 4g corners glue to a
//! single smooth vertex under the side pairing `a1 b1 a1^-1 b1^-1 ...`.
//! A central fan gives 4g triangles; each refinement level splits every
//! triangle into four at the hyperbolic midpoints of its edges, computed
//! in disk coordinates. Only after refinement are boundary points glued
//! and edge lengths measured.

use std::collections::HashMap;
use std::f64::consts::PI;

use super::hyperbolic::{disk_distance, disk_midpoint};
use super::{Edge, SurfaceMesh};
use crate::error::{Error, Result};

pub const DEFAULT_VERTEX_CAP: usize = 250_000;

/// Largest refinement level accepted before the vertex cap is even consulted.
const MAX_LEVEL: u32 = 12;

/// Paired sides must measure the same after gluing.
const GLUE_LENGTH_TOL: f64 = 1e-9;

/// Position of a fundamental-domain vertex on the polygon boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Boundary {
    Interior,
    Corner(usize),
    /// Strictly inside side `s` (from corner `s` to `s + 1`), at
    /// `idx / 2^level` of the way along.
    Side(usize, u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum VertexKey {
    Domain(usize),
    Corner,
    Side(usize, u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum EdgeKey {
    Domain(usize, usize),
    Side(usize, u64),
}

/// [`build_genus_surface_capped`] with [`DEFAULT_VERTEX_CAP`].
pub fn build_genus_surface(genus: u32, level: u32) -> Result<SurfaceMesh> {
    build_genus_surface_capped(genus, level, DEFAULT_VERTEX_CAP)
}

/// Builds the genus-`genus` surface refined `level` times.
///
/// Vertex 0 is the polygon centre and vertex 1 the glued corner; coarse
/// vertices keep their indices across levels.
pub fn build_genus_surface_capped(genus: u32, level: u32, max_vertices: usize) -> Result<SurfaceMesh> {
    if genus < 2 {
        return Err(Error::Domain(format!("genus must be ≥ 2, got {genus}")));
    }
    if level > MAX_LEVEL {
        return Err(Error::Resource(format!("refinement level {level} exceeds {MAX_LEVEL}")));
    }
    let faces = 4 * genus as u128 * 4u128.pow(level);
    let vertices = faces / 2 + 2 - 2 * genus as u128;
    if vertices > max_vertices as u128 {
        return Err(Error::Resource(format!(
            "genus {genus} level {level} needs {vertices} vertices, cap is {max_vertices}"
        )));
    }

    let steps = 1u64 << level;
    let mut domain = Domain::polygon(genus, steps);
    for _ in 0..level {
        domain.subdivide();
    }
    domain.glue(genus)
}

struct Domain {
    n: usize,
    steps: u64,
    points: Vec<[f64; 2]>,
    boundary: Vec<Boundary>,
    triangles: Vec<[usize; 3]>,
}

impl Domain {
    fn polygon(genus: u32, steps: u64) -> Self {
        let n = 4 * genus as usize;
        // right triangle centre / corner / side midpoint: cosh R = cot(pi/n) cot(alpha/2)
        let half_angle = PI / (4.0 * genus as f64);
        let cot = 1.0 / (PI / n as f64).tan() / half_angle.tan();
        let radius = (cot.acosh() / 2.0).tanh();

        let mut points = vec![[0.0, 0.0]];
        let mut boundary = vec![Boundary::Interior];
        for k in 0..n {
            let theta = 2.0 * PI * k as f64 / n as f64;
            points.push([radius * theta.cos(), radius * theta.sin()]);
            boundary.push(Boundary::Corner(k));
        }
        let triangles = (0..n).map(|k| [0, 1 + k, 1 + (k + 1) % n]).collect();
        Self { n, steps, points, boundary, triangles }
    }

    /// `(side, position)` pairs for a boundary vertex; corners sit on two sides.
    fn side_positions(&self, v: usize) -> Vec<(usize, u64)> {
        match self.boundary[v] {
            Boundary::Interior => Vec::new(),
            Boundary::Corner(k) => vec![(k, 0), ((k + self.n - 1) % self.n, self.steps)],
            Boundary::Side(s, i) => vec![(s, i)],
        }
    }

    /// Common side of two boundary vertices and their positions along it.
    fn shared_side(&self, a: usize, b: usize) -> Option<(usize, u64, u64)> {
        let pb = self.side_positions(b);
        self.side_positions(a)
            .into_iter()
            .find_map(|(s, i)| pb.iter().find(|&&(t, _)| t == s).map(|&(_, j)| (s, i, j)))
    }

    fn subdivide(&mut self) {
        let mut midpoints: HashMap<(usize, usize), usize> = HashMap::new();
        let mut next = Vec::with_capacity(self.triangles.len() * 4);
        let triangles = std::mem::take(&mut self.triangles);
        for [a, b, c] in triangles {
            let ab = self.midpoint(&mut midpoints, a, b);
            let bc = self.midpoint(&mut midpoints, b, c);
            let ca = self.midpoint(&mut midpoints, c, a);
            next.extend([[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]]);
        }
        self.triangles = next;
    }

    fn midpoint(&mut self, cache: &mut HashMap<(usize, usize), usize>, a: usize, b: usize) -> usize {
        let key = (a.min(b), a.max(b));
        if let Some(&m) = cache.get(&key) {
            return m;
        }
        let m = self.points.len();
        self.points.push(disk_midpoint(self.points[a], self.points[b]));
        let tag = match self.shared_side(a, b) {
            Some((s, i, j)) => Boundary::Side(s, (i + j) / 2),
            None => Boundary::Interior,
        };
        self.boundary.push(tag);
        cache.insert(key, m);
        m
    }

    /// Sides `4i, 4i+1` are kept; `4i+2` is glued reversed onto `4i` and
    /// `4i+3` onto `4i+1`.
    fn canonical_side(&self, s: usize, lo: u64, hi: u64) -> (usize, u64, u64) {
        if s % 4 < 2 {
            (s, lo, hi)
        } else {
            (s - 2, self.steps - hi, self.steps - lo)
        }
    }

    fn vertex_key(&self, v: usize) -> VertexKey {
        match self.boundary[v] {
            Boundary::Interior => VertexKey::Domain(v),
            Boundary::Corner(_) => VertexKey::Corner,
            Boundary::Side(s, i) => {
                let (s, i, _) = self.canonical_side(s, i, i);
                VertexKey::Side(s, i)
            }
        }
    }

    fn edge_key(&self, a: usize, b: usize) -> EdgeKey {
        match self.shared_side(a, b) {
            Some((s, i, j)) => {
                let (s, lo, _) = self.canonical_side(s, i.min(j), i.max(j));
                EdgeKey::Side(s, lo)
            }
            None => EdgeKey::Domain(a.min(b), a.max(b)),
        }
    }

    fn glue(self, genus: u32) -> Result<SurfaceMesh> {
        let mut vertex_index: HashMap<VertexKey, usize> = HashMap::new();
        let mut vertex_of = Vec::with_capacity(self.points.len());
        for v in 0..self.points.len() {
            let key = self.vertex_key(v);
            let next = vertex_index.len();
            vertex_of.push(*vertex_index.entry(key).or_insert(next));
        }

        let mut edge_index: HashMap<EdgeKey, usize> = HashMap::new();
        let mut edges: Vec<Edge> = Vec::new();
        let mut faces = Vec::with_capacity(self.triangles.len());
        let mut face_edges = Vec::with_capacity(self.triangles.len());
        let mut worst_mismatch: f64 = 0.0;
        for tri in &self.triangles {
            let mut fe = [0; 3];
            for k in 0..3 {
                let (a, b) = (tri[(k + 1) % 3], tri[(k + 2) % 3]);
                let length = disk_distance(self.points[a], self.points[b]);
                let key = self.edge_key(a, b);
                fe[k] = match edge_index.get(&key) {
                    Some(&e) => {
                        worst_mismatch = worst_mismatch.max((edges[e].length - length).abs());
                        e
                    }
                    None => {
                        edges.push(Edge { endpoints: [vertex_of[a], vertex_of[b]], length });
                        edge_index.insert(key, edges.len() - 1);
                        edges.len() - 1
                    }
                };
            }
            faces.push(tri.map(|v| vertex_of[v]));
            face_edges.push(fe);
        }
        if worst_mismatch > GLUE_LENGTH_TOL {
            return Err(Error::Consistency(format!(
                "glued sides differ in length by {worst_mismatch:e}"
            )));
        }
        SurfaceMesh::new(genus, vertex_index.len(), faces, face_edges, edges)
    }
}
