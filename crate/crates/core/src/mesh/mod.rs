//! Intrinsic triangle meshes of closed oriented surfaces of genus at least two.
//!
//! A mesh is purely combinatorial plus one positive length per edge; there
//! is no embedding. Faces may share more than one edge and an edge may be a
//! loop (both ends at one vertex), which is what the coarse polygon
//! triangulations look like. Each face therefore records the ids of its
//! three edges explicitly instead of relying on vertex pairs.
//!
//! Geometry is computed once at construction, treating each face as the
//! Euclidean triangle with the given side lengths: corner angles, Heron
//! areas, barycentric vertex areas, cotan edge weights and angle defects.
//! Because each face's angles sum to pi, the angle defects sum to
//! `2 pi chi` up to rounding.

mod build;
mod hyperbolic;
mod io;
mod laplace;

use std::f64::consts::PI;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::field::{MeshId, ScalarField};

pub use build::{build_genus_surface, build_genus_surface_capped, DEFAULT_VERTEX_CAP};
pub use hyperbolic::{disk_distance, disk_midpoint};
pub use io::MeshFile;
pub use laplace::{cotan_laplacian, LaplaceOperator, DEGENERATE_ANGLE_TOL};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub endpoints: [usize; 2],
    pub length: f64,
}

#[derive(Debug, Clone)]
pub struct SurfaceMesh {
    genus: u32,
    vertex_count: usize,
    faces: Vec<[usize; 3]>,
    /// `face_edges[f][k]` is the edge opposite corner `k`, running from
    /// corner `k + 1` to corner `k + 2`.
    face_edges: Vec<[usize; 3]>,
    edges: Vec<Edge>,
    corner_angles: Vec<[f64; 3]>,
    face_areas: Vec<f64>,
    vertex_areas: Vec<f64>,
    cotan_weights: Vec<f64>,
    angle_defects: Vec<f64>,
    id: MeshId,
}

impl SurfaceMesh {
    /// Validates the combinatorics and lengths and caches the geometry.
    ///
    /// Rejects anything that is not a closed oriented 2-manifold of the
    /// declared genus: every edge must border exactly two face sides with
    /// opposite orientations, the corners around each vertex must form a
    /// single cycle, and `V - E + F` must equal `2 - 2 genus`.
    pub fn new(
        genus: u32,
        vertex_count: usize,
        faces: Vec<[usize; 3]>,
        face_edges: Vec<[usize; 3]>,
        edges: Vec<Edge>,
    ) -> Result<Self> {
        if genus < 2 {
            return Err(Error::Domain(format!("genus must be >= 2, got {genus}")));
        }
        if faces.len() != face_edges.len() {
            return Err(Error::InvalidMesh(format!(
                "{} faces but {} face edge triples",
                faces.len(),
                face_edges.len()
            )));
        }
        check_topology(vertex_count, &faces, &face_edges, &edges)?;

        let chi = vertex_count as i64 - edges.len() as i64 + faces.len() as i64;
        if chi != 2 - 2 * genus as i64 {
            return Err(Error::InvalidMesh(format!(
                "Euler characteristic {chi} does not match genus {genus} (expected {})",
                2 - 2 * genus as i64
            )));
        }

        let mut corner_angles = Vec::with_capacity(faces.len());
        let mut face_areas = Vec::with_capacity(faces.len());
        let mut cotan_weights = vec![0.0; edges.len()];
        let mut vertex_areas = vec![0.0; vertex_count];
        let mut angle_sums = vec![0.0; vertex_count];
        for (f, (tri, fe)) in faces.iter().zip(&face_edges).enumerate() {
            let l = fe.map(|e| edges[e].length);
            if l.iter().any(|&x| !(x.is_finite() && x > 0.0)) {
                return Err(Error::InvalidMesh(format!("face {f} has non-positive edge length {l:?}")));
            }
            for k in 0..3 {
                if l[k] >= l[(k + 1) % 3] + l[(k + 2) % 3] {
                    return Err(Error::InvalidMesh(format!(
                        "face {f} violates the strict triangle inequality: {l:?}"
                    )));
                }
            }
            let area = heron_area(l);
            let angles = corner_angles_from_lengths(l);
            let cot = face_cotangents(l);
            for k in 0..3 {
                cotan_weights[fe[k]] += 0.5 * cot[k];
                vertex_areas[tri[k]] += area / 3.0;
                angle_sums[tri[k]] += angles[k];
            }
            corner_angles.push(angles);
            face_areas.push(area);
        }
        let angle_defects = angle_sums.iter().map(|s| 2.0 * PI - s).collect();

        let id = fingerprint(genus, vertex_count, &faces, &face_edges, &edges);
        Ok(Self {
            genus,
            vertex_count,
            faces,
            face_edges,
            edges,
            corner_angles,
            face_areas,
            vertex_areas,
            cotan_weights,
            angle_defects,
            id,
        })
    }

    pub fn id(&self) -> MeshId {
        self.id
    }

    pub fn genus(&self) -> u32 {
        self.genus
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    pub fn euler_characteristic(&self) -> i64 {
        2 - 2 * self.genus as i64
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    pub fn face_edges(&self) -> &[[usize; 3]] {
        &self.face_edges
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn corner_angles(&self) -> &[[f64; 3]] {
        &self.corner_angles
    }

    pub fn face_areas(&self) -> &[f64] {
        &self.face_areas
    }

    /// Barycentric vertex areas: one third of each incident face.
    pub fn vertex_areas(&self) -> &[f64] {
        &self.vertex_areas
    }

    /// `w_e = (cot a + cot b) / 2` over the two angles opposite each edge.
    pub fn cotan_weights(&self) -> &[f64] {
        &self.cotan_weights
    }

    pub fn angle_defects(&self) -> &[f64] {
        &self.angle_defects
    }

    pub fn total_area(&self) -> f64 {
        self.face_areas.iter().sum()
    }

    /// Lengths of the three sides of face `f`, indexed by opposite corner.
    pub fn face_lengths(&self, f: usize) -> [f64; 3] {
        self.face_edges[f].map(|e| self.edges[e].length)
    }

    pub fn mean_edge_length(&self) -> f64 {
        self.edges.iter().map(|e| e.length).sum::<f64>() / self.edges.len() as f64
    }

    /// Vertex neighbours along edges, with the connecting edge length.
    /// Loops are skipped; parallel edges appear once each.
    pub fn vertex_neighbors(&self) -> Vec<Vec<(usize, f64)>> {
        let mut adj = vec![Vec::new(); self.vertex_count];
        for e in &self.edges {
            let [a, b] = e.endpoints;
            if a != b {
                adj[a].push((b, e.length));
                adj[b].push((a, e.length));
            }
        }
        adj
    }

    pub fn field(&self, values: Vec<f64>) -> Result<ScalarField> {
        if values.len() != self.vertex_count {
            return Err(Error::Domain(format!(
                "field has {} values, mesh has {} vertices",
                values.len(),
                self.vertex_count
            )));
        }
        Ok(ScalarField::new(self.id, values))
    }

    pub fn constant_field(&self, value: f64) -> ScalarField {
        ScalarField::constant(self.id, self.vertex_count, value)
    }

    pub fn ensure_owns(&self, field: &ScalarField) -> Result<()> {
        if field.mesh() != self.id || field.len() != self.vertex_count {
            return Err(Error::Domain(format!(
                "field belongs to mesh {} but was used with mesh {}",
                field.mesh(),
                self.id
            )));
        }
        Ok(())
    }
}

/// Angle-defect curvature `K(v) = delta_v / A_v` of the mesh metric.
pub fn vertex_curvature_background(mesh: &SurfaceMesh) -> ScalarField {
    let k = mesh
        .angle_defects()
        .iter()
        .zip(mesh.vertex_areas())
        .map(|(d, a)| d / a)
        .collect();
    ScalarField::new(mesh.id(), k)
}

/// Squared gradient norm of `u`, measured in the conformal metric
/// `e^{2 c} h` where `h` is the mesh metric and `c = conformal_u`.
///
/// On each face the affine interpolant has `|grad u|^2 A_f =
/// 1/2 sum_k cot(theta_k) (u_{k+1} - u_{k+2})^2`; face values are averaged
/// to vertices with the barycentric weights and then multiplied by
/// `e^{-2 c(v)}`.
pub fn gradient_norm_sq(mesh: &SurfaceMesh, u: &ScalarField, conformal_u: &ScalarField) -> Result<ScalarField> {
    mesh.ensure_owns(u)?;
    mesh.ensure_owns(conformal_u)?;
    let degenerate = laplace::degenerate_faces(mesh, DEGENERATE_ANGLE_TOL);
    if !degenerate.is_empty() {
        return Err(Error::Degenerate { faces: degenerate });
    }
    let lengths: Vec<_> = (0..mesh.face_count()).map(|f| mesh.face_lengths(f)).collect();
    let out = vertex_gradient_sq(mesh.vertex_count(), mesh.faces(), &lengths, u.values())
        .iter()
        .zip(conformal_u.values())
        .map(|(g, c)| g * (-2.0 * c).exp())
        .collect();
    Ok(ScalarField::new(mesh.id(), out))
}

/// Barycentric vertex average of the per-face `|grad u|^2` of the affine
/// interpolant, for any triangle soup.
pub(crate) fn vertex_gradient_sq(vertex_count: usize, faces: &[[usize; 3]], lengths: &[[f64; 3]], u: &[f64]) -> Vec<f64> {
    let mut energy_share = vec![0.0; vertex_count];
    let mut area_share = vec![0.0; vertex_count];
    for (tri, &l) in faces.iter().zip(lengths) {
        let cot = face_cotangents(l);
        let energy: f64 = (0..3)
            .map(|k| {
                let du = u[tri[(k + 1) % 3]] - u[tri[(k + 2) % 3]];
                0.5 * cot[k] * du * du
            })
            .sum();
        let area = heron_area(l);
        // face value energy / area, weighted by area / 3
        for &v in tri {
            energy_share[v] += energy / 3.0;
            area_share[v] += area / 3.0;
        }
    }
    energy_share.iter().zip(&area_share).map(|(e, a)| e / a).collect()
}

/// `cot` of each corner angle from the side lengths (side `k` opposite corner `k`).
pub(crate) fn face_cotangents(l: [f64; 3]) -> [f64; 3] {
    let area = heron_area(l);
    std::array::from_fn(|k| {
        let (a, b, c) = (l[k], l[(k + 1) % 3], l[(k + 2) % 3]);
        (b * b + c * c - a * a) / (4.0 * area)
    })
}

pub(crate) fn heron_area(l: [f64; 3]) -> f64 {
    // Kahan's ordering: a >= b >= c
    let mut s = l;
    s.sort_by(|x, y| y.total_cmp(x));
    let [a, b, c] = s;
    0.25 * ((a + (b + c)) * (c - (a - b)) * (c + (a - b)) * (a + (b - c))).sqrt()
}

fn corner_angles_from_lengths(l: [f64; 3]) -> [f64; 3] {
    let mut out = [0.0; 3];
    for k in 0..3 {
        let (a, b, c) = (l[k], l[(k + 1) % 3], l[(k + 2) % 3]);
        let cos = ((b * b + c * c - a * a) / (2.0 * b * c)).clamp(-1.0, 1.0);
        out[k] = cos.acos();
    }
    out
}

fn check_topology(
    vertex_count: usize,
    faces: &[[usize; 3]],
    face_edges: &[[usize; 3]],
    edges: &[Edge],
) -> Result<()> {
    // sides[e] = face sides (f, k) that use edge e
    let mut sides: Vec<Vec<(usize, usize)>> = vec![Vec::new(); edges.len()];
    for (f, (tri, fe)) in faces.iter().zip(face_edges).enumerate() {
        for k in 0..3 {
            if tri[k] >= vertex_count {
                return Err(Error::InvalidMesh(format!("face {f} references vertex {} >= {vertex_count}", tri[k])));
            }
            let e = fe[k];
            if e >= edges.len() {
                return Err(Error::InvalidMesh(format!("face {f} references edge {e} >= {}", edges.len())));
            }
            let (a, b) = (tri[(k + 1) % 3], tri[(k + 2) % 3]);
            let [p, q] = edges[e].endpoints;
            if !((a == p && b == q) || (a == q && b == p)) {
                return Err(Error::InvalidMesh(format!(
                    "face {f} side {k} joins {a}-{b} but edge {e} joins {p}-{q}"
                )));
            }
            sides[e].push((f, k));
        }
    }
    for (e, s) in sides.iter().enumerate() {
        if s.len() != 2 {
            return Err(Error::InvalidMesh(format!("edge {e} borders {} face sides, expected 2", s.len())));
        }
        let dir = |&(f, k): &(usize, usize)| (faces[f][(k + 1) % 3], faces[f][(k + 2) % 3]);
        let (a0, b0) = dir(&s[0]);
        let (a1, b1) = dir(&s[1]);
        if a0 != b0 && !(a0 == b1 && b0 == a1) {
            return Err(Error::InvalidMesh(format!(
                "edge {e} is traversed in the same direction by both faces (not oriented)"
            )));
        }
    }

    // Walk the corners around each vertex: from corner (f, k) leave along
    // the side opposite k + 2 (which starts at corner k), cross to the
    // twin side (g, j); the same vertex is corner j + 2 of g.
    let mut visited = vec![[false; 3]; faces.len()];
    let mut cycles = vec![0usize; vertex_count];
    for f0 in 0..faces.len() {
        for k0 in 0..3 {
            if visited[f0][k0] {
                continue;
            }
            let v = faces[f0][k0];
            cycles[v] += 1;
            let (mut f, mut k) = (f0, k0);
            loop {
                visited[f][k] = true;
                let e = face_edges[f][(k + 2) % 3];
                let (g, j) = if sides[e][0] == (f, (k + 2) % 3) { sides[e][1] } else { sides[e][0] };
                let (nf, nk) = (g, (j + 2) % 3);
                if faces[nf][nk] != v {
                    return Err(Error::InvalidMesh(format!("corner cycle at vertex {v} is inconsistent")));
                }
                if (nf, nk) == (f0, k0) {
                    break;
                }
                if visited[nf][nk] {
                    return Err(Error::InvalidMesh(format!("corner cycle at vertex {v} is inconsistent")));
                }
                (f, k) = (nf, nk);
            }
        }
    }
    if let Some(v) = cycles.iter().position(|&c| c != 1) {
        return Err(Error::InvalidMesh(format!(
            "vertex {v} has {} corner cycles, expected exactly one (non-manifold or isolated)",
            cycles[v]
        )));
    }
    Ok(())
}

fn fingerprint(
    genus: u32,
    vertex_count: usize,
    faces: &[[usize; 3]],
    face_edges: &[[usize; 3]],
    edges: &[Edge],
) -> MeshId {
    let mut h = Sha256::new();
    h.update(genus.to_le_bytes());
    h.update((vertex_count as u64).to_le_bytes());
    for (tri, fe) in faces.iter().zip(face_edges) {
        for &x in tri.iter().chain(fe) {
            h.update((x as u64).to_le_bytes());
        }
    }
    for e in edges {
        h.update((e.endpoints[0] as u64).to_le_bytes());
        h.update((e.endpoints[1] as u64).to_le_bytes());
        h.update(e.length.to_bits().to_le_bytes());
    }
    let digest = h.finalize();
    MeshId(u64::from_le_bytes(digest[..8].try_into().unwrap()))
}
