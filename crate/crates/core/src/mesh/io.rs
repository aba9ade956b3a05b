//! JSON mesh files.
//!
//! ```json
//! { "genus": 2, "vertices": 62, "faces": [[0, 1, 2], ...],
//!   "edge_lengths": [{"u": 0, "v": 1, "len": 0.61}, ...],
//!   "face_edges": [[4, 0, 7], ...] }
//! ```
//!
//! `face_edges` (edge index opposite each corner) is optional. Without it
//! edges are matched to face sides by their unordered vertex pair, which
//! only works for simplicial meshes; loops and parallel edges are rejected.
//! The writer always emits `face_edges` so coarse polygon meshes round-trip.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Edge, SurfaceMesh};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeLength {
    pub u: usize,
    pub v: usize,
    pub len: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshFile {
    pub genus: u32,
    pub vertices: usize,
    pub faces: Vec<[usize; 3]>,
    pub edge_lengths: Vec<EdgeLength>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub face_edges: Option<Vec<[usize; 3]>>,
}

impl MeshFile {
    pub fn from_mesh(mesh: &SurfaceMesh) -> Self {
        Self {
            genus: mesh.genus(),
            vertices: mesh.vertex_count(),
            faces: mesh.faces().to_vec(),
            edge_lengths: mesh
                .edges()
                .iter()
                .map(|e| EdgeLength { u: e.endpoints[0], v: e.endpoints[1], len: e.length })
                .collect(),
            face_edges: Some(mesh.face_edges().to_vec()),
        }
    }

    pub fn into_mesh(self) -> Result<SurfaceMesh> {
        let edges: Vec<Edge> = self
            .edge_lengths
            .iter()
            .map(|e| Edge { endpoints: [e.u, e.v], length: e.len })
            .collect();
        let face_edges = match self.face_edges {
            Some(fe) => fe,
            None => match_edges_by_pair(&self.faces, &edges)?,
        };
        SurfaceMesh::new(self.genus, self.vertices, self.faces, face_edges, edges)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

impl SurfaceMesh {
    pub fn to_json(&self) -> Result<String> {
        MeshFile::from_mesh(self).to_json()
    }

    pub fn from_json(text: &str) -> Result<SurfaceMesh> {
        MeshFile::from_json(text)?.into_mesh()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<SurfaceMesh> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

fn match_edges_by_pair(faces: &[[usize; 3]], edges: &[Edge]) -> Result<Vec<[usize; 3]>> {
    let mut by_pair = HashMap::new();
    for (i, e) in edges.iter().enumerate() {
        let [a, b] = e.endpoints;
        if a == b {
            return Err(Error::InvalidMesh(format!(
                "edge {i} is a loop; loops need an explicit face_edges table"
            )));
        }
        if by_pair.insert((a.min(b), a.max(b)), i).is_some() {
            return Err(Error::InvalidMesh(format!(
                "parallel edges between {a} and {b}; these need an explicit face_edges table"
            )));
        }
    }
    faces
        .iter()
        .enumerate()
        .map(|(f, tri)| {
            let mut fe = [0; 3];
            for k in 0..3 {
                let (a, b) = (tri[(k + 1) % 3], tri[(k + 2) % 3]);
                fe[k] = *by_pair.get(&(a.min(b), a.max(b))).ok_or_else(|| {
                    Error::InvalidMesh(format!("face {f} uses {a}-{b}, which has no edge length"))
                })?;
            }
            Ok(fe)
        })
        .collect()
}
