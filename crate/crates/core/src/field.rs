use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Content fingerprint of a [`SurfaceMesh`](crate::mesh::SurfaceMesh).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MeshId(pub u64);

impl std::fmt::Display for MeshId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:016x}", self.0)
    }
}

/// Per-vertex real values tied to the mesh they were computed on.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    mesh: MeshId,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(mesh: MeshId, values: Vec<f64>) -> Self {
        Self { mesh, values }
    }

    pub fn constant(mesh: MeshId, len: usize, value: f64) -> Self {
        Self::new(mesh, vec![value; len])
    }

    pub fn mesh(&self) -> MeshId {
        self.mesh
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Index and value of the smallest entry (first one on ties).
    pub fn argmin(&self) -> (usize, f64) {
        self.values
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::INFINITY), |best, (i, x)| if x < best.1 { (i, x) } else { best })
    }

    /// Index and value of the largest entry (first one on ties).
    pub fn argmax(&self) -> (usize, f64) {
        self.values
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, x)| if x > best.1 { (i, x) } else { best })
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::new(self.mesh, self.values.iter().map(|&x| f(x)).collect())
    }

    /// Pointwise combination with another field on the same mesh.
    pub fn zip_with(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.ensure_same_mesh(other)?;
        Ok(Self::new(
            self.mesh,
            self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        ))
    }

    pub fn ensure_same_mesh(&self, other: &ScalarField) -> Result<()> {
        if self.mesh != other.mesh || self.values.len() != other.values.len() {
            return Err(Error::Domain(format!(
                "fields live on different meshes ({} with {} values vs {} with {})",
                self.mesh,
                self.values.len(),
                other.mesh,
                other.values.len()
            )));
        }
        Ok(())
    }
}

impl std::ops::Index<usize> for ScalarField {
    type Output = f64;

    fn index(&self, v: usize) -> &f64 {
        &self.values[v]
    }
}
