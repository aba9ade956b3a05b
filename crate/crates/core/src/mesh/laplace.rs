use std::f64::consts::PI;

use super::{face_cotangents, SurfaceMesh};
use crate::error::{Error, Result};
use crate::field::MeshId;
use crate::sparse::CsrMatrix;

/// Faces with an angle at or above `pi - DEGENERATE_ANGLE_TOL` are rejected.
pub const DEGENERATE_ANGLE_TOL: f64 = 1e-8;

/// Integrated cotan Laplacian of a mesh metric.
///
/// Positive semidefinite, with `(L u)_v ~ -A_v (Delta u)(v)` for the
/// geometer's Laplacian `Delta`. In two dimensions the integrated operator
/// is conformally invariant, so the same matrix serves every metric
/// `e^{2u} h`: `Delta_{e^{2u} h} = e^{-2u} Delta_h`.
#[derive(Debug, Clone)]
pub struct LaplaceOperator {
    mesh: MeshId,
    matrix: CsrMatrix,
}

impl LaplaceOperator {
    pub fn mesh(&self) -> MeshId {
        self.mesh
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        self.matrix.mul_vec(u)
    }

    /// Largest `|(L 1)_v|`.
    pub fn kernel_defect(&self) -> f64 {
        let ones = vec![1.0; self.dim()];
        self.apply(&ones).iter().fold(0.0, |m, x| m.max(x.abs()))
    }
}

pub(crate) fn degenerate_faces(mesh: &SurfaceMesh, tol: f64) -> Vec<usize> {
    mesh.corner_angles()
        .iter()
        .enumerate()
        .filter(|(_, a)| a.iter().any(|&x| x >= PI - tol))
        .map(|(f, _)| f)
        .collect()
}

/// Assembles `L` with off-diagonal `-w_e` and diagonal `sum w_e` over
/// incident edges. Loops contribute nothing.
pub fn cotan_laplacian(mesh: &SurfaceMesh) -> Result<LaplaceOperator> {
    let degenerate = degenerate_faces(mesh, DEGENERATE_ANGLE_TOL);
    if !degenerate.is_empty() {
        return Err(Error::Degenerate { faces: degenerate });
    }
    let lengths: Vec<_> = (0..mesh.face_count()).map(|f| mesh.face_lengths(f)).collect();
    Ok(LaplaceOperator {
        mesh: mesh.id(),
        matrix: assemble_cotan(mesh.vertex_count(), mesh.faces(), &lengths),
    })
}

/// Face-by-face assembly; each face side adds half the cotangent of its
/// opposite angle. Works on any triangle soup, open or closed.
pub(crate) fn assemble_cotan(vertex_count: usize, faces: &[[usize; 3]], lengths: &[[f64; 3]]) -> CsrMatrix {
    let mut triplets = Vec::with_capacity(12 * faces.len());
    for (tri, &l) in faces.iter().zip(lengths) {
        let cot = face_cotangents(l);
        for k in 0..3 {
            let (a, b) = (tri[(k + 1) % 3], tri[(k + 2) % 3]);
            if a == b {
                continue;
            }
            let w = 0.5 * cot[k];
            triplets.extend([(a, a, w), (b, b, w), (a, b, -w), (b, a, -w)]);
        }
    }
    CsrMatrix::from_triplets(vertex_count, &triplets)
}
