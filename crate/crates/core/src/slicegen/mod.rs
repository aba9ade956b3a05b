//! CMC slice data generated from the Gauss equation.
//!
//! A slice of mean curvature `tau` carries the metric `g = e^{2u} h` over
//! the background mesh metric `h`. Its curvature must equal
//! `-(1 + tau^2) + W` where `W >= 0` is the squared traceless part of the
//! shape operator. Prescribing `W = N e^{-4u}` for a density `N >= 0` on
//! the background turns this into the monotone equation
//!
//! ```text
//! e^{-2u} (K_h - Delta_h u) = -(1 + tau^2) + N e^{-4u}
//! ```
//!
//! which is solved for `u` by Newton iteration. The slice curvature is then
//! read back as `K = e^{-2u} (K_h + (L u)_v / A_v)`, so the slice inherits
//! the exact discrete Gauss-Bonnet identity of the background.
//!
//! Slices at different `tau` are independent solves. They are not claimed
//! to be leaves of one spacetime.

mod density;
mod io;

use std::f64::consts::PI;
use std::sync::Arc;

use crate::elliptic::{newton_solve, SemilinearProblem, SolverConfig, Transcript};
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::mesh::{cotan_laplacian, vertex_curvature_background, LaplaceOperator, SurfaceMesh};

pub use density::{edge_path_distances, BumpRadius, BumpSpec, DensitySpec, DifferentialDensity};
pub use io::SliceFile;

/// `W` below `-GEOMETRY_TOL` anywhere is a solver fault.
pub const GEOMETRY_TOL: f64 = 1e-10;

/// A background mesh with its Laplacian and angle-defect curvature.
#[derive(Debug, Clone)]
pub struct Background {
    mesh: SurfaceMesh,
    laplacian: LaplaceOperator,
    curvature: ScalarField,
}

impl Background {
    pub fn new(mesh: SurfaceMesh) -> Result<Arc<Self>> {
        let laplacian = cotan_laplacian(&mesh)?;
        let curvature = vertex_curvature_background(&mesh);
        Ok(Arc::new(Self { mesh, laplacian, curvature }))
    }

    pub fn mesh(&self) -> &SurfaceMesh {
        &self.mesh
    }

    pub fn laplacian(&self) -> &LaplaceOperator {
        &self.laplacian
    }

    pub fn curvature(&self) -> &ScalarField {
        &self.curvature
    }

    pub fn areas(&self) -> &[f64] {
        self.mesh.vertex_areas()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.mesh.euler_characteristic()
    }
}

/// Local orthonormal-frame components of a shape operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapeOperatorSample {
    pub b11: f64,
    pub b12: f64,
    pub b22: f64,
}

impl ShapeOperatorSample {
    pub fn trace(&self) -> f64 {
        self.b11 + self.b22
    }

    /// Half the trace.
    pub fn mean_curvature(&self) -> f64 {
        0.5 * self.trace()
    }

    pub fn determinant(&self) -> f64 {
        self.b11 * self.b22 - self.b12 * self.b12
    }

    /// Gauss equation in AdS: `K = -1 - det B`.
    pub fn gauss_curvature(&self) -> f64 {
        -1.0 - self.determinant()
    }

    /// `(b11 - b22)^2 / 4 + b12^2`, which equals `K + 1 + H^2`.
    pub fn umbilicity_defect(&self) -> f64 {
        0.25 * (self.b11 - self.b22).powi(2) + self.b12 * self.b12
    }

    pub fn is_umbilic(&self) -> bool {
        self.b11 == self.b22 && self.b12 == 0.0
    }
}

#[derive(Debug, Clone)]
pub struct SliceGeometry {
    tau: f64,
    background: Arc<Background>,
    conformal: ScalarField,
    curvature: ScalarField,
    traceless: ScalarField,
    provenance: String,
    transcript: Option<Transcript>,
}

impl SliceGeometry {
    /// Assembles a slice from stored fields (for example a slice file).
    ///
    /// Checks sizes, finiteness and `W >= -GEOMETRY_TOL`; Gauss-Bonnet is
    /// not enforced since hand-made slices need not satisfy it.
    pub fn from_parts(
        background: Arc<Background>,
        tau: f64,
        conformal: Vec<f64>,
        curvature: Vec<f64>,
        traceless: Vec<f64>,
        provenance: impl Into<String>,
    ) -> Result<Self> {
        if !tau.is_finite() {
            return Err(Error::Domain(format!("tau must be finite, got {tau}")));
        }
        let mesh = background.mesh();
        let conformal = mesh.field(conformal)?;
        let curvature = mesh.field(curvature)?;
        let traceless = mesh.field(traceless)?;
        for (name, f) in [("u", &conformal), ("K", &curvature), ("W", &traceless)] {
            if let Some(v) = f.values().iter().position(|x| !x.is_finite()) {
                return Err(Error::Domain(format!("slice field {name} is not finite at vertex {v}")));
            }
        }
        let slice = Self {
            tau,
            background,
            conformal,
            curvature,
            traceless,
            provenance: provenance.into(),
            transcript: None,
        };
        slice.check_traceless()?;
        Ok(slice)
    }

    /// Slice with `u = 0`, constant curvature `-(1 + tau^2) + c` and
    /// `W = c`. Does not satisfy Gauss-Bonnet unless `c` happens to make it;
    /// meant for constant-coefficient checks of the slice solvers.
    pub fn synthetic_constant(background: Arc<Background>, tau: f64, c: f64) -> Result<Self> {
        if !(c >= 0.0 && c.is_finite()) {
            return Err(Error::Domain(format!("synthetic traceless density must be >= 0, got {c}")));
        }
        let n = background.mesh().vertex_count();
        let k = -(1.0 + tau * tau) + c;
        Self::from_parts(
            background,
            tau,
            vec![0.0; n],
            vec![k; n],
            vec![c; n],
            format!("synthetic constant slice: tau={tau}, W={c}"),
        )
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn background(&self) -> &Arc<Background> {
        &self.background
    }

    pub fn mesh(&self) -> &SurfaceMesh {
        self.background.mesh()
    }

    /// `u` with `g = e^{2u} h`.
    pub fn conformal(&self) -> &ScalarField {
        &self.conformal
    }

    pub fn curvature(&self) -> &ScalarField {
        &self.curvature
    }

    /// `W = K + 1 + tau^2`, the squared traceless part.
    pub fn traceless(&self) -> &ScalarField {
        &self.traceless
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    /// Newton transcript of the generating solve, if the slice was generated.
    pub fn transcript(&self) -> Option<&Transcript> {
        self.transcript.as_ref()
    }

    /// Slice-metric vertex areas `A_v e^{2u_v}`.
    pub fn vertex_areas(&self) -> Vec<f64> {
        self.background
            .areas()
            .iter()
            .zip(self.conformal.values())
            .map(|(a, u)| a * (2.0 * u).exp())
            .collect()
    }

    pub fn area(&self) -> f64 {
        self.vertex_areas().iter().sum()
    }

    /// `|sum K A e^{2u} - 2 pi chi| / (2 pi |chi|)`
    pub fn gauss_bonnet_defect(&self) -> f64 {
        let total: f64 = self.curvature.values().iter().zip(self.vertex_areas()).map(|(k, a)| k * a).sum();
        let target = 2.0 * PI * self.background.euler_characteristic() as f64;
        (total - target).abs() / target.abs()
    }

    /// Largest `|K + 1 + tau^2 - W|`.
    pub fn gauss_equation_defect(&self) -> f64 {
        let q = 1.0 + self.tau * self.tau;
        self.curvature
            .values()
            .iter()
            .zip(self.traceless.values())
            .fold(0.0, |m, (k, w)| m.max((k + q - w).abs()))
    }

    pub fn is_umbilic(&self) -> bool {
        self.traceless.values().iter().all(|&w| w == 0.0)
    }

    fn check_traceless(&self) -> Result<()> {
        let (v, w) = self.traceless.argmin();
        if w < -GEOMETRY_TOL {
            return Err(Error::Consistency(format!(
                "traceless density W = {w:e} < 0 at vertex {v} (tau = {})",
                self.tau
            )));
        }
        Ok(())
    }
}

/// Solves for the conformal factor of the CMC-`tau` slice with traceless
/// density `N` and returns its curvature and `W = N e^{-4u}`.
///
/// The initial guess `-ln(1 + tau^2) / 2` is exact when `N = 0` and the
/// background curvature is exactly -1.
pub fn generate_slice(
    background: &Arc<Background>,
    density: &DifferentialDensity,
    tau: f64,
    config: &SolverConfig,
) -> Result<SliceGeometry> {
    if !tau.is_finite() {
        return Err(Error::Domain(format!("tau must be finite, got {tau}")));
    }
    let mesh = background.mesh();
    mesh.ensure_owns(density.field())?;
    let q = 1.0 + tau * tau;
    let kh = background.curvature().values();
    let n = density.field().values();

    let nonlinearity = |v: usize, u: f64| {
        let up = (2.0 * u).exp();
        let down = (-2.0 * u).exp();
        (-kh[v] - q * up + n[v] * down, -2.0 * q * up - 2.0 * n[v] * down)
    };
    let initial = vec![-0.5 * q.ln(); mesh.vertex_count()];
    let problem = SemilinearProblem::new(
        background.laplacian().matrix(),
        background.areas(),
        vec![1.0; mesh.vertex_count()],
        nonlinearity,
        initial,
    )?
    .with_residual_scale(q * density.field().max());
    let solved = newton_solve(&problem, config)?;
    let u = solved.solution;

    let lu = background.laplacian().apply(&u);
    let areas = background.areas();
    let curvature: Vec<f64> = (0..u.len()).map(|v| (-2.0 * u[v]).exp() * (kh[v] + lu[v] / areas[v])).collect();
    let traceless: Vec<f64> = (0..u.len()).map(|v| n[v] * (-4.0 * u[v]).exp()).collect();

    let slice = SliceGeometry {
        tau,
        background: Arc::clone(background),
        conformal: mesh.field(u)?,
        curvature: mesh.field(curvature)?,
        traceless: mesh.field(traceless)?,
        provenance: format!("generated: tau={tau}, max N={:e}", density.field().max()),
        transcript: Some(solved.transcript),
    };
    slice.check_traceless()?;
    Ok(slice)
}

/// One admissible frame per vertex: `b11 = tau + sqrt(W)`,
/// `b22 = tau - sqrt(W)`, `b12 = 0`.
pub fn shape_samples(slice: &SliceGeometry) -> Result<Vec<ShapeOperatorSample>> {
    slice.check_traceless()?;
    Ok(slice
        .traceless()
        .values()
        .iter()
        .map(|&w| {
            let r = w.max(0.0).sqrt();
            ShapeOperatorSample { b11: slice.tau + r, b12: 0.0, b22: slice.tau - r }
        })
        .collect())
}

#[cfg(test)]
mod tests;
