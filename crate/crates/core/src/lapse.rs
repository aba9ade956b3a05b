//! Lapse of the CMC foliation on one slice.
//!
//! The lapse solves `1/2 Delta_g l - (2 tau^2 + K + 2) l + 1 = 0`. With
//! `Delta_g = e^{-2u} Delta_h` and the integrated Laplacian `L` this is the
//! SPD system
//!
//! ```text
//! (1/2 L + diag(A_v e^{2u_v} (2 tau^2 + K_v + 2))) l = A_v e^{2u_v}
//! ```
//!
//! whose zeroth-order coefficient is `1 + tau^2 + W >= 1`. At a maximum of
//! `l` the Laplacian term is non-negative, which gives `l <= 1/(1 + tau^2)`.

use crate::elliptic::{solve_linear_spd, SolverConfig};
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::report::BoundReport;
use crate::slicegen::SliceGeometry;

#[derive(Debug, Clone, PartialEq)]
pub struct LapseField {
    field: ScalarField,
    tau: f64,
}

impl LapseField {
    pub fn new(field: ScalarField, tau: f64) -> Result<Self> {
        if let Some(v) = field.values().iter().position(|&x| !(x > 0.0 && x.is_finite())) {
            return Err(Error::Consistency(format!(
                "lapse must be positive, got {:e} at vertex {v} (tau = {tau})",
                field[v]
            )));
        }
        Ok(Self { field, tau })
    }

    pub fn field(&self) -> &ScalarField {
        &self.field
    }

    pub fn values(&self) -> &[f64] {
        self.field.values()
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }
}

/// Zeroth-order coefficient `2 tau^2 + K + 2` at each vertex.
fn potential(slice: &SliceGeometry) -> Vec<f64> {
    let t2 = slice.tau() * slice.tau();
    slice.curvature().values().iter().map(|k| 2.0 * t2 + k + 2.0).collect()
}

pub fn solve_lapse(slice: &SliceGeometry, config: &SolverConfig) -> Result<LapseField> {
    let areas = slice.vertex_areas();
    let potential = potential(slice);
    if let Some(v) = potential.iter().position(|&c| !(c > 0.0)) {
        return Err(Error::Domain(format!(
            "lapse potential 2 tau^2 + K + 2 = {:e} is not positive at vertex {v}",
            potential[v]
        )));
    }
    let shift: Vec<f64> = areas.iter().zip(&potential).map(|(a, c)| a * c).collect();
    let system = slice.background().laplacian().matrix().scaled(0.5).with_diagonal_added(&shift);
    let lapse = solve_linear_spd(&system, &areas, config)?;
    LapseField::new(slice.mesh().field(lapse)?, slice.tau())
}

/// Pointwise residual of the lapse equation, `1/2 Delta_g l - (2 tau^2 + K + 2) l + 1`.
pub fn lapse_residual(slice: &SliceGeometry, lapse: &LapseField) -> Result<ScalarField> {
    slice.mesh().ensure_owns(lapse.field())?;
    let l = lapse.values();
    let ll = slice.background().laplacian().apply(l);
    let areas = slice.vertex_areas();
    let potential = potential(slice);
    let r = (0..l.len()).map(|v| -0.5 * ll[v] / areas[v] - potential[v] * l[v] + 1.0).collect();
    Ok(ScalarField::new(slice.mesh().id(), r))
}

/// Passes iff `max l <= 1/(1 + tau^2) + tol`.
pub fn check_lapse_bound(lapse: &LapseField, tau: f64, tol: f64) -> BoundReport {
    BoundReport::upper(tau, lapse.field().argmax(), 1.0 / (1.0 + tau * tau), tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_genus_surface;
    use crate::slicegen::{generate_slice, Background, DifferentialDensity};

    fn background(level: u32) -> std::sync::Arc<crate::slicegen::Background> {
        Background::new(build_genus_surface(2, level).unwrap()).unwrap()
    }

    #[test]
    fn fuchsian_slice_has_constant_lapse() {
        let bg = background(2);
        let cfg = SolverConfig::default();
        for (tau, expected) in [(1.0, 0.5), (0.0, 1.0)] {
            let slice = generate_slice(&bg, &DifferentialDensity::zero(bg.mesh()), tau, &cfg).unwrap();
            let l = solve_lapse(&slice, &cfg).unwrap();
            for &x in l.values() {
                assert!((x - expected).abs() < 1e-9, "{x} vs {expected}");
            }
            let report = check_lapse_bound(&l, tau, 1e-9);
            assert!(report.pass && report.margin.abs() < 1e-9);
        }
    }

    #[test]
    fn constant_traceless_slice() {
        let bg = background(1);
        let cfg = SolverConfig::default();
        let slice = crate::slicegen::SliceGeometry::synthetic_constant(bg.clone(), 1.0, 1.0).unwrap();
        let l = solve_lapse(&slice, &cfg).unwrap();
        assert!(l.values().iter().all(|x| (x - 1.0 / 3.0).abs() < 1e-12));

        let slice = crate::slicegen::SliceGeometry::synthetic_constant(bg, 0.0, 0.5).unwrap();
        let l = solve_lapse(&slice, &cfg).unwrap();
        let report = check_lapse_bound(&l, 0.0, 0.0);
        assert!(report.pass);
        assert!((report.extreme - 2.0 / 3.0).abs() < 1e-12);
        assert!((report.margin - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn residual_vanishes_at_solution() {
        let bg = background(2);
        let cfg = SolverConfig::default();
        let n = crate::slicegen::DensitySpec::bump(0, 0.1, crate::slicegen::BumpRadius::Length(1.0))
            .realize(bg.mesh())
            .unwrap();
        let slice = generate_slice(&bg, &n, 0.3, &cfg).unwrap();
        let l = solve_lapse(&slice, &cfg).unwrap();
        assert!(lapse_residual(&slice, &l).unwrap().sup_norm() < 1e-9);
    }

    #[test]
    fn rejects_non_positive_lapse() {
        let bg = background(0);
        let mut v = vec![0.5; bg.mesh().vertex_count()];
        v[0] = 0.0;
        let err = LapseField::new(bg.mesh().field(v).unwrap(), 0.0).unwrap_err();
        assert!(matches!(err, Error::Consistency(_)));
    }
}
