//! Uniformization of a slice to constant curvature `-(1 + tau^2)`.
//!
//! Writing `g = sigma h_tau` with `K(h_tau) = -(1 + tau^2)`, the factor
//! solves `1/2 Delta_g log(sigma) = -K - (1 + tau^2) / sigma`. With
//! `phi = log(sigma)` this is the semilinear problem
//!
//! ```text
//! -1/2 e^{-2u} (L phi)_v / A_v + K_v + (1 + tau^2) e^{-phi_v} = 0
//! ```
//!
//! whose Jacobian is SPD. Since `K >= -(1 + tau^2)`, a minimum of `phi`
//! cannot be negative, so `sigma >= 1`. Together with the lapse bound this
//! gives `sigma l >= 1/(1 + tau^2)`.

use std::f64::consts::PI;

use crate::elliptic::{newton_solve, SemilinearProblem, SolverConfig, Transcript};
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::lapse::LapseField;
use crate::mesh::gradient_norm_sq;
use crate::report::BoundReport;
use crate::slicegen::{generate_slice, Background, DifferentialDensity, SliceGeometry};

/// `|log sigma|` beyond this aborts the solve.
pub const LOG_SIGMA_LIMIT: f64 = 50.0;

#[derive(Debug, Clone)]
pub struct ConformalFactor {
    sigma: ScalarField,
    tau: f64,
    transcript: Transcript,
}

impl ConformalFactor {
    pub fn field(&self) -> &ScalarField {
        &self.sigma
    }

    pub fn values(&self) -> &[f64] {
        self.sigma.values()
    }

    pub fn log(&self) -> ScalarField {
        self.sigma.map(f64::ln)
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn transcript(&self) -> &Transcript {
        &self.transcript
    }
}

/// Solves for `sigma` starting from `log sigma = 0`.
pub fn solve_sigma(slice: &SliceGeometry, config: &SolverConfig) -> Result<ConformalFactor> {
    solve_sigma_from(slice, config, vec![0.0; slice.mesh().vertex_count()])
}

/// Solves for `sigma` from the initial guess `log_sigma`.
pub fn solve_sigma_from(slice: &SliceGeometry, config: &SolverConfig, log_sigma: Vec<f64>) -> Result<ConformalFactor> {
    let q = 1.0 + slice.tau() * slice.tau();
    let k = slice.curvature().values();
    let diffusion: Vec<f64> = slice.conformal().values().iter().map(|u| 0.5 * (-2.0 * u).exp()).collect();
    let nonlinearity = |v: usize, phi: f64| {
        let e = q * (-phi).exp();
        (k[v] + e, -e)
    };
    let problem = SemilinearProblem::new(
        slice.background().laplacian().matrix(),
        slice.background().areas(),
        diffusion,
        nonlinearity,
        log_sigma,
    )?
    .with_blow_up_limit(LOG_SIGMA_LIMIT)
    .with_residual_scale(q.max(slice.curvature().sup_norm()));
    let solved = newton_solve(&problem, config)?;
    let sigma = solved.solution.iter().map(|p| p.exp()).collect();
    Ok(ConformalFactor { sigma: slice.mesh().field(sigma)?, tau: slice.tau(), transcript: solved.transcript })
}

/// Conformal factor `u_bg` of the umbilic slice at `tau = 0`, that is the
/// uniformizing factor of the mesh metric to curvature -1.
pub fn background_conformal(background: &std::sync::Arc<Background>, config: &SolverConfig) -> Result<ScalarField> {
    let slice = generate_slice(background, &DifferentialDensity::zero(background.mesh()), 0.0, config)?;
    Ok(slice.conformal().clone())
}

/// Closed form `sigma = (1 + tau^2) e^{2(u - u_bg)}` for a generated slice.
///
/// A generated slice is conformal to the mesh metric, so its uniformizing
/// metric is `e^{2 u_bg} h / (1 + tau^2)` with `u_bg` from
/// [`background_conformal`]. On a background of curvature exactly -1,
/// `u_bg = 0` and this is `(1 + tau^2) e^{2u}`. Slices not produced by
/// `generate_slice` (loaded or synthetic ones) need not satisfy it.
pub fn sigma_closed_form(slice: &SliceGeometry, u_bg: &ScalarField) -> Result<ScalarField> {
    let q = 1.0 + slice.tau() * slice.tau();
    slice.conformal().zip_with(u_bg, |u, b| q * (2.0 * (u - b)).exp())
}

/// Passes iff `min sigma >= 1 - tol`.
pub fn check_sigma_bound(sigma: &ConformalFactor, tol: f64) -> BoundReport {
    BoundReport::lower(sigma.tau(), sigma.field().argmin(), 1.0, tol)
}

/// Passes iff `min sigma l >= 1/(1 + tau^2) - tol`.
pub fn check_product_bound(sigma: &ConformalFactor, lapse: &LapseField, tol: f64) -> Result<BoundReport> {
    let tau = sigma.tau();
    if tau != lapse.tau() {
        return Err(Error::Domain(format!("sigma is for tau = {tau} but the lapse is for tau = {}", lapse.tau())));
    }
    let product = sigma.field().zip_with(lapse.field(), |s, l| s * l)?;
    Ok(BoundReport::lower(tau, product.argmin(), 1.0 / (1.0 + tau * tau), tol))
}

/// Area of `h_tau = g / sigma`, `sum A_v e^{2u_v} / sigma_v`.
pub fn reference_area(slice: &SliceGeometry, sigma: &ConformalFactor) -> Result<f64> {
    slice.mesh().ensure_owns(sigma.field())?;
    Ok(slice.vertex_areas().iter().zip(sigma.values()).map(|(a, s)| a / s).sum())
}

/// Relative deviation of [`reference_area`] from `2 pi |chi| / (1 + tau^2)`,
/// the Gauss-Bonnet area at curvature `-(1 + tau^2)`.
pub fn reference_area_defect(slice: &SliceGeometry, sigma: &ConformalFactor) -> Result<f64> {
    let q = 1.0 + slice.tau() * slice.tau();
    let target = 2.0 * PI * slice.background().euler_characteristic().unsigned_abs() as f64 / q;
    Ok((reference_area(slice, sigma)? - target).abs() / target)
}

/// Both sides of `1/2 Delta_g log(sigma l)` = lapse and sigma equations
/// combined, with their largest pointwise gap.
#[derive(Debug, Clone)]
pub struct CombinedResidual {
    pub lhs: ScalarField,
    pub rhs: ScalarField,
    pub discrepancy: f64,
    pub vertex: usize,
}

/// `lhs = 1/2 Delta_g log(sigma l)` computed directly, against
/// `rhs = -K - (1+tau^2)/sigma + (2 tau^2 + K + 2) - 1/l - |grad l|_g^2 / (2 l^2)`.
///
/// The two sides agree in the continuum; the discrete gap measures the
/// consistency of the Laplacian and gradient discretizations.
pub fn combined_residual(slice: &SliceGeometry, sigma: &ConformalFactor, lapse: &LapseField) -> Result<CombinedResidual> {
    let mesh = slice.mesh();
    mesh.ensure_owns(sigma.field())?;
    mesh.ensure_owns(lapse.field())?;
    let tau = slice.tau();
    let q = 1.0 + tau * tau;
    let log_product: Vec<f64> = sigma.values().iter().zip(lapse.values()).map(|(s, l)| (s * l).ln()).collect();
    let lp = slice.background().laplacian().apply(&log_product);
    let areas = slice.background().areas();
    let u = slice.conformal().values();
    let k = slice.curvature().values();
    let grad = gradient_norm_sq(mesh, lapse.field(), slice.conformal())?;

    let n = mesh.vertex_count();
    let mut lhs = Vec::with_capacity(n);
    let mut rhs = Vec::with_capacity(n);
    let (mut discrepancy, mut vertex) = (0.0, 0);
    for v in 0..n {
        let (s, l) = (sigma.values()[v], lapse.values()[v]);
        let left = -0.5 * (-2.0 * u[v]).exp() * lp[v] / areas[v];
        let right = -k[v] - q / s + (2.0 * tau * tau + k[v] + 2.0) - 1.0 / l - grad[v] / (2.0 * l * l);
        if (left - right).abs() > discrepancy {
            discrepancy = (left - right).abs();
            vertex = v;
        }
        lhs.push(left);
        rhs.push(right);
    }
    Ok(CombinedResidual {
        lhs: ScalarField::new(mesh.id(), lhs),
        rhs: ScalarField::new(mesh.id(), rhs),
        discrepancy,
        vertex,
    })
}
