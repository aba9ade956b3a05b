//! Slice volume densities and the integral over `tau`.
//!
//! The density of the slice at `tau` is `V(tau) = int l dA_g`. Since
//! `sigma l >= 1/(1 + tau^2)` and `int dA_g / sigma` is the area
//! `2 pi |chi| / (1 + tau^2)` of the uniformized metric,
//! `V(tau) >= 2 pi |chi| / (1 + tau^2)^2`, which is the Fuchsian density.
//! Its integral over the real line is `pi^2 |chi|`.
//!
//! The integral is evaluated with `tau = tan(theta)` and Gauss-Legendre
//! nodes in `theta`. Each node gets an independently generated slice, so
//! the total is a slice-wise check of the per-`tau` bound.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt::Write as _;
use std::num::NonZeroUsize;
use std::sync::Arc;

use gauss_quad::GaussLegendre;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::elliptic::SolverConfig;
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::fuchsian::{fuchsian_density, fuchsian_volume};
use crate::lapse::{check_lapse_bound, solve_lapse, LapseField};
use crate::report::{config_hash, SliceBounds};
use crate::slicegen::{generate_slice, Background, DensitySpec, DifferentialDensity, SliceGeometry};
use crate::uniformize::{
    background_conformal, check_product_bound, check_sigma_bound, combined_residual, reference_area_defect,
    sigma_closed_form, solve_sigma, solve_sigma_from,
};

/// Environment variable capping the worker threads of [`verify_theorem`].
pub const THREADS_ENV: &str = "ADSVOL_THREADS";

/// Scope statement embedded in every volume report.
pub const SCOPE: &str = "slice-wise verification of the per-tau bound";

/// `V(tau) = sum_v l_v A_v e^{2u_v}`.
pub fn slice_density(slice: &SliceGeometry, lapse: &LapseField) -> Result<f64> {
    slice.mesh().ensure_owns(lapse.field())?;
    Ok(slice.vertex_areas().iter().zip(lapse.values()).map(|(a, l)| a * l).sum())
}

/// Quadrature nodes on the real line with weights for `d tau`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TauGrid {
    pub taus: Vec<f64>,
    pub weights: Vec<f64>,
}

impl TauGrid {
    /// `n`-point Gauss-Legendre rule in `theta` on `(-pi/2, pi/2)` mapped
    /// by `tau = tan(theta)`, so `w_tau = w_theta sec^2(theta)`.
    pub fn gauss_legendre(n: usize) -> Result<Self> {
        let n = NonZeroUsize::new(n).ok_or_else(|| Error::Domain("quadrature needs at least one node".into()))?;
        let rule = GaussLegendre::new(n);
        let mut pairs: Vec<(f64, f64)> = rule
            .as_node_weight_pairs()
            .iter()
            .map(|&(x, w)| {
                let theta = FRAC_PI_2 * x;
                let c = theta.cos();
                (theta.tan(), FRAC_PI_2 * w / (c * c))
            })
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (taus, weights) = pairs.into_iter().unzip();
        Ok(Self { taus, weights })
    }

    pub fn len(&self) -> usize {
        self.taus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taus.is_empty()
    }
}

/// `int_R f(tau) d tau` on an `n`-point grid.
pub fn tau_quadrature(f: impl Fn(f64) -> f64, nodes: usize) -> Result<f64> {
    let grid = TauGrid::gauss_legendre(nodes)?;
    Ok(grid.taus.iter().zip(&grid.weights).map(|(&t, w)| w * f(t)).sum())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VerifyOptions {
    /// Quadrature nodes in `tau`.
    pub nodes: usize,
    /// Absolute tolerance of the pointwise bound checks.
    pub bound_tolerance: f64,
    /// Start the sigma solve from the umbilic closed form instead of `log sigma = 0`.
    pub sigma_oracle_guess: bool,
    /// Overrides the derived tolerance on the total.
    pub total_tolerance: Option<f64>,
    /// Worker threads; `None` reads `ADSVOL_THREADS`, 0 means all cores.
    pub threads: Option<usize>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { nodes: 64, bound_tolerance: 1e-9, sigma_oracle_guess: false, total_tolerance: None, threads: None }
    }
}

impl VerifyOptions {
    pub fn validate(&self) -> Result<()> {
        if self.nodes == 0 {
            return Err(Error::Domain("need at least one quadrature node".into()));
        }
        if !(self.bound_tolerance >= 0.0 && self.bound_tolerance.is_finite()) {
            return Err(Error::Domain(format!("bound tolerance must be >= 0, got {}", self.bound_tolerance)));
        }
        if let Some(t) = self.total_tolerance {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(Error::Domain(format!("total tolerance must be >= 0, got {t}")));
            }
        }
        Ok(())
    }

    pub fn thread_count(&self) -> Result<usize> {
        if let Some(n) = self.threads {
            return Ok(n);
        }
        match std::env::var(THREADS_ENV) {
            Ok(s) => s
                .trim()
                .parse()
                .map_err(|_| Error::Domain(format!("{THREADS_ENV} must be a thread count, got '{s}'"))),
            Err(_) => Ok(0),
        }
    }
}

/// Everything checked on one slice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeReport {
    pub tau: f64,
    /// Quadrature weight; zero for a slice checked on its own.
    pub weight: f64,
    pub density: f64,
    pub fuchsian_density: f64,
    pub bounds: SliceBounds,
    pub gauss_bonnet_defect: f64,
    pub reference_area_defect: f64,
    pub combined_residual: f64,
    /// `|sigma - sigma_closed_form|_inf / |sigma|_inf` for generated slices.
    pub sigma_oracle_error: Option<f64>,
    pub slice_iterations: usize,
    pub sigma_iterations: usize,
    pub pass: bool,
}

impl NodeReport {
    pub const CSV_HEADER: &'static str = "tau,weight,V,V_fuchsian,min_sigma,max_lapse,min_product,pass";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{:.15e},{:.15e},{:.15e},{:.15e},{:.15e},{:.15e},{}",
            self.tau,
            self.weight,
            self.density,
            self.fuchsian_density,
            self.bounds.sigma.extreme,
            self.bounds.lapse.extreme,
            self.bounds.product.extreme,
            self.pass
        )
    }

    /// Largest bound violation relative to the bound value.
    pub fn relative_violation(&self) -> f64 {
        let b = &self.bounds;
        (b.lapse.violation() / b.lapse.bound)
            .max(b.sigma.violation() / b.sigma.bound)
            .max(b.product.violation() / b.product.bound)
    }
}

/// Solves the lapse and sigma on `slice` and checks every bound.
///
/// `u_bg` enables the closed-form sigma comparison on generated slices and,
/// with `options.sigma_oracle_guess`, the closed-form initial guess.
pub fn analyze_slice(
    slice: &SliceGeometry,
    config: &SolverConfig,
    options: &VerifyOptions,
    u_bg: Option<&ScalarField>,
) -> Result<(NodeReport, LapseField, crate::uniformize::ConformalFactor)> {
    let tau = slice.tau();
    let tol = options.bound_tolerance;
    let lapse = solve_lapse(slice, config)?;
    let sigma = match (options.sigma_oracle_guess, u_bg) {
        (true, Some(bg)) => {
            let guess = sigma_closed_form(slice, bg)?.map(f64::ln).into_values();
            solve_sigma_from(slice, config, guess)?
        }
        _ => solve_sigma(slice, config)?,
    };
    let bounds = SliceBounds {
        lapse: check_lapse_bound(&lapse, tau, tol),
        sigma: check_sigma_bound(&sigma, tol),
        product: check_product_bound(&sigma, &lapse, tol)?,
    };
    let density = slice_density(slice, &lapse)?;
    let chi = slice.background().euler_characteristic();
    let fuchsian = fuchsian_density(tau, chi)?;
    let sigma_oracle_error = match u_bg {
        Some(bg) if slice.transcript().is_some() => {
            let exact = sigma_closed_form(slice, bg)?;
            Some(sigma.field().zip_with(&exact, |a, b| (a - b).abs())?.max() / sigma.field().sup_norm())
        }
        _ => None,
    };
    let report = NodeReport {
        tau,
        weight: 0.0,
        density,
        fuchsian_density: fuchsian,
        bounds,
        gauss_bonnet_defect: slice.gauss_bonnet_defect(),
        reference_area_defect: reference_area_defect(slice, &sigma)?,
        combined_residual: combined_residual(slice, &sigma, &lapse)?.discrepancy,
        sigma_oracle_error,
        slice_iterations: slice.transcript().map_or(0, |t| t.iterations()),
        sigma_iterations: sigma.transcript().iterations(),
        pass: bounds.pass() && density >= fuchsian * (1.0 - tol) - tol,
    };
    Ok((report, lapse, sigma))
}

/// Where the run stopped when a slice failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Abort {
    pub tau: f64,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolumeReport {
    pub scope: String,
    pub genus: u32,
    pub euler_characteristic: i64,
    pub mesh_id: String,
    pub vertex_count: usize,
    pub density_spec: String,
    pub config_hash: String,
    pub nodes: Vec<NodeReport>,
    /// `sum_i w_i V(tau_i)`
    pub total: f64,
    /// `pi^2 |chi|`
    pub bound: f64,
    /// `total - bound`
    pub margin: f64,
    /// The Fuchsian density integrated on the same grid; its distance from
    /// `bound` is the quadrature error.
    pub fuchsian_on_grid: f64,
    pub tolerance: f64,
    /// Largest relative pointwise bound violation over all nodes.
    pub epsilon_h: f64,
    /// The density is zero, so the total should equal the bound.
    pub umbilic: bool,
    pub worst_newton_iterations: usize,
    pub pass: bool,
    pub aborted: Option<Abort>,
}

impl VolumeReport {
    pub fn nodes_csv(&self) -> String {
        let mut out = String::from(NodeReport::CSV_HEADER);
        out.push('\n');
        for n in &self.nodes {
            writeln!(out, "{}", n.csv_row()).unwrap();
        }
        out
    }

    pub fn bounds_csv(&self) -> String {
        crate::report::bounds_csv(self.nodes.iter().map(|n| &n.bounds))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Writes `report.json`, `nodes.csv` and `bounds.csv` into `dir`.
    pub fn save(&self, dir: impl AsRef<std::path::Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("report.json"), self.to_json()?)?;
        std::fs::write(dir.join("nodes.csv"), self.nodes_csv())?;
        std::fs::write(dir.join("bounds.csv"), self.bounds_csv())?;
        Ok(())
    }
}

/// A slice failed; `partial` holds every node that did complete.
#[derive(Debug)]
pub struct VerifyError {
    pub partial: Box<VolumeReport>,
    pub error: Error,
}

impl std::fmt::Display for VerifyError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} ({} of the nodes completed)", self.error, self.partial.nodes.len())
    }
}

impl std::error::Error for VerifyError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.error)
    }
}

impl From<Error> for VerifyError {
    fn from(error: Error) -> Self {
        let partial = VolumeReport {
            scope: SCOPE.into(),
            genus: 0,
            euler_characteristic: 0,
            mesh_id: String::new(),
            vertex_count: 0,
            density_spec: String::new(),
            config_hash: String::new(),
            nodes: Vec::new(),
            total: f64::NAN,
            bound: f64::NAN,
            margin: f64::NAN,
            fuchsian_on_grid: f64::NAN,
            tolerance: f64::NAN,
            epsilon_h: f64::NAN,
            umbilic: false,
            worst_newton_iterations: 0,
            pass: false,
            aborted: None,
        };
        Self { partial: Box::new(partial), error }
    }
}

#[derive(Serialize)]
struct HashedConfig<'a> {
    mesh_id: String,
    density: String,
    solver: &'a SolverConfig,
    options: &'a VerifyOptions,
}

/// Generates a slice at each quadrature node, checks the pointwise bounds
/// and compares the integrated density against `pi^2 |chi|`.
///
/// The total passes when `total >= pi^2 |chi| - tol` with
/// `tol = max(1e-8, 5 eps_h pi^2 |chi|)`, and for a zero density also
/// `|total - pi^2 |chi|| <= tol`.
pub fn verify_theorem(
    background: &Arc<Background>,
    density: &DensitySpec,
    config: &SolverConfig,
    options: &VerifyOptions,
) -> std::result::Result<VolumeReport, VerifyError> {
    config.validate()?;
    options.validate()?;
    let mesh = background.mesh();
    let chi = background.euler_characteristic();
    let bound = fuchsian_volume(chi)?;
    let n = density.realize(mesh)?;
    let grid = TauGrid::gauss_legendre(options.nodes)?;
    let u_bg = background_conformal(background, config)?;
    let hash = config_hash(&HashedConfig {
        mesh_id: mesh.id().to_string(),
        density: density.to_string(),
        solver: config,
        options,
    });

    let results: Vec<Result<NodeReport>> = with_pool(options, || {
        (0..grid.len())
            .into_par_iter()
            .map(|i| node(background, &n, grid.taus[i], grid.weights[i], config, options, &u_bg))
            .collect()
    })?;

    let mut nodes = Vec::with_capacity(results.len());
    let mut failure = None;
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(report) => nodes.push(report),
            Err(e) if failure.is_none() => failure = Some(Error::AtNode { tau: grid.taus[i], source: Box::new(e) }),
            Err(_) => {}
        }
    }

    let total: f64 = nodes.iter().map(|r| r.weight * r.density).sum();
    let epsilon_h = nodes.iter().map(NodeReport::relative_violation).fold(0.0, f64::max);
    let tolerance = options.total_tolerance.unwrap_or_else(|| (5.0 * epsilon_h * bound).max(1e-8));
    let umbilic = n.is_zero();
    let margin = total - bound;
    let total_ok = margin >= -tolerance && (!umbilic || margin.abs() <= tolerance);
    let mut report = VolumeReport {
        scope: SCOPE.into(),
        genus: mesh.genus(),
        euler_characteristic: chi,
        mesh_id: mesh.id().to_string(),
        vertex_count: mesh.vertex_count(),
        density_spec: density.to_string(),
        config_hash: hash,
        worst_newton_iterations: nodes
            .iter()
            .map(|r| r.slice_iterations.max(r.sigma_iterations))
            .max()
            .unwrap_or(0),
        pass: failure.is_none() && total_ok && nodes.iter().all(|r| r.pass),
        nodes,
        total,
        bound,
        margin,
        fuchsian_on_grid: grid.weights.iter().zip(&grid.taus).map(|(w, &t)| w * fuchsian_density(t, chi).unwrap_or(f64::NAN)).sum(),
        tolerance,
        epsilon_h,
        umbilic,
        aborted: None,
    };
    match failure {
        None => Ok(report),
        Some(error) => {
            if let Error::AtNode { tau, source } = &error {
                report.aborted = Some(Abort { tau: *tau, message: source.to_string() });
            }
            report.total = f64::NAN;
            report.margin = f64::NAN;
            Err(VerifyError { partial: Box::new(report), error })
        }
    }
}

fn node(
    background: &Arc<Background>,
    density: &DifferentialDensity,
    tau: f64,
    weight: f64,
    config: &SolverConfig,
    options: &VerifyOptions,
    u_bg: &ScalarField,
) -> Result<NodeReport> {
    let slice = generate_slice(background, density, tau, config)?;
    let (mut report, _, _) = analyze_slice(&slice, config, options, Some(u_bg))?;
    report.weight = weight;
    Ok(report)
}

/// Runs `f` on a pool of `options.thread_count()` workers.
pub fn with_pool<T: Send>(options: &VerifyOptions, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.thread_count()?)
        .build()
        .map_err(|e| Error::Resource(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// Checks independent slices at the given `tau` values (no quadrature).
/// Stops at the first failing slice in `taus` order.
pub fn sweep(
    background: &Arc<Background>,
    density: &DensitySpec,
    taus: &[f64],
    config: &SolverConfig,
    options: &VerifyOptions,
) -> Result<Vec<NodeReport>> {
    config.validate()?;
    options.validate()?;
    let n = density.realize(background.mesh())?;
    let u_bg = background_conformal(background, config)?;
    let results: Vec<Result<NodeReport>> = with_pool(options, || {
        taus.par_iter()
            .map(|&tau| node(background, &n, tau, 0.0, config, options, &u_bg))
            .collect()
    })?;
    results
        .into_iter()
        .zip(taus)
        .map(|(r, &tau)| r.map_err(|e| Error::AtNode { tau, source: Box::new(e) }))
        .collect()
}

/// `2 pi |chi| / (1 + tau^2)^2` integrated on the grid, for comparison
/// with the exact `pi^2 |chi|`.
pub fn fuchsian_quadrature(chi: i64, nodes: usize) -> Result<f64> {
    crate::fuchsian::check_euler_characteristic(chi)?;
    let c = 2.0 * PI * chi.unsigned_abs() as f64;
    tau_quadrature(|t| c / (1.0 + t * t).powi(2), nodes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_genus_surface;
    use crate::slicegen::BumpRadius;

    #[test]
    fn grid_is_sorted_with_positive_weights() {
        let g = TauGrid::gauss_legendre(9).unwrap();
        assert!(g.taus.windows(2).all(|w| w[0] < w[1]));
        assert!(g.weights.iter().all(|&w| w > 0.0));
        assert!(g.taus[4].abs() < 1e-15);
        assert!(TauGrid::gauss_legendre(0).is_err());
    }

    #[test]
    fn quadrature_of_rational_integrands() {
        let one = tau_quadrature(|t| 1.0 / (1.0 + t * t), 8).unwrap();
        assert!((one - PI).abs() < 1e-13);
        let two = tau_quadrature(|t| 1.0 / (1.0 + t * t).powi(2), 16).unwrap();
        assert!((two - FRAC_PI_2).abs() < 1e-13);
        for chi in [-2, -4, -10] {
            let v = fuchsian_quadrature(chi, 16).unwrap();
            assert!((v - PI * PI * chi.unsigned_abs() as f64).abs() < 1e-11);
        }
    }

    #[test]
    fn umbilic_volume_equals_bound() {
        let bg = Background::new(build_genus_surface(2, 1).unwrap()).unwrap();
        let options = VerifyOptions { nodes: 12, threads: Some(2), ..Default::default() };
        let r = verify_theorem(&bg, &DensitySpec::Zero, &SolverConfig::default(), &options).unwrap();
        assert!(r.pass, "{r:?}");
        assert!(r.margin.abs() < 1e-8, "{:e}", r.margin);
        assert_eq!(r.nodes.len(), 12);
        assert!(r.nodes.iter().all(|n| n.sigma_oracle_error.unwrap() < 1e-8));
        assert_eq!(r.scope, SCOPE);
    }

    #[test]
    fn bump_volume_exceeds_bound() {
        let bg = Background::new(build_genus_surface(2, 1).unwrap()).unwrap();
        let options = VerifyOptions { nodes: 8, threads: Some(1), ..Default::default() };
        let spec = DensitySpec::bump(0, 0.3, BumpRadius::Length(1.0));
        let r = verify_theorem(&bg, &spec, &SolverConfig::default(), &options).unwrap();
        assert!(r.pass);
        assert!(r.margin > 0.0);
        assert!(r.nodes.iter().all(|n| n.density >= n.fuchsian_density));
        assert!(r.nodes_csv().lines().count() == 9);
    }

    #[test]
    fn sweep_is_even_in_tau_for_a_fixed_bump() {
        let bg = Background::new(build_genus_surface(2, 2).unwrap()).unwrap();
        let options = VerifyOptions { threads: Some(2), ..Default::default() };
        let spec = DensitySpec::bump(0, 0.1, BumpRadius::Length(1.0));
        let r = sweep(&bg, &spec, &[-1.5, 1.5, 0.0], &SolverConfig::default(), &options).unwrap();
        assert!((r[0].density - r[1].density).abs() < 1e-10);
        assert!(r.iter().all(|n| n.pass && n.density > n.fuchsian_density));
    }

    #[test]
    fn failing_node_keeps_partial_results() {
        let bg = Background::new(build_genus_surface(2, 1).unwrap()).unwrap();
        // enough iterations for the umbilic background solve, too few for a large bump
        let config = SolverConfig { max_iterations: 5, ..Default::default() };
        let options = VerifyOptions { nodes: 4, threads: Some(1), ..Default::default() };
        let spec = DensitySpec::bump(0, 500.0, BumpRadius::Length(1.0));
        let err = verify_theorem(&bg, &spec, &config, &options).unwrap_err();
        assert!(err.partial.aborted.is_some());
        assert!(!err.partial.pass);
        assert!(matches!(err.error, Error::AtNode { .. }));
    }
}
