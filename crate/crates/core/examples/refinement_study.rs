//! Bound violations and the combined residual under mesh refinement.

use adsvol::elliptic::SolverConfig;
use adsvol::lapse::solve_lapse;
use adsvol::mesh::build_genus_surface;
use adsvol::slicegen::{generate_slice, Background, BumpRadius, DensitySpec};
use adsvol::uniformize::{combined_residual, solve_sigma};
use adsvol::volume::{sweep, VerifyOptions};

fn main() -> adsvol::Result<()> {
    let cfg = SolverConfig::default();
    let taus: Vec<f64> = (0..9).map(|i| -2.0 + 0.5 * i as f64).collect();
    let spec = DensitySpec::bump(0, 0.1, BumpRadius::Length(1.0));
    for level in 1..=3 {
        let bg = Background::new(build_genus_surface(2, level)?)?;
        let options = VerifyOptions { bound_tolerance: 0.0, ..Default::default() };
        let nodes = sweep(&bg, &spec, &taus, &cfg, &options)?;
        let worst = nodes.iter().map(|n| n.relative_violation()).fold(0.0, f64::max);
        let margin = nodes.iter().map(|n| n.bounds.product.margin).fold(f64::INFINITY, f64::min);

        let n = spec.realize(bg.mesh())?;
        let slice = generate_slice(&bg, &n, 0.5, &cfg)?;
        let r = combined_residual(&slice, &solve_sigma(&slice, &cfg)?, &solve_lapse(&slice, &cfg)?)?;
        println!(
            "level {level}: V={:4}  worst violation {:.1e}  product margin {:.3e}  combined residual {:.3e}",
            bg.mesh().vertex_count(),
            worst,
            margin,
            r.discrepancy
        );
    }
    Ok(())
}
