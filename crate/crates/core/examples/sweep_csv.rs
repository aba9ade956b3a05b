//! Tabulate slice densities against the Fuchsian ones as CSV on stdout.

use adsvol::elliptic::SolverConfig;
use adsvol::mesh::build_genus_surface;
use adsvol::slicegen::{Background, BumpRadius, DensitySpec};
use adsvol::volume::{sweep, VerifyOptions};

fn main() -> adsvol::Result<()> {
    let bg = Background::new(build_genus_surface(2, 2)?)?;
    let taus: Vec<f64> = (0..=12).map(|i| -3.0 + 0.5 * i as f64).collect();
    let spec = DensitySpec::bump(0, 0.2, BumpRadius::Length(1.0));
    let nodes = sweep(&bg, &spec, &taus, &SolverConfig::default(), &VerifyOptions::default())?;
    println!("tau,V,V_fuchsian,min_product_margin");
    for n in &nodes {
        println!("{},{:.10},{:.10},{:.4e}", n.tau, n.density, n.fuchsian_density, n.bounds.product.margin);
    }
    Ok(())
}
