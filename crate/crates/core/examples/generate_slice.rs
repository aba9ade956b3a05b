//! Generate a CMC slice from a bump density and inspect its geometry.

use adsvol::elliptic::SolverConfig;
use adsvol::mesh::build_genus_surface;
use adsvol::slicegen::{generate_slice, shape_samples, Background, BumpRadius, DensitySpec};

fn main() -> adsvol::Result<()> {
    let bg = Background::new(build_genus_surface(2, 2)?)?;
    let cfg = SolverConfig::default();
    let n = DensitySpec::bump(0, 0.2, BumpRadius::Length(1.0)).realize(bg.mesh())?;
    for tau in [0.0, 0.5, 3.0] {
        let slice = generate_slice(&bg, &n, tau, &cfg)?;
        let q = 1.0 + tau * tau;
        let k = slice.curvature();
        println!(
            "tau {tau}: area {:.4}  K in [{:.4}, {:.4}] (floor {:.4})  Gauss-Bonnet {:.1e}  Gauss eq {:.1e}  newton {}",
            slice.area(),
            k.min(),
            k.max(),
            -q,
            slice.gauss_bonnet_defect(),
            slice.gauss_equation_defect(),
            slice.transcript().map_or(0, |t| t.iterations())
        );
    }
    let slice = generate_slice(&bg, &n, 0.5, &cfg)?;
    let a = &shape_samples(&slice)?[0];
    println!("at the bump centre: H = {:.6}, umbilic: {}", a.mean_curvature(), a.is_umbilic());
    Ok(())
}
