//! Closed-form umbilic foliation: densities, shape operators and the total volume.

use adsvol::fuchsian::{fuchsian_density, fuchsian_slice, fuchsian_volume};
use adsvol::volume::tau_quadrature;

fn main() -> adsvol::Result<()> {
    let chi = -2;
    for tau in [-2.0, -0.5, 0.0, 0.5, 2.0] {
        let s = fuchsian_slice(tau, chi)?;
        let a = s.shape_operator();
        println!("tau {tau:5.2}: V = {:.6}  H = {:.3}  K = {:.3}", s.density(), a.mean_curvature(), a.gauss_curvature());
    }
    let exact = fuchsian_volume(chi)?;
    for nodes in [8, 16, 32, 64] {
        let v = tau_quadrature(|t| fuchsian_density(t, chi).unwrap(), nodes)?;
        println!("{nodes:2} nodes: {v:.12}  error {:.2e}", (v - exact).abs());
    }
    Ok(())
}
