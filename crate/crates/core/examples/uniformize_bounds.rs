//! Uniformize a slice and check `sigma >= 1` and `sigma l >= 1/(1+tau^2)`.

use adsvol::elliptic::SolverConfig;
use adsvol::lapse::solve_lapse;
use adsvol::mesh::build_genus_surface;
use adsvol::slicegen::{generate_slice, Background, BumpRadius, DensitySpec};
use adsvol::uniformize::{
    background_conformal, check_product_bound, check_sigma_bound, reference_area_defect, sigma_closed_form, solve_sigma,
};

fn main() -> adsvol::Result<()> {
    let bg = Background::new(build_genus_surface(2, 2)?)?;
    let cfg = SolverConfig::default();
    let u_bg = background_conformal(&bg, &cfg)?;
    let n = DensitySpec::bump(0, 0.2, BumpRadius::Length(1.0)).realize(bg.mesh())?;
    let tau = 0.7;
    let slice = generate_slice(&bg, &n, tau, &cfg)?;
    let sigma = solve_sigma(&slice, &cfg)?;
    let lapse = solve_lapse(&slice, &cfg)?;

    let s = check_sigma_bound(&sigma, 0.0);
    let p = check_product_bound(&sigma, &lapse, 0.0)?;
    println!("min sigma = {:.6} (margin {:.3e})", s.extreme, s.margin);
    println!("min sigma l (1+tau^2) = {:.6}", p.extreme * (1.0 + tau * tau));
    println!("h_tau area defect = {:.1e}", reference_area_defect(&slice, &sigma)?);

    let exact = sigma_closed_form(&slice, &u_bg)?;
    let err = sigma.field().zip_with(&exact, |a, b| (a - b).abs())?.max();
    println!("closed form error = {err:.1e}");
    Ok(())
}
