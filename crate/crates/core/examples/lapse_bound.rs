//! Solve the lapse equation and check `l <= 1/(1+tau^2)`.

use adsvol::elliptic::SolverConfig;
use adsvol::lapse::{check_lapse_bound, solve_lapse};
use adsvol::mesh::build_genus_surface;
use adsvol::slicegen::{generate_slice, Background, BumpRadius, DensitySpec};

fn main() -> adsvol::Result<()> {
    let bg = Background::new(build_genus_surface(2, 2)?)?;
    let cfg = SolverConfig::default();
    let n = DensitySpec::bump(0, 0.3, BumpRadius::Length(1.0)).realize(bg.mesh())?;
    for tau in [-1.0, 0.0, 1.0, 4.0] {
        let slice = generate_slice(&bg, &n, tau, &cfg)?;
        let lapse = solve_lapse(&slice, &cfg)?;
        let r = check_lapse_bound(&lapse, tau, 1e-9);
        println!(
            "tau {tau:4}: max l (1+tau^2) = {:.8} at vertex {}  {}",
            r.extreme * (1.0 + tau * tau),
            r.vertex,
            if r.pass { "ok" } else { "VIOLATED" }
        );
    }
    Ok(())
}
