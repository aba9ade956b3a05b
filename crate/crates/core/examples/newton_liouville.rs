//! Damped Newton on the Liouville equation `-1/2 L u / A - K_h - e^{2u} = 0`
//! for the uniformizing factor of a mesh, with the iteration transcript.

use adsvol::elliptic::{newton_solve, SemilinearProblem, SolverConfig};
use adsvol::mesh::build_genus_surface;
use adsvol::slicegen::Background;

fn main() -> adsvol::Result<()> {
    let bg = Background::new(build_genus_surface(2, 3)?)?;
    let k = bg.curvature().values();
    let n = bg.mesh().vertex_count();
    let nonlinearity = |v: usize, u: f64| {
        let e = (2.0 * u).exp();
        (-k[v] - e, -2.0 * e)
    };
    let problem = SemilinearProblem::new(bg.laplacian().matrix(), bg.areas(), vec![0.5; n], nonlinearity, vec![0.0; n])?;
    let solved = newton_solve(&problem, &SolverConfig::default())?;
    print!("{}", solved.transcript.to_csv());
    let u = &solved.solution;
    let sup = u.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    println!("sup |u| = {sup:.4e}");
    Ok(())
}
