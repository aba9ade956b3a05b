//! The full check: integrate slice densities over tau and compare with pi^2 |chi|.

use adsvol::elliptic::SolverConfig;
use adsvol::mesh::build_genus_surface;
use adsvol::slicegen::{Background, BumpRadius, DensitySpec};
use adsvol::volume::{verify_theorem, VerifyOptions};

fn main() {
    let bg = Background::new(build_genus_surface(2, 2).unwrap()).unwrap();
    let cfg = SolverConfig::default();
    let options = VerifyOptions { nodes: 32, ..Default::default() };
    for spec in [DensitySpec::Zero, DensitySpec::bump(0, 0.1, BumpRadius::Length(1.0))] {
        match verify_theorem(&bg, &spec, &cfg, &options) {
            Ok(r) => println!(
                "{:?}: total {:.8}  bound {:.8}  margin {:.3e}  {}",
                spec,
                r.total,
                r.bound,
                r.margin,
                if r.pass { "PASS" } else { "FAIL" }
            ),
            Err(e) => println!("{spec:?}: aborted: {}", e.error),
        }
    }
}
