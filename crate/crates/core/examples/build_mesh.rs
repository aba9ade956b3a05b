//! Build genus-2 meshes at several refinement levels and print their invariants.

use std::f64::consts::PI;

use adsvol::mesh::{build_genus_surface, cotan_laplacian};

fn main() -> adsvol::Result<()> {
    for level in 0..=3 {
        let mesh = build_genus_surface(2, level)?;
        let defects: f64 = mesh.angle_defects().iter().sum();
        let chi = mesh.euler_characteristic();
        let lap = cotan_laplacian(&mesh)?;
        println!(
            "level {level}: V={} F={} chi={chi} area={:.4} |sum delta - 2 pi chi|={:.1e} kernel defect={:.1e} id={}",
            mesh.vertex_count(),
            mesh.face_count(),
            mesh.total_area(),
            (defects - 2.0 * PI * chi as f64).abs(),
            lap.kernel_defect(),
            mesh.id()
        );
    }
    Ok(())
}
