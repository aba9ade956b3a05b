use super::*;
use crate::mesh::build_genus_surface;

fn background(level: u32) -> Arc<Background> {
    Background::new(build_genus_surface(2, level).unwrap()).unwrap()
}

fn umbilic(bg: &Arc<Background>, tau: f64) -> SliceGeometry {
    generate_slice(bg, &DifferentialDensity::zero(bg.mesh()), tau, &SolverConfig::default()).unwrap()
}

#[test]
fn umbilic_slices_shift_by_log_q() {
    let bg = background(2);
    let u0 = umbilic(&bg, 0.0);
    let u1 = umbilic(&bg, 1.0);
    for (a, b) in u0.conformal().values().iter().zip(u1.conformal().values()) {
        assert!((b - (a - 0.5 * 2f64.ln())).abs() < 1e-9);
    }
    assert!(u1.curvature().values().iter().all(|k| (k + 2.0).abs() < 1e-9));
    assert!(u1.traceless().values().iter().all(|&w| w == 0.0));
    assert!(u1.is_umbilic());
}

#[test]
fn background_correction_shrinks_under_refinement() {
    // sup |u_0| is the gap between the mesh metric and curvature -1;
    // observed 0.040 at level 2 and 0.011 at level 3
    let s2 = umbilic(&background(2), 0.0).conformal().sup_norm();
    let s3 = umbilic(&background(3), 0.0).conformal().sup_norm();
    assert!(s2 < 0.1, "{s2}");
    assert!(s3 < s2, "{s3} vs {s2}");
}

/// Damped Picard iteration `(L + c A) u_{k+1} = A (c u_k + f(u_k))` for the
/// generating equation, independent of the Newton solver.
fn picard(bg: &Background, n: &[f64], tau: f64) -> Vec<f64> {
    let q = 1.0 + tau * tau;
    let a = bg.areas();
    let kh = bg.curvature().values();
    let nv = a.len();
    let mut u = vec![-0.5 * q.ln(); nv];
    let c = 20.0;
    let shift: Vec<f64> = a.iter().map(|x| c * x).collect();
    let m = bg.laplacian().matrix().with_diagonal_added(&shift);
    let chol = crate::elliptic::ProfileCholesky::factor(&m).unwrap();
    for _ in 0..2000 {
        let rhs: Vec<f64> = (0..nv)
            .map(|v| a[v] * (c * u[v] - kh[v] - q * (2.0 * u[v]).exp() + n[v] * (-2.0 * u[v]).exp()))
            .collect();
        let next = chol.solve(&rhs);
        let diff = next.iter().zip(&u).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
        u = next;
        if diff < 1e-14 {
            break;
        }
    }
    u
}

#[test]
fn bump_slice_matches_picard_oracle() {
    let bg = background(2);
    let tau = 0.5;
    let n = DensitySpec::bump(0, 0.2, BumpRadius::Length(1.0)).realize(bg.mesh()).unwrap();
    let slice = generate_slice(&bg, &n, tau, &SolverConfig::default()).unwrap();
    let oracle = picard(&bg, n.field().values(), tau);
    for (a, b) in slice.conformal().values().iter().zip(&oracle) {
        assert!((a - b).abs() < 1e-9, "{a} vs {b}");
    }
}

#[test]
fn generated_slices_satisfy_gauss_equation_and_gauss_bonnet() {
    let bg = background(2);
    for amp in [0.05, 0.2, 1.0] {
        let n = DensitySpec::bump(5, amp, BumpRadius::Length(1.0)).realize(bg.mesh()).unwrap();
        for tau in [-1.5, 0.0, 2.0] {
            let s = generate_slice(&bg, &n, tau, &SolverConfig::default()).unwrap();
            assert!(s.traceless().min() >= -1e-12);
            assert!(s.traceless().max() > 0.0);
            assert!(s.gauss_bonnet_defect() < 1e-8, "{:e}", s.gauss_bonnet_defect());
            assert!(s.gauss_equation_defect() < 1e-8, "{:e}", s.gauss_equation_defect());
            assert!(!s.is_umbilic());
            let t = s.transcript().unwrap();
            assert!(t.final_residual() <= 1e-10);
        }
    }
}

#[test]
fn newton_converges_quadratically() {
    let bg = background(3);
    let n = DensitySpec::bump(0, 0.5, BumpRadius::Length(1.0)).realize(bg.mesh()).unwrap();
    let s = generate_slice(&bg, &n, 1.0, &SolverConfig::default()).unwrap();
    let r = s.transcript().unwrap().residuals();
    // once in the asymptotic regime r_{k+1} <= C r_k^2
    let tail: Vec<_> = r.windows(2).filter(|w| w[0] < 1e-2 && w[1] > 1e-12).collect();
    assert!(!tail.is_empty(), "{r:?}");
    for w in tail {
        assert!(w[1] <= 10.0 * w[0] * w[0], "{r:?}");
    }
}

#[test]
fn shape_samples_match_gauss_equation() {
    let bg = background(1);
    let s = SliceGeometry::synthetic_constant(bg.clone(), 1.0, 0.25).unwrap();
    for b in shape_samples(&s).unwrap() {
        assert!((b.mean_curvature() - 1.0).abs() < 1e-15);
        assert!((b.gauss_curvature() - (-2.0 + 0.25)).abs() < 1e-14);
        assert!((b.umbilicity_defect() - 0.25).abs() < 1e-14);
    }
    let flat = SliceGeometry::synthetic_constant(bg, 0.0, 0.0).unwrap();
    let b = shape_samples(&flat).unwrap()[0];
    assert!(b.is_umbilic());
    assert_eq!(b.gauss_curvature(), -1.0);

    let general = ShapeOperatorSample { b11: 1.0, b12: 0.5, b22: -0.2 };
    let k = general.gauss_curvature();
    let h = general.mean_curvature();
    assert!((general.umbilicity_defect() - (k + 1.0 + h * h)).abs() < 1e-14);
}

#[test]
fn rejects_negative_traceless_and_foreign_density() {
    let bg = background(1);
    let nv = bg.mesh().vertex_count();
    let mut w = vec![0.0; nv];
    w[2] = -1e-6;
    let err = SliceGeometry::from_parts(bg.clone(), 0.0, vec![0.0; nv], vec![-1.0; nv], w, "test").unwrap_err();
    assert!(matches!(err, Error::Consistency(_)));

    let other = background(2);
    let n = DifferentialDensity::zero(other.mesh());
    assert!(generate_slice(&bg, &n, 0.0, &SolverConfig::default()).is_err());
    assert!(generate_slice(&bg, &DifferentialDensity::zero(bg.mesh()), f64::NAN, &SolverConfig::default()).is_err());
}

#[test]
fn slice_file_round_trip() {
    let bg = background(2);
    let n = DensitySpec::bump(0, 0.1, BumpRadius::Length(1.0)).realize(bg.mesh()).unwrap();
    let s = generate_slice(&bg, &n, 0.3, &SolverConfig::default()).unwrap();
    let file = SliceFile::from_slice(&s);
    let text = serde_json::to_string(&file).unwrap();
    assert!(text.contains("\"K\"") && text.contains("\"W\"") && text.contains("\"mesh_ref\""));
    let back: SliceFile = serde_json::from_str(&text).unwrap();
    let s2 = back.into_slice(bg.clone()).unwrap();
    assert_eq!(s2.conformal().values(), s.conformal().values());

    let mut wrong = SliceFile::from_slice(&s);
    wrong.mesh_ref = "0123456789abcdef".into();
    assert!(matches!(wrong.into_slice(bg), Err(Error::Domain(_))));
}
