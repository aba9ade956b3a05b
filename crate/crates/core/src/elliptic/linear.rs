use super::{sup_norm, LinearSolver, ProfileCholesky, SolverConfig};
use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

/// Iterative refinement steps allowed after a direct solve misses the tolerance.
const MAX_REFINEMENTS: usize = 3;

fn residual(a: &CsrMatrix, x: &[f64], rhs: &[f64]) -> Vec<f64> {
    a.mul_vec(x).iter().zip(rhs).map(|(ax, b)| b - ax).collect()
}

fn target(rhs: &[f64], tol: f64) -> f64 {
    let scale = sup_norm(rhs);
    if scale > 0.0 {
        tol * scale
    } else {
        tol
    }
}

/// Solves `a x = rhs` for symmetric positive definite `a`.
///
/// The result satisfies `|a x - rhs|_inf <= linear_tolerance * |rhs|_inf`
/// (absolute when `rhs = 0`).
pub fn solve_linear_spd(a: &CsrMatrix, rhs: &[f64], config: &SolverConfig) -> Result<Vec<f64>> {
    if rhs.len() != a.dim() {
        return Err(Error::Domain(format!("rhs has length {}, matrix is {}x{}", rhs.len(), a.dim(), a.dim())));
    }
    match config.linear_solver {
        LinearSolver::Direct => solve_direct(a, rhs, config.linear_tolerance),
        LinearSolver::ConjugateGradient => solve_with_cg(a, rhs, config.linear_tolerance, config.cg_max_iterations),
    }
}

fn solve_direct(a: &CsrMatrix, rhs: &[f64], tol: f64) -> Result<Vec<f64>> {
    let factor = ProfileCholesky::factor(a)?;
    let goal = target(rhs, tol);
    let mut x = factor.solve(rhs);
    let mut r = residual(a, &x, rhs);
    for _ in 0..MAX_REFINEMENTS {
        if sup_norm(&r) <= goal {
            return Ok(x);
        }
        let dx = factor.solve(&r);
        x.iter_mut().zip(&dx).for_each(|(xi, d)| *xi += d);
        r = residual(a, &x, rhs);
    }
    if sup_norm(&r) <= goal {
        Ok(x)
    } else {
        Err(Error::LinearNonConvergence {
            iterations: MAX_REFINEMENTS,
            residual: sup_norm(&r) / sup_norm(rhs).max(f64::MIN_POSITIVE),
        })
    }
}

/// Jacobi-preconditioned conjugate gradients from a zero start.
pub fn solve_with_cg(a: &CsrMatrix, rhs: &[f64], tol: f64, max_iterations: usize) -> Result<Vec<f64>> {
    let n = a.dim();
    let diag = a.diagonal();
    if let Some(i) = diag.iter().position(|&d| !(d > 0.0)) {
        return Err(Error::Numeric(format!("non-positive diagonal {:e} at row {i}", diag[i])));
    }
    let goal = target(rhs, tol);
    let mut x = vec![0.0; n];
    let mut r = rhs.to_vec();
    if sup_norm(&r) <= goal {
        return Ok(x);
    }
    let mut z: Vec<f64> = r.iter().zip(&diag).map(|(ri, d)| ri / d).collect();
    let mut p = z.clone();
    let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
    for _ in 0..max_iterations {
        let ap = a.mul_vec(&p);
        let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
        if !(pap > 0.0) {
            return Err(Error::Numeric(format!("conjugate gradient breakdown (p^T A p = {pap:e})")));
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        if sup_norm(&r) <= goal {
            // recompute to guard against drift in the recursive residual
            let true_r = residual(a, &x, rhs);
            if sup_norm(&true_r) <= goal {
                return Ok(x);
            }
            r = true_r;
        }
        for i in 0..n {
            z[i] = r[i] / diag[i];
        }
        let rz_next: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let beta = rz_next / rz;
        rz = rz_next;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    let res = sup_norm(&residual(a, &x, rhs));
    Err(Error::LinearNonConvergence {
        iterations: max_iterations,
        residual: res / sup_norm(rhs).max(f64::MIN_POSITIVE),
    })
}

#[cfg(test)]
mod tests {
    use nalgebra::DMatrix;

    use super::*;

    #[test]
    fn identity_returns_rhs() {
        let a = CsrMatrix::identity(4);
        let r = vec![1.0, -2.0, 3.5, 0.0];
        let x = solve_linear_spd(&a, &r, &SolverConfig::default()).unwrap();
        assert_eq!(x, r);
    }

    #[test]
    fn diagonal_system() {
        let a = CsrMatrix::from_diagonal(&[2.0, 4.0]);
        for solver in [LinearSolver::Direct, LinearSolver::ConjugateGradient] {
            let cfg = SolverConfig { linear_solver: solver, ..Default::default() };
            let x = solve_linear_spd(&a, &[2.0, 8.0], &cfg).unwrap();
            assert!((x[0] - 1.0).abs() < 1e-14 && (x[1] - 2.0).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_rhs_gives_zero() {
        let a = CsrMatrix::from_diagonal(&[3.0, 1.0, 2.0]);
        let x = solve_linear_spd(&a, &[0.0; 3], &SolverConfig::default()).unwrap();
        assert_eq!(x, vec![0.0; 3]);
    }

    #[test]
    fn indefinite_matrix_is_a_numeric_error() {
        let a = CsrMatrix::from_dense(&DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]));
        for solver in [LinearSolver::Direct, LinearSolver::ConjugateGradient] {
            let cfg = SolverConfig { linear_solver: solver, ..Default::default() };
            let err = solve_linear_spd(&a, &[1.0, -1.0], &cfg).unwrap_err();
            assert!(matches!(err, Error::Numeric(_)), "{err}");
        }
    }

    #[test]
    fn cg_iteration_cap_reports_residual() {
        let n = 30;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0 + i as f64));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        let a = CsrMatrix::from_triplets(n, &t);
        let err = solve_with_cg(&a, &vec![1.0; n], 1e-14, 2).unwrap_err();
        assert!(matches!(err, Error::LinearNonConvergence { iterations: 2, .. }));
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(8))]

        #[test]
        fn random_spd_matches_dense_cholesky(
            b in proptest::collection::vec(-1.0f64..1.0, 50 * 50),
            rhs in proptest::collection::vec(-1.0f64..1.0, 50),
        ) {
            let b = DMatrix::from_row_slice(50, 50, &b);
            let dense = b.transpose() * &b + DMatrix::identity(50, 50);
            let a = CsrMatrix::from_dense(&dense);
            let oracle = dense.clone().cholesky().unwrap().solve(&nalgebra::DVector::from_column_slice(&rhs));
            for solver in [LinearSolver::Direct, LinearSolver::ConjugateGradient] {
                let cfg = SolverConfig { linear_solver: solver, ..Default::default() };
                let x = solve_linear_spd(&a, &rhs, &cfg).unwrap();
                let err = x.iter().zip(oracle.iter()).fold(0.0f64, |m, (p, q)| m.max((p - q).abs()));
                proptest::prop_assert!(err < 1e-9, "{:?}: {}", solver, err);
            }
        }
    }
}
