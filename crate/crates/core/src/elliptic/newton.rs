use nalgebra::{DMatrix, DVector};

use super::{solve_linear_spd, sup_norm, SolverConfig, Transcript};
use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

/// Above this size a Jacobian that is not positive definite is an error
/// instead of falling back to a dense LU solve.
const DENSE_FALLBACK_MAX: usize = 4000;

/// Pointwise nonlinearity: value `f(v, x)` and derivative `df/dx`.
pub trait Pointwise {
    fn eval(&self, vertex: usize, x: f64) -> (f64, f64);
}

impl<F> Pointwise for F
where
    F: Fn(usize, f64) -> (f64, f64),
{
    fn eval(&self, vertex: usize, x: f64) -> (f64, f64) {
        self(vertex, x)
    }
}

/// `R_v(x) = -(d_v / A_v) (L x)_v + f(v, x_v) = 0`
pub struct SemilinearProblem<'a, F> {
    laplacian: &'a CsrMatrix,
    areas: &'a [f64],
    diffusion: Vec<f64>,
    nonlinearity: F,
    initial: Vec<f64>,
    blow_up_limit: Option<f64>,
    residual_scale: f64,
}

impl<'a, F: Pointwise> SemilinearProblem<'a, F> {
    pub fn new(
        laplacian: &'a CsrMatrix,
        areas: &'a [f64],
        diffusion: Vec<f64>,
        nonlinearity: F,
        initial: Vec<f64>,
    ) -> Result<Self> {
        let n = laplacian.dim();
        if areas.len() != n || diffusion.len() != n || initial.len() != n {
            return Err(Error::Domain(format!(
                "problem size mismatch: matrix {n}, areas {}, diffusion {}, initial {}",
                areas.len(),
                diffusion.len(),
                initial.len()
            )));
        }
        if let Some(v) = diffusion.iter().position(|&d| !(d > 0.0 && d.is_finite())) {
            return Err(Error::Domain(format!("diffusion coefficient {} at vertex {v} is not positive", diffusion[v])));
        }
        if let Some(v) = areas.iter().position(|&a| !(a > 0.0 && a.is_finite())) {
            return Err(Error::Domain(format!("vertex area {} at vertex {v} is not positive", areas[v])));
        }
        Ok(Self { laplacian, areas, diffusion, nonlinearity, initial, blow_up_limit: None, residual_scale: 1.0 })
    }

    /// Abort with [`Error::BlowUp`] once any iterate exceeds `limit` in magnitude.
    pub fn with_blow_up_limit(mut self, limit: f64) -> Self {
        self.blow_up_limit = Some(limit);
        self
    }

    /// Typical size of the terms in the residual. Newton stops at
    /// `|R|_inf <= tolerance * scale`, so large coefficients do not push
    /// the target below rounding.
    pub fn with_residual_scale(mut self, scale: f64) -> Self {
        self.residual_scale = scale.max(1.0);
        self
    }

    pub fn dim(&self) -> usize {
        self.areas.len()
    }

    pub fn residual(&self, x: &[f64]) -> Vec<f64> {
        let lx = self.laplacian.mul_vec(x);
        (0..self.dim())
            .map(|v| -(self.diffusion[v] / self.areas[v]) * lx[v] + self.nonlinearity.eval(v, x[v]).0)
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct NewtonSolution {
    pub solution: Vec<f64>,
    pub transcript: Transcript,
}

/// Damped Newton with backtracking on `|R|_inf`.
///
/// Each step solves the symmetrized Jacobian system
/// `(L + diag(-A f' / d)) dx = (A / d) R`, which is SPD whenever `f' <= 0`
/// with some strict inequality. Otherwise a dense LU solve is used for
/// small problems.
pub fn newton_solve<F: Pointwise>(problem: &SemilinearProblem<'_, F>, config: &SolverConfig) -> Result<NewtonSolution> {
    config.validate()?;
    let n = problem.dim();
    let mut x = problem.initial.clone();
    let mut r = problem.residual(&x);
    let mut norm = sup_norm(&r);
    let target = config.tolerance * problem.residual_scale;
    let mut transcript = Transcript::default();
    transcript.push(0, norm, 0.0);
    if !norm.is_finite() {
        return Err(Error::Numeric("residual of the initial guess is not finite".into()));
    }

    for iteration in 1..=config.max_iterations {
        if norm <= target {
            return Ok(NewtonSolution { solution: x, transcript });
        }
        let mut shift = Vec::with_capacity(n);
        let mut rhs = Vec::with_capacity(n);
        for v in 0..n {
            let scale = problem.areas[v] / problem.diffusion[v];
            let (_, df) = problem.nonlinearity.eval(v, x[v]);
            shift.push(-scale * df);
            rhs.push(scale * r[v]);
        }
        let jacobian = problem.laplacian.with_diagonal_added(&shift);
        let step = if shift.iter().all(|&s| s >= 0.0) && shift.iter().any(|&s| s > 0.0) {
            solve_linear_spd(&jacobian, &rhs, config)?
        } else {
            solve_dense(&jacobian, &rhs)?
        };

        let mut alpha = 1.0;
        let mut backtracks = 0;
        loop {
            let trial: Vec<f64> = x.iter().zip(&step).map(|(xi, s)| xi + alpha * s).collect();
            let trial_r = problem.residual(&trial);
            let trial_norm = sup_norm(&trial_r);
            if trial_norm.is_finite() && trial_norm < norm {
                x = trial;
                r = trial_r;
                norm = trial_norm;
                break;
            }
            backtracks += 1;
            if backtracks > config.max_backtracks {
                return Err(Error::Stagnation { transcript });
            }
            alpha *= config.backtrack_factor;
        }
        transcript.push(iteration, norm, alpha);

        if let Some(limit) = problem.blow_up_limit {
            if x.iter().any(|v| !(v.abs() <= limit)) {
                return Err(Error::BlowUp { limit, transcript });
            }
        }
    }
    if norm <= target {
        Ok(NewtonSolution { solution: x, transcript })
    } else {
        Err(Error::NonConvergence { transcript })
    }
}

fn solve_dense(a: &CsrMatrix, rhs: &[f64]) -> Result<Vec<f64>> {
    if a.dim() > DENSE_FALLBACK_MAX {
        return Err(Error::Numeric(format!(
            "Jacobian is not positive definite and too large ({}) for the dense fallback",
            a.dim()
        )));
    }
    let lu = DMatrix::from(a.to_dense()).lu();
    lu.solve(&DVector::from_column_slice(rhs))
        .map(|x| x.as_slice().to_vec())
        .ok_or_else(|| Error::Numeric("Jacobian is singular".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_cubic_root() {
        // f(x) = -x^3 - x + 2 has its only real root at 1
        let l = CsrMatrix::from_diagonal(&[0.0]);
        let areas = [1.0];
        let p = SemilinearProblem::new(&l, &areas, vec![1.0], |_: usize, x: f64| (-x * x * x - x + 2.0, -3.0 * x * x - 1.0), vec![0.0])
            .unwrap();
        let sol = newton_solve(&p, &SolverConfig::default()).unwrap();
        assert!((sol.solution[0] - 1.0).abs() < 1e-12);
        assert!(sol.transcript.final_residual() <= 1e-10);
    }

    #[test]
    fn non_monotone_scalar_uses_dense_fallback() {
        // f(x) = x - 3, f' = 1 > 0: Jacobian is negative definite
        let l = CsrMatrix::from_diagonal(&[0.0]);
        let areas = [1.0];
        let p = SemilinearProblem::new(&l, &areas, vec![1.0], |_: usize, x: f64| (x - 3.0, 1.0), vec![0.0]).unwrap();
        let sol = newton_solve(&p, &SolverConfig::default()).unwrap();
        assert!((sol.solution[0] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_positive_diffusion() {
        let l = CsrMatrix::from_diagonal(&[0.0, 0.0]);
        let areas = [1.0, 1.0];
        let err = SemilinearProblem::new(&l, &areas, vec![1.0, 0.0], |_: usize, x: f64| (-x, -1.0), vec![0.0; 2]);
        assert!(matches!(err, Err(Error::Domain(_))));
    }

    #[test]
    fn iteration_cap_returns_transcript() {
        let l = CsrMatrix::from_diagonal(&[0.0]);
        let areas = [1.0];
        let p = SemilinearProblem::new(&l, &areas, vec![1.0], |_: usize, x: f64| (-x.exp() + 1e6, -x.exp()), vec![0.0]).unwrap();
        let cfg = SolverConfig { max_iterations: 2, ..Default::default() };
        match newton_solve(&p, &cfg) {
            Err(Error::NonConvergence { transcript }) => assert_eq!(transcript.iterations(), 2),
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn unsolvable_problem_stagnates_or_blows_up() {
        // f(x) = e^{-x} + 1 > 0 has no root; iterates run off to +inf
        let l = CsrMatrix::from_diagonal(&[0.0]);
        let areas = [1.0];
        let p = SemilinearProblem::new(&l, &areas, vec![1.0], |_: usize, x: f64| ((-x).exp() + 1.0, -(-x).exp()), vec![0.0])
            .unwrap()
            .with_blow_up_limit(50.0);
        let err = newton_solve(&p, &SolverConfig::default()).unwrap_err();
        assert!(matches!(err, Error::BlowUp { .. } | Error::Stagnation { .. } | Error::NonConvergence { .. }), "{err}");
        assert!(err.transcript().is_some());
    }
}
