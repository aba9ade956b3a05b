//! Linear SPD solves and damped Newton iteration for the semilinear
//! problems `-(d_v / A_v) (L x)_v + f(v, x_v) = 0`.

mod cholesky;
mod linear;
mod newton;

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use cholesky::ProfileCholesky;
pub use linear::{solve_linear_spd, solve_with_cg};
pub use newton::{newton_solve, NewtonSolution, Pointwise, SemilinearProblem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinearSolver {
    /// Profile Cholesky after reverse Cuthill-McKee reordering. Deterministic.
    Direct,
    /// Conjugate gradients with a Jacobi preconditioner.
    ConjugateGradient,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    /// Newton stops once the residual sup-norm is at or below this, times
    /// the problem's residual scale (1 for unit-size coefficients).
    pub tolerance: f64,
    pub max_iterations: usize,
    pub backtrack_factor: f64,
    pub max_backtracks: usize,
    pub linear_solver: LinearSolver,
    /// Relative sup-norm residual accepted from a linear solve.
    pub linear_tolerance: f64,
    pub cg_max_iterations: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_iterations: 50,
            backtrack_factor: 0.5,
            max_backtracks: 30,
            linear_solver: LinearSolver::Direct,
            linear_tolerance: 1e-12,
            cg_max_iterations: 20_000,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, x: f64| {
            if x > 0.0 && x.is_finite() {
                Ok(())
            } else {
                Err(Error::Domain(format!("{name} must be positive, got {x}")))
            }
        };
        positive("tolerance", self.tolerance)?;
        positive("linear_tolerance", self.linear_tolerance)?;
        if !(self.backtrack_factor > 0.0 && self.backtrack_factor < 1.0) {
            return Err(Error::Domain(format!(
                "backtrack_factor must lie in (0, 1), got {}",
                self.backtrack_factor
            )));
        }
        if self.max_iterations == 0 || self.max_backtracks == 0 || self.cg_max_iterations == 0 {
            return Err(Error::Domain("iteration caps must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub residual_inf: f64,
    pub step_length: f64,
}

/// Residual history of one Newton solve. Record 0 is the initial guess.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub records: Vec<IterationRecord>,
}

impl Transcript {
    pub fn push(&mut self, iteration: usize, residual_inf: f64, step_length: f64) {
        self.records.push(IterationRecord { iteration, residual_inf, step_length });
    }

    pub fn final_residual(&self) -> f64 {
        self.records.last().map_or(f64::NAN, |r| r.residual_inf)
    }

    /// Newton steps taken (records after the initial one).
    pub fn iterations(&self) -> usize {
        self.records.len().saturating_sub(1)
    }

    pub fn residuals(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.residual_inf).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("iteration,residual_inf,step_length\n");
        for r in &self.records {
            writeln!(out, "{},{:e},{}", r.iteration, r.residual_inf, r.step_length).unwrap();
        }
        out
    }
}

pub(crate) fn sup_norm(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |m, v| m.max(v.abs()))
}
