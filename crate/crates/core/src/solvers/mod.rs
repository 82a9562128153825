//! Numerical engines: damped Newton for square systems, BFGS with a Wolfe
//! line search, and a log-det barrier driver for the dual.

mod barrier;
mod bfgs;
mod line_search;
mod newton;

pub use barrier::{barrier_maximize_dual, default_mu_schedule};
pub use bfgs::{bfgs_minimize, Gradient};
pub use line_search::{wolfe_search, LineSearchFailure, LineSearchPoint};
pub use newton::{newton_solve, Jacobian};

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub max_iter: usize,
    pub grad_tol: f64,
    pub residual_tol: f64,
    pub armijo_c1: f64,
    pub wolfe_c2: f64,
    pub max_backtracks: usize,
    pub fd_step: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            max_iter: 2000,
            grad_tol: 1e-8,
            residual_tol: 1e-10,
            armijo_c1: 1e-4,
            wolfe_c2: 0.9,
            max_backtracks: 40,
            fd_step: f64::EPSILON.cbrt(),
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0 < self.armijo_c1 && self.armijo_c1 < self.wolfe_c2 && self.wolfe_c2 < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "need 0 < c1 < c2 < 1, got c1 = {}, c2 = {}",
                self.armijo_c1, self.wolfe_c2
            )));
        }
        for (name, v) in [("grad_tol", self.grad_tol), ("residual_tol", self.residual_tol), ("fd_step", self.fd_step)] {
            if !(v > 0.0) {
                return Err(Error::InvalidConfig(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Termination {
    Converged,
    MaxIter,
    LineSearchFail,
    SingularJacobian,
    NonFinite,
}

impl Termination {
    pub fn is_converged(self) -> bool {
        self == Termination::Converged
    }
}

/// One iteration: `||x||`, the objective (or residual norm), and the step length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    pub iterate_norm: f64,
    pub value: f64,
    pub step: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationTrace {
    pub records: Vec<IterationRecord>,
    pub termination: Termination,
}

impl IterationTrace {
    fn start(iterate_norm: f64, value: f64) -> Self {
        IterationTrace {
            records: vec![IterationRecord { iterate_norm, value, step: 0.0 }],
            termination: Termination::MaxIter,
        }
    }

    fn push(&mut self, iterate_norm: f64, value: f64, step: f64) {
        self.records.push(IterationRecord { iterate_norm, value, step });
    }

    /// Number of completed iterations (records after the initial point).
    pub fn iterations(&self) -> usize {
        self.records.len().saturating_sub(1)
    }
}
