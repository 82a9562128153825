//! Damped Newton iteration for square nonlinear systems.

use nalgebra::{DMatrix, DVector};

use super::{IterationTrace, SolverConfig, Termination};
use crate::error::{Error, Result};
use crate::numerics::fd_jacobian;

/// Source of the Jacobian for [`newton_solve`].
pub enum Jacobian<'a> {
    Analytic(&'a dyn Fn(&DVector<f64>) -> DMatrix<f64>),
    FiniteDifference,
}

fn inf_norm(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0, |m, a| if a.abs() > m || a.is_nan() { a.abs() } else { m })
}

/// Newton direction `J d = -r`: LU first, SVD pseudoinverse when LU fails.
fn newton_direction(j: &DMatrix<f64>, r: &DVector<f64>) -> Option<DVector<f64>> {
    let rhs = -r;
    if let Some(d) = j.clone().lu().solve(&rhs) {
        if d.iter().all(|v| v.is_finite()) {
            return Some(d);
        }
    }
    let svd = j.clone().svd(true, true);
    let smax = svd.singular_values.max();
    if !(smax > 0.0) {
        return None;
    }
    let eps = f64::EPSILON * j.nrows().max(1) as f64 * smax;
    svd.solve(&rhs, eps).ok().filter(|d| d.iter().all(|v| v.is_finite()) && d.norm() > 0.0)
}

/// Solves `r(x) = 0` from `x0`. Each step is halved until `||r||_2` decreases.
///
/// The residual must have the same dimension as its input. Convergence is
/// `||r||_inf <= cfg.residual_tol`.
pub fn newton_solve(
    residual: &dyn Fn(&DVector<f64>) -> DVector<f64>,
    jacobian: Jacobian<'_>,
    x0: &DVector<f64>,
    cfg: &SolverConfig,
) -> Result<(DVector<f64>, IterationTrace)> {
    cfg.validate()?;
    let mut x = x0.clone();
    let mut r = residual(&x);
    if r.len() != x.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), got: r.len() });
    }
    let mut trace = IterationTrace::start(x.norm(), inf_norm(&r));
    if r.iter().any(|v| !v.is_finite()) {
        trace.termination = Termination::NonFinite;
        return Ok((x, trace));
    }
    for _ in 0..cfg.max_iter {
        if inf_norm(&r) <= cfg.residual_tol {
            trace.termination = Termination::Converged;
            return Ok((x, trace));
        }
        let j = match &jacobian {
            Jacobian::Analytic(jf) => jf(&x),
            Jacobian::FiniteDifference => match fd_jacobian(residual, &x, cfg.fd_step) {
                Ok(j) => j,
                Err(_) => {
                    trace.termination = Termination::NonFinite;
                    return Ok((x, trace));
                }
            },
        };
        let Some(d) = newton_direction(&j, &r) else {
            trace.termination = Termination::SingularJacobian;
            return Ok((x, trace));
        };
        let norm0 = r.norm();
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..=cfg.max_backtracks {
            let trial = &x + &d * step;
            let rt = residual(&trial);
            if rt.iter().all(|v| v.is_finite()) && rt.norm() < norm0 {
                accepted = Some((trial, rt));
                break;
            }
            step *= 0.5;
        }
        let Some((xn, rn)) = accepted else {
            trace.termination = Termination::LineSearchFail;
            return Ok((x, trace));
        };
        x = xn;
        r = rn;
        trace.push(x.norm(), inf_norm(&r), step);
    }
    trace.termination = if inf_norm(&r) <= cfg.residual_tol { Termination::Converged } else { Termination::MaxIter };
    Ok((x, trace))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_square_root() {
        let r = |x: &DVector<f64>| x.map(|v| v * v - 1.0);
        let j = |x: &DVector<f64>| DMatrix::from_element(1, 1, 2.0 * x[0]);
        let (x, t) = newton_solve(&r, Jacobian::Analytic(&j), &DVector::from_vec(vec![2.0]), &SolverConfig::default()).unwrap();
        assert_eq!(t.termination, Termination::Converged);
        assert!((x[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn linear_system_in_one_step() {
        let a = DMatrix::from_row_slice(2, 2, &[3.0, 1.0, 1.0, 2.0]);
        let b = DVector::from_vec(vec![1.0, -1.0]);
        let (aa, bb) = (a.clone(), b.clone());
        let r = move |x: &DVector<f64>| &aa * x - &bb;
        let j = move |_: &DVector<f64>| a.clone();
        let (_, t) = newton_solve(&r, Jacobian::Analytic(&j), &DVector::zeros(2), &SolverConfig::default()).unwrap();
        assert_eq!(t.termination, Termination::Converged);
        assert_eq!(t.iterations(), 1);
    }

    #[test]
    fn finite_difference_jacobian_converges() {
        let r = |x: &DVector<f64>| DVector::from_vec(vec![x[0] * x[0] + x[1] - 3.0, x[0] - x[1] + 1.0]);
        let (x, t) = newton_solve(&r, Jacobian::FiniteDifference, &DVector::from_vec(vec![2.0, 2.0]), &SolverConfig::default()).unwrap();
        assert_eq!(t.termination, Termination::Converged);
        assert!(r(&x).amax() <= 1e-10);
    }

    #[test]
    fn zero_jacobian_is_singular() {
        let r = |x: &DVector<f64>| DVector::from_vec(vec![1.0 + 0.0 * x[0]]);
        let j = |_: &DVector<f64>| DMatrix::zeros(1, 1);
        let (_, t) = newton_solve(&r, Jacobian::Analytic(&j), &DVector::zeros(1), &SolverConfig::default()).unwrap();
        assert_eq!(t.termination, Termination::SingularJacobian);
    }
}
