//! Log-det barrier maximization of the canonical dual over `G(sigma) > 0`.

use std::cell::RefCell;

use nalgebra::DVector;

use super::{bfgs_minimize, Gradient, IterationTrace, SolverConfig, Termination};
use crate::dual::{dual_point, dual_value_and_residual, Classification, DualPoint};
use crate::error::{Error, Result};
use crate::model::PolynomialProblem;
use crate::numerics::PSD_TOL;

/// `mu0, mu0/10, ..., mu0 * 1e-8`.
pub fn default_mu_schedule(mu0: f64) -> Vec<f64> {
    (0..=8).map(|k| mu0 * 10f64.powi(-k)).collect()
}

struct Evaluation {
    sigma: DVector<f64>,
    value: f64,
    grad: DVector<f64>,
}

/// `-P^d(sigma) - mu log det G(sigma)` and its gradient, `+inf` off the cone.
fn barrier_objective(p: &PolynomialProblem, sigma: &DVector<f64>, mu: f64) -> Evaluation {
    let outside = || Evaluation {
        sigma: sigma.clone(),
        value: f64::INFINITY,
        grad: DVector::from_element(sigma.len(), f64::NAN),
    };
    let Ok(dp) = dual_point(p, sigma) else { return outside() };
    if dp.classification != Classification::InteriorPlus {
        return outside();
    }
    let (pd, r) = dual_value_and_residual(p, &dp);
    let mut value = -pd;
    let mut grad = -r;
    if mu > 0.0 {
        let Some(logdet) = dp.factor.log_det() else { return outside() };
        value -= mu * logdet;
        for (gk, m) in grad.iter_mut().zip(p.measures()) {
            *gk -= mu * dp.factor.trace_pinv_product(m.a());
        }
    }
    if !value.is_finite() {
        return outside();
    }
    Evaluation { sigma: sigma.clone(), value, grad }
}

fn admissible(p: &PolynomialProblem, sigma: &DVector<f64>) -> Result<DualPoint> {
    let dp = dual_point(p, sigma)?;
    if dp.classification != Classification::InteriorPlus || !dp.factor.is_pd(PSD_TOL) {
        return Err(Error::SeedNotAdmissible("barrier start needs G(sigma0) > 0"));
    }
    Ok(dp)
}

/// Maximizes `P^d` from an interior seed along a decreasing barrier schedule,
/// finishing with an unpenalized stage that still rejects steps off the cone.
///
/// Stages share `cfg.max_iter`. The returned trace concatenates all stages,
/// recording the minimized objective `-P^d - mu log det G` of each stage; its
/// termination is that of the final stage.
pub fn barrier_maximize_dual(
    p: &PolynomialProblem,
    sigma0: &DVector<f64>,
    mu_schedule: &[f64],
    cfg: &SolverConfig,
) -> Result<(DVector<f64>, IterationTrace)> {
    cfg.validate()?;
    if let Some(&mu) = mu_schedule.iter().find(|mu| !(**mu >= 0.0 && mu.is_finite())) {
        return Err(Error::InvalidConfig(format!("barrier weights must be finite and non-negative, got {mu}")));
    }
    admissible(p, sigma0)?;
    let mut sigma = sigma0.clone();
    let mut trace = IterationTrace::start(sigma.norm(), barrier_objective(p, &sigma, 0.0).value);
    if sigma.is_empty() {
        trace.termination = Termination::Converged;
        return Ok((sigma, trace));
    }
    let mut budget = cfg.max_iter;
    for &mu in mu_schedule.iter().filter(|&&mu| mu > 0.0).chain(std::iter::once(&0.0)) {
        let cache: RefCell<Option<Evaluation>> = RefCell::new(None);
        let lookup = |s: &DVector<f64>| -> (f64, DVector<f64>) {
            let mut slot = cache.borrow_mut();
            if let Some(e) = slot.as_ref().filter(|e| &e.sigma == s) {
                return (e.value, e.grad.clone());
            }
            let e = barrier_objective(p, s, mu);
            let out = (e.value, e.grad.clone());
            *slot = Some(e);
            out
        };
        let value = |s: &DVector<f64>| lookup(s).0;
        let grad = |s: &DVector<f64>| lookup(s).1;
        let stage_cfg = SolverConfig { max_iter: budget, ..cfg.clone() };
        let (next, stage) = bfgs_minimize(&value, Gradient::Analytic(&grad), &sigma, &stage_cfg)?;
        budget = budget.saturating_sub(stage.iterations());
        sigma = next;
        trace.records.extend(stage.records.iter().skip(1).copied());
        trace.termination = stage.termination;
        if matches!(stage.termination, Termination::NonFinite) {
            break;
        }
    }
    Ok((sigma, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{SparseVec, SymMatrix};
    use crate::model::QuadraticMeasure;

    #[test]
    fn concave_quadratic_dual_reaches_interior_maximizer() {
        // A = 0, so P^d(s) = c s - s^2 / 2 - f^2 / 2 with maximizer s = c
        let m = QuadraticMeasure::new(1.0, SymMatrix::zeros(1), SparseVec::zeros(1), 0.75).unwrap();
        let p = PolynomialProblem::new(SymMatrix::identity(1), DVector::from_vec(vec![1.0]), 0.0, vec![m]).unwrap();
        let (s, t) = barrier_maximize_dual(&p, &DVector::from_vec(vec![-3.0]), &default_mu_schedule(1.0), &SolverConfig::default()).unwrap();
        assert_eq!(t.termination, Termination::Converged);
        assert!((s[0] - 0.75).abs() < 1e-9);
    }

    #[test]
    fn rejects_non_interior_seed() {
        let m = QuadraticMeasure::new(1.0, SymMatrix::identity(1), SparseVec::zeros(1), 0.0).unwrap();
        let p = PolynomialProblem::new(SymMatrix::zeros(1), DVector::from_vec(vec![1.0]), 0.0, vec![m]).unwrap();
        let err = barrier_maximize_dual(&p, &DVector::from_vec(vec![-1.0]), &[1.0], &SolverConfig::default()).unwrap_err();
        assert!(matches!(err, Error::SeedNotAdmissible(_)));
    }
}
