//! BFGS with a dense inverse-Hessian estimate.

use nalgebra::{DMatrix, DVector};

use super::line_search::{wolfe_search, LineSearchFailure};
use super::{IterationTrace, SolverConfig, Termination};
use crate::error::Result;
use crate::numerics::fd_gradient;
use crate::parallel::Execution;

/// Dimension from which the `O(n^2)` kernels run column-parallel.
const PARALLEL_DIM: usize = 256;

type ValueGrad<'a> = dyn FnMut(&DVector<f64>) -> (f64, DVector<f64>) + 'a;

pub enum Gradient<'a> {
    Analytic(&'a dyn Fn(&DVector<f64>) -> DVector<f64>),
    FiniteDifference,
}

struct InverseHessian {
    h: DMatrix<f64>,
    identity: bool,
    exec: Execution,
}

impl InverseHessian {
    fn new(n: usize) -> Self {
        InverseHessian { h: DMatrix::identity(n, n), identity: true, exec: Execution::for_size(n, PARALLEL_DIM) }
    }

    fn reset(&mut self) {
        let n = self.h.nrows();
        self.h = DMatrix::identity(n, n);
        self.identity = true;
    }

    /// `H v`, using the symmetry of `H` to read columns.
    fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        let n = self.h.nrows();
        let h = &self.h;
        DVector::from_vec(self.exec.map_range(n, |i| h.column(i).dot(v)))
    }

    fn update(&mut self, s: &DVector<f64>, y: &DVector<f64>) -> bool {
        let sy = s.dot(y);
        if !(sy > f64::EPSILON.sqrt() * s.norm() * y.norm()) {
            return false;
        }
        if self.identity {
            // scale before the first update
            self.h *= sy / y.norm_squared();
            self.identity = false;
        }
        let rho = 1.0 / sy;
        let hy = self.apply(y);
        let coef = rho * rho * y.dot(&hy) + rho;
        let n = self.h.nrows();
        let (s, hy) = (s.as_slice(), hy.as_slice());
        self.exec.for_each_chunk_mut(self.h.as_mut_slice(), n, |j, col| {
            let (sj, hyj) = (s[j], hy[j]);
            for (i, c) in col.iter_mut().enumerate() {
                *c += coef * s[i] * sj - rho * (s[i] * hyj + hy[i] * sj);
            }
        });
        true
    }
}

/// Minimizes `value` from `x0` with BFGS and a strong Wolfe line search.
///
/// The inverse-Hessian estimate starts at the identity. Updates with
/// non-positive curvature are skipped; a non-descent direction resets it.
pub fn bfgs_minimize(
    value: &dyn Fn(&DVector<f64>) -> f64,
    gradient: Gradient<'_>,
    x0: &DVector<f64>,
    cfg: &SolverConfig,
) -> Result<(DVector<f64>, IterationTrace)> {
    cfg.validate()?;
    let h = cfg.fd_step;
    let eval_grad = |x: &DVector<f64>| -> Option<DVector<f64>> {
        let g = match &gradient {
            Gradient::Analytic(gf) => gf(x),
            Gradient::FiniteDifference => fd_gradient(value, x, h).ok()?,
        };
        g.iter().all(|v| v.is_finite()).then_some(g)
    };
    let mut eval = |x: &DVector<f64>| -> (f64, DVector<f64>) {
        let f = value(x);
        if !f.is_finite() {
            return (f64::INFINITY, DVector::from_element(x.len(), f64::NAN));
        }
        match eval_grad(x) {
            Some(g) => (f, g),
            None => (f64::INFINITY, DVector::from_element(x.len(), f64::NAN)),
        }
    };

    let mut x = x0.clone();
    let (mut f, mut g) = eval(&x);
    let mut trace = IterationTrace::start(x.norm(), f);
    if !f.is_finite() {
        trace.termination = Termination::NonFinite;
        return Ok((x, trace));
    }
    let mut hinv = InverseHessian::new(x.len());
    let mut first = true;
    for _ in 0..cfg.max_iter {
        if g.amax() <= cfg.grad_tol {
            trace.termination = Termination::Converged;
            return Ok((x, trace));
        }
        let mut d = -hinv.apply(&g);
        if !(g.dot(&d) < 0.0) {
            hinv.reset();
            d = -g.clone();
        }
        // first trial step 1/||g||_inf, unit steps afterwards
        let alpha0 = if first { (1.0 / g.amax()).min(1.0) } else { 1.0 };
        let search = |d: &DVector<f64>, eval: &mut ValueGrad<'_>| {
            let mut e = |z: &DVector<f64>| eval(z);
            wolfe_search(&mut e, &x, f, &g, d, alpha0, cfg.armijo_c1, cfg.wolfe_c2, cfg.max_backtracks)
        };
        let point = match search(&d, &mut eval) {
            Ok(pt) => pt,
            Err(LineSearchFailure::Exhausted | LineSearchFailure::NotDescent) if !hinv.identity => {
                hinv.reset();
                let sd = -g.clone();
                match search(&sd, &mut eval) {
                    Ok(pt) => {
                        d = sd;
                        pt
                    }
                    Err(_) => {
                        trace.termination = Termination::LineSearchFail;
                        return Ok((x, trace));
                    }
                }
            }
            Err(_) => {
                trace.termination = Termination::LineSearchFail;
                return Ok((x, trace));
            }
        };
        first = false;
        let s = &d * point.alpha;
        let y = &point.grad - &g;
        x += &s;
        f = point.value;
        g = point.grad;
        hinv.update(&s, &y);
        trace.push(x.norm(), f, point.alpha);
    }
    trace.termination = if g.amax() <= cfg.grad_tol { Termination::Converged } else { Termination::MaxIter };
    Ok((x, trace))
}
