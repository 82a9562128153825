//! Strong Wolfe line search (bracketing followed by zoom).
//!
//! Non-finite trial values are treated as overshooting, so objectives may
//! return `+inf` outside their domain. When the function differences sink
//! below rounding near a minimizer, the approximate Wolfe test (derivative
//! based) is accepted inside a small noise band around `phi(0)`.

use nalgebra::DVector;

#[derive(Debug, Clone)]
pub struct LineSearchPoint {
    pub alpha: f64,
    pub value: f64,
    pub grad: DVector<f64>,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LineSearchFailure {
    /// No acceptable step within the evaluation budget.
    Exhausted,
    /// `d` is not a descent direction.
    NotDescent,
}

/// Noise band for the approximate Wolfe acceptance, relative to `max(1, |phi(0)|)`.
const NOISE_BAND: f64 = 0.0;
/// Upper bound on trial step growth during bracketing.
const MAX_STEP: f64 = 1e10;

struct Trial {
    alpha: f64,
    value: f64,
    slope: f64,
    grad: DVector<f64>,
}

/// Searches along `d` from `x` for a step satisfying the strong Wolfe conditions.
///
/// `eval` returns the value and gradient at a point; `budget` caps evaluations.
#[allow(clippy::too_many_arguments)]
pub fn wolfe_search<E>(
    eval: &mut E,
    x: &DVector<f64>,
    f0: f64,
    g0: &DVector<f64>,
    d: &DVector<f64>,
    alpha_init: f64,
    c1: f64,
    c2: f64,
    budget: usize,
) -> Result<LineSearchPoint, LineSearchFailure>
where
    E: FnMut(&DVector<f64>) -> (f64, DVector<f64>),
{
    let slope0 = g0.dot(d);
    if !(slope0 < 0.0) {
        return Err(LineSearchFailure::NotDescent);
    }
    let noise = NOISE_BAND * f0.abs().max(1.0);
    let mut evaluations = 0usize;
    let mut probe = |alpha: f64, evaluations: &mut usize| -> Trial {
        *evaluations += 1;
        let (value, grad) = eval(&(x + d * alpha));
        let slope = if value.is_finite() { grad.dot(d) } else { f64::NAN };
        Trial { alpha, value, slope, grad }
    };
    let armijo = |t: &Trial| t.value.is_finite() && t.value <= f0 + c1 * t.alpha * slope0;
    let strong_curvature = |t: &Trial| t.slope.abs() <= -c2 * slope0;
    let approx_wolfe = |t: &Trial| {
        t.value.is_finite()
            && t.value <= f0 + noise
            && t.slope >= c2 * slope0
            && t.slope <= (2.0 * c1 - 1.0) * slope0
    };
    let accept = |t: Trial, evaluations: usize| LineSearchPoint {
        alpha: t.alpha,
        value: t.value,
        grad: t.grad,
        evaluations,
    };

    let mut prev = Trial { alpha: 0.0, value: f0, slope: slope0, grad: g0.clone() };
    let mut alpha = alpha_init;
    let (mut lo, mut hi);
    loop {
        if evaluations >= budget {
            return Err(LineSearchFailure::Exhausted);
        }
        let cur = probe(alpha, &mut evaluations);
        let overshoot = !cur.value.is_finite() || !armijo(&cur) || (prev.alpha > 0.0 && cur.value >= prev.value);
        if overshoot {
            if cur.value.is_finite() && approx_wolfe(&cur) {
                return Ok(accept(cur, evaluations));
            }
            lo = prev;
            hi = cur;
            break;
        }
        if strong_curvature(&cur) {
            return Ok(accept(cur, evaluations));
        }
        if cur.slope >= 0.0 {
            lo = cur;
            hi = prev;
            break;
        }
        prev = cur;
        alpha = (alpha * 2.0).min(MAX_STEP);
        if prev.alpha >= MAX_STEP {
            return Ok(accept(prev, evaluations));
        }
    }

    // zoom: lo satisfies Armijo with the lowest value seen; hi brackets it
    while evaluations < budget {
        let trial_alpha = interpolate(&lo, &hi);
        if (hi.alpha - lo.alpha).abs() <= f64::EPSILON * lo.alpha.abs().max(1e-300) {
            break;
        }
        let cur = probe(trial_alpha, &mut evaluations);
        if !armijo(&cur) || cur.value >= lo.value {
            if approx_wolfe(&cur) {
                return Ok(accept(cur, evaluations));
            }
            hi = cur;
            continue;
        }
        if strong_curvature(&cur) {
            return Ok(accept(cur, evaluations));
        }
        if cur.slope * (hi.alpha - lo.alpha) >= 0.0 {
            hi = lo;
        }
        lo = cur;
    }
    if lo.alpha > 0.0 && (strong_curvature(&lo) || approx_wolfe(&lo)) {
        return Ok(accept(lo, evaluations));
    }
    Err(LineSearchFailure::Exhausted)
}

/// Safeguarded cubic interpolation inside `[lo, hi]`, bisection otherwise.
fn interpolate(lo: &Trial, hi: &Trial) -> f64 {
    let (a, b) = (lo.alpha, hi.alpha);
    let mid = 0.5 * (a + b);
    if !hi.value.is_finite() || !hi.slope.is_finite() {
        return mid;
    }
    let d1 = lo.slope + hi.slope - 3.0 * (lo.value - hi.value) / (a - b);
    let disc = d1 * d1 - lo.slope * hi.slope;
    if disc < 0.0 {
        return mid;
    }
    let d2 = (b - a).signum() * disc.sqrt();
    let t = b - (b - a) * (hi.slope + d2 - d1) / (hi.slope - lo.slope + 2.0 * d2);
    let (left, right) = (a.min(b), a.max(b));
    let margin = 0.1 * (right - left);
    if t.is_finite() && t > left + margin && t < right - margin {
        t
    } else {
        mid
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_step_satisfies_wolfe() {
        // f(x) = 2 x^2 from x = 1 along d = -1
        let mut eval = |x: &DVector<f64>| (2.0 * x[0] * x[0], DVector::from_vec(vec![4.0 * x[0]]));
        let x = DVector::from_vec(vec![1.0]);
        let g = DVector::from_vec(vec![4.0]);
        let d = DVector::from_vec(vec![-1.0]);
        let pt = wolfe_search(&mut eval, &x, 2.0, &g, &d, 1.0, 1e-4, 0.9, 50).unwrap();
        assert!(pt.value <= 2.0 + 1e-4 * pt.alpha * -4.0);
        assert!(pt.grad[0].abs() * 1.0 <= 0.9 * 4.0);
    }

    #[test]
    fn infinite_region_is_avoided() {
        // finite only for x < 1.5
        let mut eval = |x: &DVector<f64>| {
            if x[0] >= 1.5 {
                (f64::INFINITY, DVector::from_vec(vec![f64::NAN]))
            } else {
                (-(1.5 - x[0]).ln() + x[0], DVector::from_vec(vec![1.0 / (1.5 - x[0]) + 1.0]))
            }
        };
        let x = DVector::from_vec(vec![1.0]);
        let (f0, g0) = eval(&x);
        let d = -g0.clone();
        let pt = wolfe_search(&mut eval, &x, f0, &g0, &d, 1.0, 1e-4, 0.9, 60).unwrap();
        assert!(pt.value.is_finite() && pt.value < f0);
    }

    #[test]
    fn ascent_direction_rejected() {
        let mut eval = |x: &DVector<f64>| (x[0] * x[0], DVector::from_vec(vec![2.0 * x[0]]));
        let x = DVector::from_vec(vec![1.0]);
        let g = DVector::from_vec(vec![2.0]);
        let r = wolfe_search(&mut eval, &x, 1.0, &g, &g, 1.0, 1e-4, 0.9, 10);
        assert_eq!(r.unwrap_err(), LineSearchFailure::NotDescent);
    }
}
