//! Benchmark constructors against the original closed-form objectives.

use canodual::benchmarks::*;
use canodual::dual::{dual_point, recover_x, Classification};
use canodual::solvers::{newton_solve, Jacobian, SolverConfig, Termination};
use canodual::PolynomialProblem;
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn colville_f(x: &[f64]) -> f64 {
    100.0 * (x[1] - x[0] * x[0]).powi(2)
        + (1.0 - x[0]).powi(2)
        + 90.0 * (x[3] - x[2] * x[2]).powi(2)
        + (1.0 - x[2]).powi(2)
        + 10.1 * ((x[1] - 1.0).powi(2) + (x[3] - 1.0).powi(2))
        + 19.8 * (x[1] - 1.0) * (x[3] - 1.0)
}

fn zettle_f(x: &[f64]) -> f64 {
    (x[0] * x[0] + x[1] * x[1] - 2.0 * x[0]).powi(2) + 0.25 * x[0]
}

fn styblinski_tang_f(x: &[f64]) -> f64 {
    0.5 * x.iter().map(|v| v.powi(4) - 16.0 * v * v + 5.0 * v).sum::<f64>()
}

fn rosenbrock_f(x: &[f64]) -> f64 {
    x.windows(2).map(|w| 100.0 * (w[1] - w[0] * w[0]).powi(2) + (w[0] - 1.0).powi(2)).sum()
}

fn dixon_price_f(x: &[f64]) -> f64 {
    (x[0] - 1.0).powi(2) + (1..x.len()).map(|i| (i + 1) as f64 * (2.0 * x[i] * x[i] - x[i - 1]).powi(2)).sum::<f64>()
}

fn example0_f(x: f64, p: &Example0Params) -> f64 {
    0.5 * p.alpha * (0.5 * p.a * x * x + p.b * x + p.c).powi(2) + 0.5 * p.q * x * x - x * (p.f - p.delta)
}

fn assert_identity(p: &PolynomialProblem, f: impl Fn(&[f64]) -> f64, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..100 {
        let x = DVector::from_iterator(p.dim(), (0..p.dim()).map(|_| rng.random_range(-5.0..5.0)));
        let (got, want) = (p.eval_primal(&x).unwrap(), f(x.as_slice()));
        assert!((got - want).abs() <= 1e-9 * want.abs().max(1.0), "x = {x:?}: {got} vs {want}");
    }
}

#[test]
fn standardized_forms_match_closed_forms() {
    assert_identity(&colville().unwrap(), colville_f, 1);
    assert_identity(&zettle().unwrap(), zettle_f, 2);
    assert_identity(&styblinski_tang().unwrap(), styblinski_tang_f, 3);
    for n in [2, 3, 7, 20] {
        assert_identity(&rosenbrock(n).unwrap(), rosenbrock_f, 4 + n as u64);
        assert_identity(&dixon_price(n).unwrap(), dixon_price_f, 40 + n as u64);
    }
    for delta in [0.0, 0.05] {
        let params = Example0Params { delta, ..Default::default() };
        assert_identity(&example0(params).unwrap(), |x| example0_f(x[0], &params), 99);
    }
}

#[test]
fn colville_at_origin_is_42() {
    assert_eq!(colville().unwrap().eval_primal(&DVector::zeros(4)).unwrap(), 42.0);
    assert_eq!(colville_f(&[0.0; 4]), 42.0);
}

#[test]
fn zettle_at_origin_is_zero() {
    assert_eq!(zettle().unwrap().eval_primal(&DVector::zeros(2)).unwrap(), 0.0);
}

#[test]
fn example0_defaults() {
    let p = example0(Example0Params::default()).unwrap();
    assert!((p.eval_primal(&DVector::from_element(1, -2.0)).unwrap() + 6.0).abs() < 1e-14);
    for s in [-3.0, 0.0, 1.5, 2.5, 3.0, 10.0] {
        let (x, _) = recover_x(&p, &DVector::from_element(1, s)).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-12, "sigma = {s}: x = {}", x[0]);
    }
}

#[test]
fn rosenbrock_seed_recovery() {
    let p = rosenbrock(5).unwrap();
    let dp = dual_point(&p, &DVector::from_element(4, -1.0)).unwrap();
    assert_eq!(dp.x.as_slice(), &[0.5, 0.75, 0.75, 0.75, 0.0]);
    assert_eq!(dp.classification, Classification::Infeasible);
}

#[test]
#[allow(clippy::approx_constant)]
fn rosenbrock_min_and_dixon_price_min() {
    let p = rosenbrock(2).unwrap();
    assert_eq!(p.eval_primal(&DVector::from_element(2, 1.0)).unwrap(), 0.0);
    let p = dixon_price(2).unwrap();
    assert!(p.eval_primal(&DVector::from_vec(vec![1.0, 0.7071])).unwrap() <= 1e-7);
}

#[test]
fn dixon_price_recovered_last_coordinate_is_zero() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for n in [2, 4, 9] {
        let p = dixon_price(n).unwrap();
        let mut checked = 0;
        for _ in 0..200 {
            let s = DVector::from_iterator(n - 1, (0..n - 1).map(|_| rng.random_range(-3.0..3.0)));
            let dp = dual_point(&p, &s).unwrap();
            if dp.classification.is_feasible() {
                assert_eq!(dp.x[n - 1], 0.0);
                checked += 1;
            }
        }
        assert!(checked > 0);
    }
}

#[test]
fn exact_known_minima_are_stationary() {
    for (name, n) in [(BenchmarkName::Colville, 4), (BenchmarkName::Rosenbrock, 30), (BenchmarkName::DixonPrice, 2), (BenchmarkName::DixonPrice, 12)] {
        let p = build(name, n).unwrap();
        let km = known_minimum(name, n).unwrap();
        assert!(p.grad_primal(&km.x).unwrap().amax() <= 1e-5, "{name} n={n}");
        assert!((p.eval_primal(&km.x).unwrap() - km.value).abs() <= 1e-12);
    }
}

/// The four-digit published minimizers are not stationary to 1e-5 themselves
/// (the rounding error times the curvature exceeds it), so the check is that a
/// stationary point lies within rounding distance and satisfies the bound.
#[test]
fn rounded_known_minima_have_nearby_stationary_points() {
    for name in [BenchmarkName::Zettle, BenchmarkName::StyblinskiTang] {
        let p = build(name, 2).unwrap();
        let km = known_minimum(name, 2).unwrap();
        assert_eq!(km.provenance, Provenance::Published);
        let grad = |x: &DVector<f64>| p.grad_primal(x).unwrap();
        let (x, trace) = newton_solve(&grad, Jacobian::FiniteDifference, &km.x, &SolverConfig::default()).unwrap();
        assert_eq!(trace.termination, Termination::Converged);
        assert!(p.grad_primal(&x).unwrap().amax() <= 1e-5);
        assert!((&x - &km.x).amax() <= 5e-5, "{name}: {x:?}");
        assert!((p.eval_primal(&x).unwrap() - km.value).abs() <= 5e-5);
    }
}

#[test]
fn unsupported_queries() {
    assert!(known_minimum(BenchmarkName::Example0, 1).is_err());
    assert!(known_minimum(BenchmarkName::Rosenbrock, 1).is_err());
    assert!(rosenbrock(1).is_err() && dixon_price(1).is_err());
}

#[test]
fn json_round_trip_for_every_benchmark() {
    for name in BenchmarkName::ALL {
        let p = build(name, 4).unwrap();
        let q = PolynomialProblem::from_json(&p.to_json().unwrap()).unwrap();
        assert_eq!(p, q, "{name}");
    }
}
