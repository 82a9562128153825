//! Solver engines on the reported examples.

use canodual::benchmarks::*;
use canodual::dual::{dual_point, jacobian_xs, residual_dual, residual_xs, Classification};
use canodual::numerics::PSD_TOL;
use canodual::solvers::*;
use canodual::strategies::{StrategyConfig, Strategy, strategy4};
use nalgebra::{DMatrix, DVector};

fn v(xs: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(xs)
}

#[test]
fn config_validation() {
    assert!(SolverConfig::default().validate().is_ok());
    let bad = SolverConfig { armijo_c1: 0.95, ..Default::default() };
    assert!(bad.validate().is_err());
    let bad = SolverConfig { grad_tol: 0.0, ..Default::default() };
    assert!(bad.validate().is_err());
}

#[test]
fn scalar_root() {
    let r = |x: &DVector<f64>| x.map(|a| a * a - 1.0);
    let (x, t) = newton_solve(&r, Jacobian::FiniteDifference, &v(&[2.0]), &SolverConfig::default()).unwrap();
    assert_eq!(t.termination, Termination::Converged);
    assert!((x[0] - 1.0).abs() < 1e-10);
}

#[test]
fn colville_joint_system() {
    let p = colville().unwrap();
    let split = |z: &DVector<f64>| (z.rows(0, 4).into_owned(), z.rows(4, 2).into_owned());
    let r = |z: &DVector<f64>| {
        let (x, s) = split(z);
        residual_xs(&p, &x, &s).unwrap()
    };
    let j = |z: &DVector<f64>| {
        let (x, s) = split(z);
        jacobian_xs(&p, &x, &s).unwrap()
    };
    let z0 = v(&[2.0, 0.9875, 2.0, 0.9875, 0.5, 0.5]);
    let (z, t) = newton_solve(&r, Jacobian::Analytic(&j), &z0, &SolverConfig::default()).unwrap();
    assert_eq!(t.termination, Termination::Converged);
    assert!((z - v(&[1.0, 1.0, 1.0, 1.0, 0.0, 0.0])).amax() < 1e-8);
    assert!(t.records.len() <= SolverConfig::default().max_iter + 1);
}

#[test]
fn zettle_dual_system() {
    let p = zettle().unwrap();
    let r = |s: &DVector<f64>| residual_dual(&p, s).unwrap();
    let (s, t) = newton_solve(&r, Jacobian::FiniteDifference, &v(&[0.1]), &SolverConfig::default()).unwrap();
    assert_eq!(t.termination, Termination::Converged);
    assert!((s[0] - 0.1214).abs() < 1e-4);
}

#[test]
fn bfgs_shifted_quadratic() {
    let a = v(&[3.0, -1.0, 0.5, 7.0]);
    let f = |x: &DVector<f64>| 0.5 * (x - &a).norm_squared();
    let g = |x: &DVector<f64>| x - &a;
    for x0 in [DVector::zeros(4), v(&[-10.0, 4.0, 2.0, 1e3])] {
        let (x, t) = bfgs_minimize(&f, Gradient::Analytic(&g), &x0, &SolverConfig::default()).unwrap();
        assert_eq!(t.termination, Termination::Converged);
        assert!((x - &a).amax() <= 1e-8);
    }
}

#[test]
fn bfgs_rosenbrock_from_seed() {
    let p = rosenbrock(2).unwrap();
    let f = |x: &DVector<f64>| p.eval_primal(x).unwrap();
    let g = |x: &DVector<f64>| p.grad_primal(x).unwrap();
    let (x, t) = bfgs_minimize(&f, Gradient::Analytic(&g), &v(&[0.5, 0.0]), &SolverConfig::default()).unwrap();
    assert_eq!(t.termination, Termination::Converged);
    assert!((x.add_scalar(-1.0)).amax() < 1e-6);
    assert!(p.eval_primal(&x).unwrap() <= 1e-8);
}

#[test]
fn bfgs_rosenbrock_100_from_strategy4_seed() {
    let p = rosenbrock(100).unwrap();
    let cfg = StrategyConfig::new(Strategy::S4).with_sigma0(reference_sigma0(BenchmarkName::Rosenbrock, 100).unwrap());
    let r = strategy4(&p, &cfg).unwrap();
    assert_eq!(r.termination, Termination::Converged);
    assert!(r.x_star.add_scalar(-1.0).amax() < 1e-6);
    assert!(r.p_value <= 1e-8);
}

#[test]
fn barrier_styblinski_tang() {
    let p = styblinski_tang().unwrap();
    let (s, t) = barrier_maximize_dual(&p, &v(&[8.1, 8.1]), &default_mu_schedule(1.0), &SolverConfig::default()).unwrap();
    assert_eq!(t.termination, Termination::Converged);
    assert!((s - v(&[8.4305, 8.4305])).amax() <= 1e-3);
}

#[test]
fn barrier_iterates_stay_interior() {
    let p = styblinski_tang().unwrap();
    let cfg = SolverConfig::default();
    let (_, t) = barrier_maximize_dual(&p, &v(&[8.1, 8.1]), &default_mu_schedule(10.0), &cfg).unwrap();
    assert!(t.records.iter().all(|r| r.value.is_finite()));
    // every accepted step had a finite barrier value, which requires G > 0
    let (s, _) = barrier_maximize_dual(&p, &v(&[8.1, 8.1]), &[], &cfg).unwrap();
    let dp = dual_point(&p, &s).unwrap();
    assert_eq!(dp.classification, Classification::InteriorPlus);
    assert!(dp.factor.is_pd(PSD_TOL));
}

#[test]
fn barrier_perturbed_example0() {
    let p = example0(Example0Params { delta: 0.05, ..Default::default() }).unwrap();
    let (s, t) = barrier_maximize_dual(&p, &v(&[3.0]), &default_mu_schedule(1.0), &SolverConfig::default()).unwrap();
    assert_eq!(t.termination, Termination::Converged);
    assert!((s[0] - 2.0166).abs() <= 1e-2);
    let x = dual_point(&p, &s).unwrap().x;
    assert!((x[0] + 2.0056).abs() <= 1e-2);
}

#[test]
fn newton_singular_reporting() {
    let r = |x: &DVector<f64>| v(&[x[0] * x[0] + 1.0]);
    let j = |_: &DVector<f64>| DMatrix::zeros(1, 1);
    let (_, t) = newton_solve(&r, Jacobian::Analytic(&j), &v(&[0.0]), &SolverConfig::default()).unwrap();
    assert_eq!(t.termination, Termination::SingularJacobian);
}

#[test]
fn non_finite_start() {
    let r = |_: &DVector<f64>| v(&[f64::NAN]);
    let (_, t) = newton_solve(&r, Jacobian::FiniteDifference, &v(&[0.0]), &SolverConfig::default()).unwrap();
    assert_eq!(t.termination, Termination::NonFinite);
}
