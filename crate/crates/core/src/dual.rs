//! The canonical dual kernel.
//!
//! For a dual vector `sigma`, the equilibrium pair is
//! `G(sigma) = Q + sum_k sigma_k A_k` and `F(sigma) = f - sum_k sigma_k b_k`.
//! The primal point is recovered as `x = G^+ F`, and the dual function is
//! `P^d(sigma) = c0 + sum_k (c_k sigma_k - sigma_k^2 / (2 alpha_k)) - F^T G^+ F / 2`.

use nalgebra::{DMatrix, DVector};

use crate::error::{check_len, Result};
use crate::matrix::SymMatrix;
use crate::model::PolynomialProblem;
use crate::numerics::{SpectralFactor, PSD_TOL};

/// Relative tolerance of the column-space test `F in Col(G)`.
pub const COLUMN_TOL: f64 = 1e-8;
/// Relative tolerance for "residual is zero" in certificates.
pub const STATIONARITY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    /// `G > 0`.
    InteriorPlus,
    /// `G >= 0` singular, `F` in the column space of `G`.
    BoundaryPlus,
    /// `F` in the column space, `G` indefinite.
    FeasibleIndefinite,
    /// `F` outside the column space of `G`.
    Infeasible,
}

impl Classification {
    pub fn is_feasible(self) -> bool {
        self != Classification::Infeasible
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Certificate {
    UniqueGlobal,
    MultipleGlobal,
    NotCertified,
}

/// A dual vector with its cached equilibrium pair and classification.
#[derive(Debug, Clone)]
pub struct DualPoint {
    pub sigma: DVector<f64>,
    pub g: SymMatrix,
    pub f: DVector<f64>,
    pub factor: SpectralFactor,
    /// `G^+ F`.
    pub x: DVector<f64>,
    /// `||F - G G^+ F||`.
    pub column_residual: f64,
    pub classification: Classification,
}

impl DualPoint {
    pub fn is_consistent(&self) -> bool {
        self.column_residual <= COLUMN_TOL * self.f.norm().max(1.0)
    }

    pub fn is_singular(&self) -> bool {
        self.factor.is_singular(PSD_TOL)
    }
}

pub fn g_matrix(p: &PolynomialProblem, sigma: &DVector<f64>) -> Result<SymMatrix> {
    check_len(p.num_measures(), sigma.len())?;
    Ok(SymMatrix::combination(p.q(), sigma.iter().zip(p.measures()).map(|(&s, m)| (s, m.a()))))
}

pub fn f_vector(p: &PolynomialProblem, sigma: &DVector<f64>) -> Result<DVector<f64>> {
    check_len(p.num_measures(), sigma.len())?;
    let mut f = p.f().clone();
    for (&s, m) in sigma.iter().zip(p.measures()) {
        m.b().add_scaled_to(f.as_mut_slice(), -s);
    }
    Ok(f)
}

pub fn dual_point(p: &PolynomialProblem, sigma: &DVector<f64>) -> Result<DualPoint> {
    let g = g_matrix(p, sigma)?;
    let f = f_vector(p, sigma)?;
    let factor = SpectralFactor::new(&g)?;
    let x = factor.pinv_apply(f.as_slice());
    let column_residual = factor.column_space_residual(f.as_slice());
    let consistent = column_residual <= COLUMN_TOL * f.norm().max(1.0);
    let classification = if factor.is_pd(PSD_TOL) {
        Classification::InteriorPlus
    } else if !consistent {
        Classification::Infeasible
    } else if factor.is_psd(PSD_TOL) {
        Classification::BoundaryPlus
    } else {
        Classification::FeasibleIndefinite
    };
    Ok(DualPoint { sigma: sigma.clone(), g, f, factor, x, column_residual, classification })
}

/// `x = G^+(sigma) F(sigma)` and whether `F` lies in the column space of `G`.
pub fn recover_x(p: &PolynomialProblem, sigma: &DVector<f64>) -> Result<(DVector<f64>, bool)> {
    let dp = dual_point(p, sigma)?;
    let consistent = dp.is_consistent();
    Ok((dp.x, consistent))
}

fn dual_value_at(p: &PolynomialProblem, dp: &DualPoint) -> f64 {
    let separable: f64 = dp
        .sigma
        .iter()
        .zip(p.measures())
        .map(|(&s, m)| m.c() * s - 0.5 * s * s / m.alpha())
        .sum();
    p.c0() + separable - 0.5 * dp.f.dot(&dp.x)
}

/// `P^d(sigma)`, evaluated with the pseudoinverse even where `F` is
/// inconsistent; check [`dual_point`] for the classification.
pub fn eval_dual(p: &PolynomialProblem, sigma: &DVector<f64>) -> Result<f64> {
    let dp = dual_point(p, sigma)?;
    Ok(dual_value_at(p, &dp))
}

/// `Xi(x, sigma) = Lambda(x)^T sigma - V*(sigma) + x^T Q x / 2 - x^T f + c0`.
pub fn eval_complementary(p: &PolynomialProblem, x: &DVector<f64>, sigma: &DVector<f64>) -> Result<f64> {
    let xi = p.eval_measure(x)?;
    check_len(p.num_measures(), sigma.len())?;
    Ok(xi.dot(sigma) - p.eval_vstar(sigma)? + p.eval_quadratic_part(x)?)
}

/// Stationarity of `Xi`: `[G x - F ; Lambda(x) - sigma / alpha]`.
pub fn residual_xs(p: &PolynomialProblem, x: &DVector<f64>, sigma: &DVector<f64>) -> Result<DVector<f64>> {
    let (n, m) = (p.dim(), p.num_measures());
    check_len(n, x.len())?;
    let g = g_matrix(p, sigma)?;
    let f = f_vector(p, sigma)?;
    let xi = p.eval_measure(x)?;
    let mut r = DVector::zeros(n + m);
    let top = g.mul_vec(x) - f;
    r.rows_mut(0, n).copy_from(&top);
    for (k, mk) in p.measures().iter().enumerate() {
        r[n + k] = xi[k] - sigma[k] / mk.alpha();
    }
    Ok(r)
}

/// Analytic Jacobian of [`residual_xs`]: `[[G, J], [J^T, -diag(1/alpha)]]`
/// with `J_{:,k} = A_k x + b_k`.
pub fn jacobian_xs(p: &PolynomialProblem, x: &DVector<f64>, sigma: &DVector<f64>) -> Result<DMatrix<f64>> {
    let (n, m) = (p.dim(), p.num_measures());
    check_len(n, x.len())?;
    let g = g_matrix(p, sigma)?;
    let mut jac = DMatrix::zeros(n + m, n + m);
    for &(i, j, v) in g.entries() {
        jac[(i, j)] = v;
        jac[(j, i)] = v;
    }
    for (k, mk) in p.measures().iter().enumerate() {
        let col = mk.gradient(x.as_slice());
        for i in 0..n {
            jac[(i, n + k)] = col[i];
            jac[(n + k, i)] = col[i];
        }
        jac[(n + k, n + k)] = -1.0 / mk.alpha();
    }
    Ok(jac)
}

fn residual_dual_at(p: &PolynomialProblem, dp: &DualPoint) -> DVector<f64> {
    let xs = dp.x.as_slice();
    DVector::from_iterator(
        p.num_measures(),
        p.measures().iter().zip(dp.sigma.iter()).map(|(m, &s)| m.eval(xs) - s / m.alpha()),
    )
}

/// Dual stationarity: entry `k` is
/// `F^T G^+ A_k G^+ F / 2 + b_k^T G^+ F + c_k - sigma_k / alpha_k`.
///
/// Where `G > 0` this is the gradient of [`eval_dual`].
pub fn residual_dual(p: &PolynomialProblem, sigma: &DVector<f64>) -> Result<DVector<f64>> {
    let dp = dual_point(p, sigma)?;
    Ok(residual_dual_at(p, &dp))
}

/// Dual value and stationarity residual from one factorization.
pub fn dual_value_and_residual(p: &PolynomialProblem, dp: &DualPoint) -> (f64, DVector<f64>) {
    (dual_value_at(p, dp), residual_dual_at(p, dp))
}

/// `|P(x) - P^d(sigma)|`.
pub fn duality_gap(p: &PolynomialProblem, x: &DVector<f64>, sigma: &DVector<f64>) -> Result<f64> {
    Ok((p.eval_primal(x)? - eval_dual(p, sigma)?).abs())
}

/// Global optimality certificate for a dual vector.
pub fn classify_solution(p: &PolynomialProblem, sigma: &DVector<f64>) -> Result<Certificate> {
    let dp = dual_point(p, sigma)?;
    Ok(certificate_of(p, &dp))
}

pub fn certificate_of(p: &PolynomialProblem, dp: &DualPoint) -> Certificate {
    let scale = dp.f.norm().max(1.0);
    let stationary = residual_dual_at(p, dp).amax() <= STATIONARITY_TOL * scale;
    if !stationary {
        return Certificate::NotCertified;
    }
    match dp.classification {
        Classification::InteriorPlus => Certificate::UniqueGlobal,
        _ if dp.factor.is_psd(PSD_TOL)
            && dp.is_singular()
            && dp.column_residual <= STATIONARITY_TOL * scale =>
        {
            Certificate::MultipleGlobal
        }
        _ => Certificate::NotCertified,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::SparseVec;
    use crate::model::QuadraticMeasure;

    fn example0(f: f64) -> PolynomialProblem {
        let m = QuadraticMeasure::new(1.0, SymMatrix::diagonal(&[1.0]), SparseVec::from_dense(&[-1.0]), -2.0).unwrap();
        PolynomialProblem::new(SymMatrix::diagonal(&[-2.0]), DVector::from_vec(vec![f]), 0.0, vec![m]).unwrap()
    }

    fn v(xs: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(xs)
    }

    #[test]
    fn example0_dual_value_closed_form() {
        // c s - s^2 / (2 alpha) - (f - b s)^2 / (2 (q + a s)) at s = 3: -6 - 4.5 - 0.5
        let p = example0(-2.0);
        assert!((eval_dual(&p, &v(&[3.0])).unwrap() + 11.0).abs() < 1e-12);
        let (x, ok) = recover_x(&p, &v(&[3.0])).unwrap();
        assert!(ok);
        assert!((x[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_sigma_gives_q_and_f() {
        let p = example0(-2.0);
        let dp = dual_point(&p, &v(&[0.0])).unwrap();
        assert_eq!(&dp.g, p.q());
        assert_eq!(&dp.f, p.f());
    }

    #[test]
    fn residual_xs_vanishes_on_measure_block_at_dual_pairs() {
        let p = example0(-2.0);
        let x = v(&[0.7]);
        let sigma = p.duality_map(&p.eval_measure(&x).unwrap()).unwrap();
        let r = residual_xs(&p, &x, &sigma).unwrap();
        assert_eq!(r[1], 0.0);
    }

    #[test]
    fn jacobian_xs_matches_finite_differences() {
        let p = example0(-1.9);
        let z = v(&[0.4, 1.3]);
        let res = |z: &DVector<f64>| residual_xs(&p, &v(&[z[0]]), &v(&[z[1]])).unwrap();
        let fd = crate::numerics::fd_jacobian(res, &z, crate::numerics::default_fd_step()).unwrap();
        let an = jacobian_xs(&p, &v(&[0.4]), &v(&[1.3])).unwrap();
        assert!((fd - an).amax() < 1e-8);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let p = example0(-2.0);
        assert!(dual_point(&p, &v(&[1.0, 2.0])).is_err());
        assert!(residual_xs(&p, &v(&[1.0, 2.0]), &v(&[1.0])).is_err());
    }

    #[test]
    fn example0_is_never_certified_without_perturbation() {
        let p = example0(-2.0);
        for s in [2.5, 3.0, 10.0, 100.0] {
            assert_eq!(classify_solution(&p, &v(&[s])).unwrap(), Certificate::NotCertified);
        }
    }

    #[test]
    fn pure_quadratic_with_singular_q_is_multiple_global() {
        let p = PolynomialProblem::new(SymMatrix::diagonal(&[2.0, 0.0]), v(&[2.0, 0.0]), 0.0, vec![]).unwrap();
        let dp = dual_point(&p, &DVector::zeros(0)).unwrap();
        assert_eq!(dp.classification, Classification::BoundaryPlus);
        assert_eq!(certificate_of(&p, &dp), Certificate::MultipleGlobal);
    }
}
