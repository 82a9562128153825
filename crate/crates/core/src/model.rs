//! The primal problem class
//!
//! `P(x) = c0 + sum_k alpha_k/2 * xi_k(x)^2 + x^T Q x / 2 - x^T f`, with the
//! quadratic measures `xi_k(x) = x^T A_k x / 2 + b_k^T x + c_k`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::matrix::{SparseVec, SymMatrix};
use crate::parallel::{Execution, KERNEL_THRESHOLD};

/// One quadratic measure `xi = x^T A x / 2 + b^T x + c` with weight `alpha > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticMeasure {
    alpha: f64,
    a: SymMatrix,
    b: SparseVec,
    c: f64,
}

impl QuadraticMeasure {
    pub fn new(alpha: f64, a: SymMatrix, b: SparseVec, c: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::NonPositiveAlpha(alpha));
        }
        check_len(a.dim(), b.dim())?;
        if !a.is_finite() || !b.is_finite() || !c.is_finite() {
            return Err(Error::NonFinite("measure coefficients"));
        }
        Ok(QuadraticMeasure { alpha, a, b, c })
    }

    /// Dense constructor; `a` is symmetrized (see [`SymMatrix::from_dense`]).
    pub fn from_dense(alpha: f64, a: &DMatrix<f64>, b: &[f64], c: f64) -> Result<Self> {
        Self::new(alpha, SymMatrix::from_dense(a)?, SparseVec::from_dense(b), c)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn a(&self) -> &SymMatrix {
        &self.a
    }
    pub fn b(&self) -> &SparseVec {
        &self.b
    }
    pub fn c(&self) -> f64 {
        self.c
    }
    pub fn dim(&self) -> usize {
        self.a.dim()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        0.5 * self.a.quad(x) + self.b.dot(x) + self.c
    }

    /// `out += scale * (A x + b)`, the gradient of the measure.
    pub fn add_gradient(&self, x: &[f64], scale: f64, out: &mut [f64]) {
        self.a.mul_add(x, scale, out);
        self.b.add_scaled_to(out, scale);
    }

    pub fn gradient(&self, x: &[f64]) -> DVector<f64> {
        let mut g = DVector::zeros(self.dim());
        self.add_gradient(x, 1.0, g.as_mut_slice());
        g
    }
}

/// The full primal problem: `Q`, `f`, the offset `c0` and the measures.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialProblem {
    n: usize,
    q: SymMatrix,
    f: DVector<f64>,
    c0: f64,
    measures: Vec<QuadraticMeasure>,
}

impl PolynomialProblem {
    pub fn new(q: SymMatrix, f: DVector<f64>, c0: f64, measures: Vec<QuadraticMeasure>) -> Result<Self> {
        let n = q.dim();
        check_len(n, f.len())?;
        for m in &measures {
            check_len(n, m.dim())?;
        }
        if !q.is_finite() || f.iter().any(|v| !v.is_finite()) || !c0.is_finite() {
            return Err(Error::NonFinite("problem coefficients"));
        }
        Ok(PolynomialProblem { n, q, f, c0, measures })
    }

    pub fn dim(&self) -> usize {
        self.n
    }
    /// Number of measures `m`.
    pub fn num_measures(&self) -> usize {
        self.measures.len()
    }
    pub fn q(&self) -> &SymMatrix {
        &self.q
    }
    pub fn f(&self) -> &DVector<f64> {
        &self.f
    }
    pub fn c0(&self) -> f64 {
        self.c0
    }
    pub fn measures(&self) -> &[QuadraticMeasure] {
        &self.measures
    }
    pub fn alphas(&self) -> DVector<f64> {
        DVector::from_iterator(self.measures.len(), self.measures.iter().map(|m| m.alpha))
    }
    pub fn cs(&self) -> DVector<f64> {
        DVector::from_iterator(self.measures.len(), self.measures.iter().map(|m| m.c))
    }

    fn measure_values(&self, x: &[f64]) -> Vec<f64> {
        let m = self.measures.len();
        Execution::for_size(m, KERNEL_THRESHOLD).map(&self.measures, |mk| mk.eval(x))
    }

    /// `Lambda(x)`: the vector of measure values, in measure order.
    pub fn eval_measure(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        check_len(self.n, x.len())?;
        Ok(DVector::from_vec(self.measure_values(x.as_slice())))
    }

    fn quadratic_terms<'a>(&'a self, x: &'a [f64]) -> impl Iterator<Item = f64> + 'a {
        let q = self.q.entries().iter().map(move |&(i, j, v)| {
            if i == j {
                0.5 * v * x[i] * x[i]
            } else {
                v * x[i] * x[j]
            }
        });
        std::iter::once(self.c0).chain(q).chain(x.iter().zip(self.f.iter()).map(|(a, b)| -a * b))
    }

    /// `x^T Q x / 2 - x^T f + c0`.
    pub fn eval_quadratic_part(&self, x: &DVector<f64>) -> Result<f64> {
        check_len(self.n, x.len())?;
        Ok(compensated_sum(self.quadratic_terms(x.as_slice())))
    }

    /// `P(x)`. Terms are summed with compensation: offsets such as
    /// Rosenbrock's `c0 = n - 1` otherwise cancel to a noise floor near the minimum.
    pub fn eval_primal(&self, x: &DVector<f64>) -> Result<f64> {
        let xi = self.eval_measure(x)?;
        let w = self.measures.iter().zip(xi.iter()).map(|(m, v)| 0.5 * m.alpha * v * v);
        Ok(compensated_sum(self.quadratic_terms(x.as_slice()).chain(w)))
    }

    /// `V(xi) = sum_k alpha_k xi_k^2 / 2`.
    pub fn eval_v(&self, xi: &DVector<f64>) -> Result<f64> {
        check_len(self.measures.len(), xi.len())?;
        Ok(self.measures.iter().zip(xi.iter()).map(|(m, v)| 0.5 * m.alpha * v * v).sum())
    }

    /// Legendre conjugate `V*(sigma) = sum_k sigma_k^2 / (2 alpha_k)`.
    pub fn eval_vstar(&self, sigma: &DVector<f64>) -> Result<f64> {
        check_len(self.measures.len(), sigma.len())?;
        Ok(self.measures.iter().zip(sigma.iter()).map(|(m, s)| 0.5 * s * s / m.alpha).sum())
    }

    /// `sigma = alpha ∘ xi`.
    pub fn duality_map(&self, xi: &DVector<f64>) -> Result<DVector<f64>> {
        check_len(self.measures.len(), xi.len())?;
        Ok(DVector::from_iterator(xi.len(), self.measures.iter().zip(xi.iter()).map(|(m, v)| m.alpha * v)))
    }

    /// `xi = sigma / alpha`, the inverse of [`duality_map`](Self::duality_map).
    pub fn inverse_duality_map(&self, sigma: &DVector<f64>) -> Result<DVector<f64>> {
        check_len(self.measures.len(), sigma.len())?;
        Ok(DVector::from_iterator(sigma.len(), self.measures.iter().zip(sigma.iter()).map(|(m, s)| s / m.alpha)))
    }

    /// `grad P(x) = sum_k alpha_k xi_k(x) (A_k x + b_k) + Q x - f`.
    pub fn grad_primal(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        check_len(self.n, x.len())?;
        let xs = x.as_slice();
        let xi = self.measure_values(xs);
        let mut g = -self.f.clone();
        self.q.mul_add(xs, 1.0, g.as_mut_slice());
        for (m, v) in self.measures.iter().zip(xi) {
            m.add_gradient(xs, m.alpha * v, g.as_mut_slice());
        }
        Ok(g)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&ProblemJson::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: ProblemJson = serde_json::from_str(text)?;
        raw.try_into()
    }
}

/// A primal iterate with its cached value and measure vector.
/// Neumaier summation.
fn compensated_sum<I: Iterator<Item = f64>>(terms: I) -> f64 {
    let (mut sum, mut carry) = (0.0_f64, 0.0_f64);
    for t in terms {
        let s = sum + t;
        carry += if sum.abs() >= t.abs() { (sum - s) + t } else { (t - s) + sum };
        sum = s;
    }
    sum + carry
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrimalPoint {
    pub x: DVector<f64>,
    pub value: f64,
    pub xi: DVector<f64>,
}

impl PrimalPoint {
    pub fn new(problem: &PolynomialProblem, x: DVector<f64>) -> Result<Self> {
        let value = problem.eval_primal(&x)?;
        let xi = problem.eval_measure(&x)?;
        Ok(PrimalPoint { x, value, xi })
    }
}

#[derive(Serialize, Deserialize)]
struct MeasureJson {
    alpha: f64,
    #[serde(rename = "A")]
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
    c: f64,
}

/// On-disk problem schema: dense row-major matrices.
#[derive(Serialize, Deserialize)]
struct ProblemJson {
    n: usize,
    #[serde(rename = "Q")]
    q: Vec<Vec<f64>>,
    f: Vec<f64>,
    #[serde(default)]
    c0: f64,
    #[serde(default)]
    measures: Vec<MeasureJson>,
}

fn rows_of(m: &SymMatrix) -> Vec<Vec<f64>> {
    let d = m.to_dense();
    (0..d.nrows()).map(|i| d.row(i).iter().copied().collect()).collect()
}

fn dense_from_rows(n: usize, rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    check_len(n, rows.len())?;
    for r in rows {
        check_len(n, r.len())?;
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

impl From<&PolynomialProblem> for ProblemJson {
    fn from(p: &PolynomialProblem) -> Self {
        ProblemJson {
            n: p.n,
            q: rows_of(&p.q),
            f: p.f.iter().copied().collect(),
            c0: p.c0,
            measures: p
                .measures
                .iter()
                .map(|m| MeasureJson {
                    alpha: m.alpha,
                    a: rows_of(&m.a),
                    b: m.b.to_dense().iter().copied().collect(),
                    c: m.c,
                })
                .collect(),
        }
    }
}

impl TryFrom<ProblemJson> for PolynomialProblem {
    type Error = Error;

    fn try_from(raw: ProblemJson) -> Result<Self> {
        let n = raw.n;
        let q = SymMatrix::from_dense(&dense_from_rows(n, &raw.q)?)?;
        check_len(n, raw.f.len())?;
        let measures = raw
            .measures
            .iter()
            .map(|m| {
                check_len(n, m.b.len())?;
                QuadraticMeasure::from_dense(m.alpha, &dense_from_rows(n, &m.a)?, &m.b, m.c)
            })
            .collect::<Result<Vec<_>>>()?;
        PolynomialProblem::new(q, DVector::from_vec(raw.f), raw.c0, measures)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_problem(alpha: f64) -> PolynomialProblem {
        let m = QuadraticMeasure::new(alpha, SymMatrix::diagonal(&[1.0]), SparseVec::from_dense(&[-1.0]), -2.0).unwrap();
        PolynomialProblem::new(SymMatrix::diagonal(&[-2.0]), DVector::from_vec(vec![-2.0]), 0.0, vec![m]).unwrap()
    }

    #[test]
    fn empty_problem_is_zero() {
        let p = PolynomialProblem::new(SymMatrix::zeros(3), DVector::zeros(3), 0.0, vec![]).unwrap();
        let x = DVector::from_vec(vec![1.0, -2.0, 3.0]);
        assert_eq!(p.eval_primal(&x).unwrap(), 0.0);
        assert_eq!(p.grad_primal(&x).unwrap(), DVector::zeros(3));
    }

    #[test]
    fn pure_quadratic_gradient() {
        let q = SymMatrix::from_triplets(2, [(0, 0, 2.0), (0, 1, 1.0), (1, 1, 3.0)]);
        let f = DVector::from_vec(vec![1.0, -1.0]);
        let p = PolynomialProblem::new(q.clone(), f.clone(), 0.0, vec![]).unwrap();
        let x = DVector::from_vec(vec![0.5, 2.0]);
        assert_eq!(p.grad_primal(&x).unwrap(), q.mul_vec(&x) - f);
    }

    #[test]
    fn v_and_vstar_closed_form() {
        let p = scalar_problem(2.0);
        assert_eq!(p.eval_v(&DVector::from_vec(vec![3.0])).unwrap(), 9.0);
        assert_eq!(p.eval_vstar(&DVector::from_vec(vec![3.0])).unwrap(), 2.25);
        assert_eq!(p.eval_v(&DVector::zeros(1)).unwrap(), 0.0);
        assert_eq!(p.eval_vstar(&DVector::zeros(1)).unwrap(), 0.0);
    }

    #[test]
    fn duality_map_is_elementwise() {
        let a = SymMatrix::zeros(1);
        let ms = vec![
            QuadraticMeasure::new(200.0, a.clone(), SparseVec::zeros(1), 0.0).unwrap(),
            QuadraticMeasure::new(180.0, a.clone(), SparseVec::zeros(1), 0.0).unwrap(),
        ];
        let p = PolynomialProblem::new(a, DVector::zeros(1), 0.0, ms).unwrap();
        let s = p.duality_map(&DVector::from_vec(vec![1.0, 2.0])).unwrap();
        assert_eq!(s.as_slice(), &[200.0, 360.0]);
        assert_eq!(p.inverse_duality_map(&s).unwrap().as_slice(), &[1.0, 2.0]);
        assert_eq!(p.duality_map(&DVector::zeros(2)).unwrap(), DVector::zeros(2));
    }

    #[test]
    fn dimension_errors() {
        let p = scalar_problem(1.0);
        let bad = DVector::zeros(2);
        assert!(matches!(p.eval_primal(&bad), Err(Error::DimensionMismatch { expected: 1, got: 2 })));
        assert!(p.eval_measure(&bad).is_err());
        assert!(p.grad_primal(&bad).is_err());
        assert!(p.eval_v(&bad).is_err());
        assert!(p.eval_vstar(&bad).is_err());
        assert!(p.duality_map(&bad).is_err());
    }

    #[test]
    fn rejects_nonpositive_alpha() {
        let r = QuadraticMeasure::new(0.0, SymMatrix::zeros(1), SparseVec::zeros(1), 0.0);
        assert!(matches!(r, Err(Error::NonPositiveAlpha(_))));
        assert!(QuadraticMeasure::new(-1.0, SymMatrix::zeros(1), SparseVec::zeros(1), 0.0).is_err());
    }

    #[test]
    fn json_round_trip_is_exact() {
        let p = scalar_problem(1.5);
        let back = PolynomialProblem::from_json(&p.to_json().unwrap()).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn json_rejects_ragged_matrices() {
        let text = r#"{"n":2,"Q":[[1,0],[0]],"f":[0,0],"c0":0,"measures":[]}"#;
        assert!(PolynomialProblem::from_json(text).is_err());
    }
}
