//! The six test problems in standardized form, with published optima.

use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::matrix::{SparseVec, SymMatrix};
use crate::model::{PolynomialProblem, QuadraticMeasure};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BenchmarkName {
    Example0,
    Colville,
    Zettle,
    StyblinskiTang,
    Rosenbrock,
    DixonPrice,
}

impl BenchmarkName {
    pub const ALL: [BenchmarkName; 6] = [
        BenchmarkName::Example0,
        BenchmarkName::Colville,
        BenchmarkName::Zettle,
        BenchmarkName::StyblinskiTang,
        BenchmarkName::Rosenbrock,
        BenchmarkName::DixonPrice,
    ];

    /// Dimension for the fixed-size problems.
    pub fn fixed_dim(self) -> Option<usize> {
        match self {
            BenchmarkName::Example0 => Some(1),
            BenchmarkName::Colville => Some(4),
            BenchmarkName::Zettle | BenchmarkName::StyblinskiTang => Some(2),
            BenchmarkName::Rosenbrock | BenchmarkName::DixonPrice => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            BenchmarkName::Example0 => "example0",
            BenchmarkName::Colville => "colville",
            BenchmarkName::Zettle => "zettle",
            BenchmarkName::StyblinskiTang => "styblinski-tang",
            BenchmarkName::Rosenbrock => "rosenbrock",
            BenchmarkName::DixonPrice => "dixon-price",
        }
    }
}

impl fmt::Display for BenchmarkName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BenchmarkName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s.chars().filter(|c| c.is_ascii_alphanumeric()).collect::<String>().to_ascii_lowercase();
        Ok(match key.as_str() {
            "example0" | "ex0" => BenchmarkName::Example0,
            "colville" => BenchmarkName::Colville,
            "zettle" => BenchmarkName::Zettle,
            "styblinskitang" | "st" => BenchmarkName::StyblinskiTang,
            "rosenbrock" => BenchmarkName::Rosenbrock,
            "dixonprice" => BenchmarkName::DixonPrice,
            _ => return Err(Error::UnsupportedBenchmark(s.to_string())),
        })
    }
}

/// Scalars of the one-dimensional special case
/// `alpha (a x^2 / 2 + b x + c)^2 / 2 + q x^2 / 2 - x f`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Example0Params {
    pub alpha: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub q: f64,
    pub f: f64,
    /// Linear perturbation; the linear coefficient becomes `f - delta`.
    pub delta: f64,
}

impl Default for Example0Params {
    fn default() -> Self {
        Example0Params { alpha: 1.0, a: 1.0, b: -1.0, c: -2.0, q: -2.0, f: -2.0, delta: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    /// As reported for the benchmark, rounded to four digits.
    Published,
    /// Worked out from the stationarity conditions.
    Derived,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KnownMinimum {
    pub x: DVector<f64>,
    pub value: f64,
    pub provenance: Provenance,
}

#[derive(Debug, Clone)]
pub struct BenchmarkSpec {
    pub name: BenchmarkName,
    pub n: usize,
    pub params: Option<Example0Params>,
    pub known_min: Option<KnownMinimum>,
    pub problem: PolynomialProblem,
}

impl BenchmarkSpec {
    /// Builds a benchmark; `n` is ignored for fixed-size problems.
    pub fn new(name: BenchmarkName, n: usize) -> Result<Self> {
        let problem = build(name, n)?;
        let n = problem.dim();
        let params = (name == BenchmarkName::Example0).then(Example0Params::default);
        Ok(BenchmarkSpec { name, n, params, known_min: known_minimum(name, n).ok(), problem })
    }
}

/// Constructs the named problem.
pub fn build(name: BenchmarkName, n: usize) -> Result<PolynomialProblem> {
    match name {
        BenchmarkName::Example0 => example0(Example0Params::default()),
        BenchmarkName::Colville => colville(),
        BenchmarkName::Zettle => zettle(),
        BenchmarkName::StyblinskiTang => styblinski_tang(),
        BenchmarkName::Rosenbrock => rosenbrock(n),
        BenchmarkName::DixonPrice => dixon_price(n),
    }
}

pub fn example0(p: Example0Params) -> Result<PolynomialProblem> {
    let m = QuadraticMeasure::new(p.alpha, SymMatrix::diagonal(&[p.a]), SparseVec::from_dense(&[p.b]), p.c)?;
    PolynomialProblem::new(SymMatrix::diagonal(&[p.q]), DVector::from_vec(vec![p.f - p.delta]), 0.0, vec![m])
}

pub fn colville() -> Result<PolynomialProblem> {
    let q = SymMatrix::from_triplets(
        4,
        [(0, 0, 2.0), (1, 1, 20.2), (1, 3, 19.8), (2, 2, 2.0), (3, 3, 20.2)],
    );
    let m1 = QuadraticMeasure::new(200.0, SymMatrix::from_triplets(4, [(0, 0, -2.0)]), SparseVec::unit(4, 1, 1.0), 0.0)?;
    let m2 = QuadraticMeasure::new(180.0, SymMatrix::from_triplets(4, [(2, 2, -2.0)]), SparseVec::unit(4, 3, 1.0), 0.0)?;
    PolynomialProblem::new(q, DVector::from_vec(vec![2.0, 40.0, 2.0, 40.0]), 42.0, vec![m1, m2])
}

pub fn zettle() -> Result<PolynomialProblem> {
    let m = QuadraticMeasure::new(2.0, SymMatrix::diagonal(&[2.0, 2.0]), SparseVec::unit(2, 0, -2.0), 0.0)?;
    PolynomialProblem::new(SymMatrix::zeros(2), DVector::from_vec(vec![-0.25, 0.0]), 0.0, vec![m])
}

pub fn styblinski_tang() -> Result<PolynomialProblem> {
    let measures = (0..2)
        .map(|k| QuadraticMeasure::new(1.0, SymMatrix::from_triplets(2, [(k, k, 2.0)]), SparseVec::zeros(2), 0.0))
        .collect::<Result<Vec<_>>>()?;
    PolynomialProblem::new(SymMatrix::diagonal(&[-16.0, -16.0]), DVector::from_vec(vec![-2.5, -2.5]), 0.0, measures)
}

fn check_free_dim(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidDimension(n));
    }
    Ok(())
}

/// `sum_{i<n} 100 (x_{i+1} - x_i^2)^2 + (x_i - 1)^2`.
pub fn rosenbrock(n: usize) -> Result<PolynomialProblem> {
    check_free_dim(n)?;
    let measures = (0..n - 1)
        .map(|k| QuadraticMeasure::new(200.0, SymMatrix::from_triplets(n, [(k, k, -2.0)]), SparseVec::unit(n, k + 1, 1.0), 0.0))
        .collect::<Result<Vec<_>>>()?;
    let mut diag = vec![2.0; n];
    diag[n - 1] = 0.0;
    let f = DVector::from_vec(diag.clone());
    PolynomialProblem::new(SymMatrix::diagonal(&diag), f, (n - 1) as f64, measures)
}

/// `(x_1 - 1)^2 + sum_{i>=2} i (2 x_i^2 - x_{i-1})^2`.
pub fn dixon_price(n: usize) -> Result<PolynomialProblem> {
    check_free_dim(n)?;
    let measures = (0..n - 1)
        .map(|k| {
            let alpha = 2.0 * (k + 2) as f64;
            QuadraticMeasure::new(alpha, SymMatrix::from_triplets(n, [(k + 1, k + 1, 4.0)]), SparseVec::unit(n, k, -1.0), 0.0)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut q = vec![0.0; n];
    q[0] = 2.0;
    let f = DVector::from_vec(q.clone());
    PolynomialProblem::new(SymMatrix::diagonal(&q), f, 1.0, measures)
}

/// Reported (or derived) global minimizer and value.
pub fn known_minimum(name: BenchmarkName, n: usize) -> Result<KnownMinimum> {
    let published = |x: Vec<f64>, value| KnownMinimum { x: DVector::from_vec(x), value, provenance: Provenance::Published };
    match name {
        BenchmarkName::Example0 => Err(Error::UnsupportedBenchmark("example0 has no reported minimum".into())),
        BenchmarkName::Colville => Ok(published(vec![1.0; 4], 0.0)),
        BenchmarkName::Zettle => Ok(published(vec![-0.0299, 0.0], -0.0038)),
        BenchmarkName::StyblinskiTang => Ok(published(vec![-2.9035, -2.9035], -78.3323)),
        BenchmarkName::Rosenbrock => {
            check_free_dim(n)?;
            Ok(published(vec![1.0; n], 0.0))
        }
        BenchmarkName::DixonPrice => {
            check_free_dim(n)?;
            let mut x = vec![1.0_f64; n];
            for i in 1..n {
                x[i] = (x[i - 1] / 2.0).sqrt();
            }
            Ok(KnownMinimum { x: DVector::from_vec(x), value: 0.0, provenance: Provenance::Derived })
        }
    }
}

/// The dual seed used for each benchmark in the reported runs.
pub fn reference_sigma0(name: BenchmarkName, n: usize) -> Result<DVector<f64>> {
    Ok(match name {
        BenchmarkName::Example0 => DVector::from_element(1, 3.0),
        BenchmarkName::Colville => DVector::from_element(2, 0.5),
        BenchmarkName::Zettle => DVector::from_element(1, 0.1),
        BenchmarkName::StyblinskiTang => DVector::from_element(2, 8.1),
        BenchmarkName::Rosenbrock => {
            check_free_dim(n)?;
            DVector::from_element(n - 1, -1.0)
        }
        BenchmarkName::DixonPrice => {
            check_free_dim(n)?;
            DVector::from_element(n - 1, 2.0)
        }
    })
}
