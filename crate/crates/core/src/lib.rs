//! Global minimization of fourth-order polynomials of the form
//! `c0 + sum_k alpha_k xi_k(x)^2 / 2 + x^T Q x / 2 - x^T f`, with each
//! `xi_k` a quadratic measure, by canonical duality.

// `!(a > b)` comparisons route NaN to the failure branch
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod matrix;
pub mod model;
pub mod numerics;
pub mod parallel;
pub mod dual;
pub mod sdp;
pub mod solvers;
pub mod strategies;
pub mod benchmarks;
pub mod cli;

pub use error::{Error, Result};
pub use matrix::{SparseVec, SymMatrix};
pub use model::{PolynomialProblem, PrimalPoint, QuadraticMeasure};
pub use parallel::Execution;
