//! Dense symmetric linear algebra and finite differences.
//!
//! The spectral routines back the pseudoinverse `G^+` and the PSD tests of the
//! dual kernel. [`SpectralFactor`] applies them to a sparse [`SymMatrix`] by
//! splitting it into independent diagonal blocks first, which keeps the
//! diagonal `G(sigma)` of the large benchmark families linear in `n`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{check_len, Error, Result};
use crate::matrix::SymMatrix;

/// Default PSD tolerance, relative to `max(1, |lambda_max|)`.
pub const PSD_TOL: f64 = 1e-9;

/// Default finite-difference step, `eps^(1/3)`.
pub fn default_fd_step() -> f64 {
    f64::EPSILON.cbrt()
}

/// Eigenvalues in ascending order with matching orthonormal eigenvector columns.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub values: DVector<f64>,
    pub vectors: DMatrix<f64>,
}

impl EigenDecomposition {
    pub fn lambda_min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn lambda_max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    pub fn reconstruct(&self) -> DMatrix<f64> {
        let scaled = DMatrix::from_fn(self.vectors.nrows(), self.vectors.ncols(), |i, j| {
            self.vectors[(i, j)] * self.values[j]
        });
        scaled * self.vectors.transpose()
    }
}

pub fn sym_eig(m: &DMatrix<f64>) -> Result<EigenDecomposition> {
    check_len(m.nrows(), m.ncols())?;
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("sym_eig input"));
    }
    let n = m.nrows();
    if n == 0 {
        return Ok(EigenDecomposition { values: DVector::zeros(0), vectors: DMatrix::zeros(0, 0) });
    }
    let eig = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = DVector::from_iterator(n, order.iter().map(|&k| eig.eigenvalues[k]));
    let vectors = DMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok(EigenDecomposition { values, vectors })
}

/// Rank-revealing cutoff `n * eps * max|lambda|`.
pub fn default_cutoff(n: usize, max_abs_eigenvalue: f64) -> f64 {
    n as f64 * f64::EPSILON * max_abs_eigenvalue
}

#[derive(Debug, Clone)]
pub struct PinvResult {
    pub pinv: DMatrix<f64>,
    pub rank: usize,
    pub cutoff: f64,
}

/// Moore-Penrose pseudoinverse of a symmetric matrix with the default cutoff.
pub fn pinv(m: &DMatrix<f64>) -> Result<PinvResult> {
    pinv_with_cutoff(m, None)
}

/// Eigenvalues with `|lambda| <= cutoff` are treated as zero.
pub fn pinv_with_cutoff(m: &DMatrix<f64>, cutoff: Option<f64>) -> Result<PinvResult> {
    let eig = sym_eig(m)?;
    let n = m.nrows();
    let cutoff = cutoff.unwrap_or_else(|| default_cutoff(n, eig.max_abs()));
    let mut pinv = DMatrix::zeros(n, n);
    let mut rank = 0;
    for (l, &lambda) in eig.values.iter().enumerate() {
        if lambda.abs() <= cutoff {
            continue;
        }
        rank += 1;
        let u = eig.vectors.column(l);
        pinv += (u * u.transpose()) / lambda;
    }
    Ok(PinvResult { pinv, rank, cutoff })
}

fn psd_from_extremes(lambda_min: f64, lambda_max: f64, tol: f64) -> bool {
    lambda_min >= -tol * lambda_max.abs().max(1.0)
}

fn pd_from_extremes(lambda_min: f64, lambda_max: f64, tol: f64) -> bool {
    lambda_min > tol * lambda_max.abs().max(1.0)
}

pub fn is_psd(m: &DMatrix<f64>, tol: f64) -> Result<bool> {
    let eig = sym_eig(m)?;
    if m.nrows() == 0 {
        return Ok(true);
    }
    Ok(psd_from_extremes(eig.lambda_min(), eig.lambda_max(), tol))
}

pub fn is_pd(m: &DMatrix<f64>, tol: f64) -> Result<bool> {
    let eig = sym_eig(m)?;
    if m.nrows() == 0 {
        return Ok(true);
    }
    Ok(pd_from_extremes(eig.lambda_min(), eig.lambda_max(), tol))
}

/// `||(I - M M^+) v|| <= tol * max(1, ||v||)`.
pub fn in_column_space(m: &DMatrix<f64>, v: &DVector<f64>, tol: f64) -> Result<bool> {
    check_len(m.nrows(), v.len())?;
    let p = pinv(m)?;
    let r = v - m * (&p.pinv * v);
    Ok(r.norm() <= tol * v.norm().max(1.0))
}

/// Central-difference gradient with steps `h_i = h (1 + |x_i|)`.
pub fn fd_gradient<F>(f: F, x: &DVector<f64>, h: f64) -> Result<DVector<f64>>
where
    F: Fn(&DVector<f64>) -> f64,
{
    let mut g = DVector::zeros(x.len());
    let mut probe = x.clone();
    for i in 0..x.len() {
        let hi = h * (1.0 + x[i].abs());
        probe[i] = x[i] + hi;
        let up = f(&probe);
        probe[i] = x[i] - hi;
        let down = f(&probe);
        probe[i] = x[i];
        if !up.is_finite() || !down.is_finite() {
            return Err(Error::NonFinite("finite-difference gradient"));
        }
        g[i] = (up - down) / (2.0 * hi);
    }
    Ok(g)
}

/// Central-difference Jacobian; column `j` is `d f / d x_j`.
pub fn fd_jacobian<F>(f: F, x: &DVector<f64>, h: f64) -> Result<DMatrix<f64>>
where
    F: Fn(&DVector<f64>) -> DVector<f64>,
{
    let mut probe = x.clone();
    let mut columns = Vec::with_capacity(x.len());
    for j in 0..x.len() {
        let hj = h * (1.0 + x[j].abs());
        probe[j] = x[j] + hj;
        let up = f(&probe);
        probe[j] = x[j] - hj;
        let down = f(&probe);
        probe[j] = x[j];
        if up.iter().chain(down.iter()).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("finite-difference Jacobian"));
        }
        columns.push((up - down) / (2.0 * hj));
    }
    if columns.is_empty() {
        return Ok(DMatrix::zeros(f(x).len(), 0));
    }
    Ok(DMatrix::from_columns(&columns))
}

#[derive(Debug, Clone)]
struct Block {
    indices: Vec<usize>,
    eig: EigenDecomposition,
}

/// Spectral factorization of a sparse symmetric matrix, computed per
/// connected block of its sparsity graph.
///
/// Eigenvalue cutoffs use the global `n` and `max|lambda|`, so results match
/// a dense factorization of the whole matrix.
#[derive(Debug, Clone)]
pub struct SpectralFactor {
    matrix: SymMatrix,
    blocks: Vec<Block>,
    /// Block index and position inside the block, per coordinate.
    location: Vec<(usize, usize)>,
    cutoff: f64,
    lambda_min: f64,
    lambda_max: f64,
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

impl SpectralFactor {
    pub fn new(matrix: &SymMatrix) -> Result<Self> {
        if !matrix.is_finite() {
            return Err(Error::NonFinite("spectral factor input"));
        }
        let n = matrix.dim();
        let mut parent: Vec<usize> = (0..n).collect();
        for &(i, j, _) in matrix.entries() {
            if i != j {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
        let mut block_of_root = vec![usize::MAX; n];
        let mut members: Vec<Vec<usize>> = Vec::new();
        let mut location = vec![(0, 0); n];
        for (i, loc) in location.iter_mut().enumerate() {
            let r = find(&mut parent, i);
            if block_of_root[r] == usize::MAX {
                block_of_root[r] = members.len();
                members.push(Vec::new());
            }
            let b = block_of_root[r];
            *loc = (b, members[b].len());
            members[b].push(i);
        }
        let mut dense_blocks: Vec<DMatrix<f64>> =
            members.iter().map(|idx| DMatrix::zeros(idx.len(), idx.len())).collect();
        for &(i, j, v) in matrix.entries() {
            let (b, pi) = location[i];
            let (_, pj) = location[j];
            dense_blocks[b][(pi, pj)] = v;
            dense_blocks[b][(pj, pi)] = v;
        }
        let mut blocks = Vec::with_capacity(members.len());
        for (indices, dense) in members.into_iter().zip(dense_blocks) {
            let eig = if indices.len() == 1 {
                EigenDecomposition {
                    values: DVector::from_element(1, dense[(0, 0)]),
                    vectors: DMatrix::identity(1, 1),
                }
            } else {
                sym_eig(&dense)?
            };
            blocks.push(Block { indices, eig });
        }
        let lambda_min = blocks.iter().map(|b| b.eig.lambda_min()).fold(f64::INFINITY, f64::min);
        let lambda_max = blocks.iter().map(|b| b.eig.lambda_max()).fold(f64::NEG_INFINITY, f64::max);
        let max_abs = blocks.iter().map(|b| b.eig.max_abs()).fold(0.0, f64::max);
        Ok(SpectralFactor {
            matrix: matrix.clone(),
            blocks,
            location,
            cutoff: default_cutoff(n, max_abs),
            lambda_min,
            lambda_max,
        })
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &SymMatrix {
        &self.matrix
    }

    /// All eigenvalues, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.blocks.iter().flat_map(|b| b.eig.values.iter().copied()).collect();
        v.sort_by(f64::total_cmp);
        v
    }

    pub fn lambda_min(&self) -> f64 {
        self.lambda_min
    }

    pub fn lambda_max(&self) -> f64 {
        self.lambda_max
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn rank(&self) -> usize {
        self.blocks
            .iter()
            .map(|b| b.eig.values.iter().filter(|l| l.abs() > self.cutoff).count())
            .sum()
    }

    pub fn is_psd(&self, tol: f64) -> bool {
        self.dim() == 0 || psd_from_extremes(self.lambda_min, self.lambda_max, tol)
    }

    pub fn is_pd(&self, tol: f64) -> bool {
        self.dim() == 0 || pd_from_extremes(self.lambda_min, self.lambda_max, tol)
    }

    /// Smallest eigenvalue magnitude is within the PSD tolerance of zero.
    pub fn is_singular(&self, tol: f64) -> bool {
        let scale = self.lambda_max.abs().max(1.0);
        self.blocks
            .iter()
            .flat_map(|b| b.eig.values.iter())
            .any(|l| l.abs() <= tol * scale)
    }

    /// `M^+ v`.
    pub fn pinv_apply(&self, v: &[f64]) -> DVector<f64> {
        let mut out = DVector::zeros(self.dim());
        for b in &self.blocks {
            let local = DVector::from_iterator(b.indices.len(), b.indices.iter().map(|&i| v[i]));
            for (l, &lambda) in b.eig.values.iter().enumerate() {
                if lambda.abs() <= self.cutoff {
                    continue;
                }
                let u = b.eig.vectors.column(l);
                let coef = u.dot(&local) / lambda;
                for (p, &i) in b.indices.iter().enumerate() {
                    out[i] += coef * u[p];
                }
            }
        }
        out
    }

    /// Entry `(i, j)` of `M^+`.
    pub fn pinv_entry(&self, i: usize, j: usize) -> f64 {
        let (bi, pi) = self.location[i];
        let (bj, pj) = self.location[j];
        if bi != bj {
            return 0.0;
        }
        let eig = &self.blocks[bi].eig;
        eig.values
            .iter()
            .enumerate()
            .filter(|(_, l)| l.abs() > self.cutoff)
            .map(|(l, &lambda)| eig.vectors[(pi, l)] * eig.vectors[(pj, l)] / lambda)
            .sum()
    }

    /// `trace(M^+ A)` for a symmetric `A`.
    pub fn trace_pinv_product(&self, a: &SymMatrix) -> f64 {
        a.entries()
            .iter()
            .map(|&(i, j, v)| {
                let w = self.pinv_entry(i, j);
                if i == j {
                    v * w
                } else {
                    2.0 * v * w
                }
            })
            .sum()
    }

    pub fn pinv_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut out = DMatrix::zeros(n, n);
        for b in &self.blocks {
            for (l, &lambda) in b.eig.values.iter().enumerate() {
                if lambda.abs() <= self.cutoff {
                    continue;
                }
                let u = b.eig.vectors.column(l);
                for (p, &i) in b.indices.iter().enumerate() {
                    for (q, &j) in b.indices.iter().enumerate() {
                        out[(i, j)] += u[p] * u[q] / lambda;
                    }
                }
            }
        }
        out
    }

    /// `||v - M M^+ v||`.
    pub fn column_space_residual(&self, v: &[f64]) -> f64 {
        let x = self.pinv_apply(v);
        let mut r: Vec<f64> = v.iter().map(|a| -a).collect();
        self.matrix.mul_add(x.as_slice(), 1.0, &mut r);
        r.iter().map(|a| a * a).sum::<f64>().sqrt()
    }

    /// Natural log of the determinant; `None` unless the matrix is positive definite.
    pub fn log_det(&self) -> Option<f64> {
        if self.dim() > 0 && !(self.lambda_min > 0.0) {
            return None;
        }
        Some(self.blocks.iter().flat_map(|b| b.eig.values.iter()).map(|l| l.ln()).sum())
    }
}
