//! Sparse symmetric matrices and sparse vectors.
//!
//! The benchmark families carry one measure per coordinate, each with a
//! single-entry `A_k` and `b_k`, so dense storage of every measure is
//! quadratic in memory per measure. Both types keep only nonzero entries and
//! convert to dense `nalgebra` values when a spectral routine needs them.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative asymmetry tolerated (and symmetrized away) on dense input.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Symmetric `n x n` matrix stored as its upper-triangle nonzeros.
///
/// Entries are `(row, col, value)` with `row <= col`, sorted and unique.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    n: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        SymMatrix { n, entries: Vec::new() }
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(&vec![1.0; n])
    }

    pub fn diagonal(values: &[f64]) -> Self {
        Self::from_triplets(values.len(), values.iter().enumerate().map(|(i, &v)| (i, i, v)))
    }

    /// Builds from `(i, j, v)` triplets, each setting `M_ij = M_ji = v`.
    /// Repeated positions (in either orientation) are summed.
    ///
    /// Panics if an index is out of range.
    pub fn from_triplets<I>(n: usize, triplets: I) -> Self
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let mut raw: Vec<(usize, usize, f64)> = triplets
            .into_iter()
            .map(|(i, j, v)| {
                assert!(i < n && j < n, "index ({i}, {j}) out of range for n = {n}");
                if i <= j {
                    (i, j, v)
                } else {
                    (j, i, v)
                }
            })
            .collect();
        raw.sort_by_key(|e| (e.0, e.1));
        let mut entries: Vec<(usize, usize, f64)> = Vec::with_capacity(raw.len());
        for (i, j, v) in raw {
            match entries.last_mut() {
                Some(last) if last.0 == i && last.1 == j => last.2 += v,
                _ => entries.push((i, j, v)),
            }
        }
        entries.retain(|e| e.2 != 0.0);
        SymMatrix { n, entries }
    }

    /// Symmetrizes `(M + M^T) / 2`; rejects asymmetry above
    /// `SYMMETRY_TOL * max(1, max|M_ij|)`.
    pub fn from_dense(m: &DMatrix<f64>) -> Result<Self> {
        let n = m.nrows();
        if m.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, got: m.ncols() });
        }
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("matrix entries"));
        }
        let scale = m.iter().fold(1.0_f64, |acc, v| acc.max(v.abs()));
        let limit = SYMMETRY_TOL * scale;
        let mut asymmetry = 0.0_f64;
        let mut triplets = Vec::new();
        for i in 0..n {
            for j in i..n {
                let (a, b) = (m[(i, j)], m[(j, i)]);
                asymmetry = asymmetry.max((a - b).abs());
                let v = if i == j { a } else { 0.5 * (a + b) };
                if v != 0.0 {
                    triplets.push((i, j, v));
                }
            }
        }
        if asymmetry > limit {
            return Err(Error::Asymmetric { asymmetry, limit });
        }
        Ok(SymMatrix { n, entries: triplets })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Upper-triangle nonzeros `(row, col, value)`, `row <= col`.
    pub fn entries(&self) -> &[(usize, usize, f64)] {
        &self.entries
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let key = if i <= j { (i, j) } else { (j, i) };
        self.entries
            .binary_search_by(|e| (e.0, e.1).cmp(&key))
            .map(|idx| self.entries[idx].2)
            .unwrap_or(0.0)
    }

    pub fn trace(&self) -> f64 {
        self.entries.iter().filter(|e| e.0 == e.1).map(|e| e.2).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0, |acc, e| acc.max(e.2.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.entries.iter().all(|e| e.2.is_finite())
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        self.add_scaled_to(&mut m, 1.0);
        m
    }

    /// `out += scale * self`.
    pub fn add_scaled_to(&self, out: &mut DMatrix<f64>, scale: f64) {
        for &(i, j, v) in &self.entries {
            out[(i, j)] += scale * v;
            if i != j {
                out[(j, i)] += scale * v;
            }
        }
    }

    /// `out += scale * self * x`.
    pub fn mul_add(&self, x: &[f64], scale: f64, out: &mut [f64]) {
        for &(i, j, v) in &self.entries {
            out[i] += scale * v * x[j];
            if i != j {
                out[j] += scale * v * x[i];
            }
        }
    }

    pub fn mul_vec(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.n);
        self.mul_add(x.as_slice(), 1.0, out.as_mut_slice());
        out
    }

    /// `x^T M x`.
    pub fn quad(&self, x: &[f64]) -> f64 {
        self.entries
            .iter()
            .map(|&(i, j, v)| if i == j { v * x[i] * x[i] } else { 2.0 * v * x[i] * x[j] })
            .sum()
    }

    /// `u^T M v`.
    pub fn bilinear(&self, u: &[f64], v: &[f64]) -> f64 {
        self.entries
            .iter()
            .map(|&(i, j, a)| if i == j { a * u[i] * v[i] } else { a * (u[i] * v[j] + u[j] * v[i]) })
            .sum()
    }

    /// `base + sum_k weights[k] * terms[k]`.
    pub fn combination<'a, I>(base: &SymMatrix, terms: I) -> SymMatrix
    where
        I: IntoIterator<Item = (f64, &'a SymMatrix)>,
    {
        let mut triplets: Vec<(usize, usize, f64)> = base.entries.clone();
        for (w, m) in terms {
            debug_assert_eq!(m.n, base.n);
            if w != 0.0 {
                triplets.extend(m.entries.iter().map(|&(i, j, v)| (i, j, w * v)));
            }
        }
        SymMatrix::from_triplets(base.n, triplets)
    }
}

/// Sparse `n`-vector: sorted unique nonzero `(index, value)` pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseVec {
    n: usize,
    entries: Vec<(usize, f64)>,
}

impl SparseVec {
    pub fn zeros(n: usize) -> Self {
        SparseVec { n, entries: Vec::new() }
    }

    pub fn unit(n: usize, index: usize, value: f64) -> Self {
        Self::from_entries(n, [(index, value)])
    }

    /// Panics if an index is out of range. Repeated indices are summed.
    pub fn from_entries<I>(n: usize, entries: I) -> Self
    where
        I: IntoIterator<Item = (usize, f64)>,
    {
        let mut raw: Vec<(usize, f64)> = entries.into_iter().collect();
        for &(i, _) in &raw {
            assert!(i < n, "index {i} out of range for n = {n}");
        }
        raw.sort_by_key(|e| e.0);
        let mut out: Vec<(usize, f64)> = Vec::with_capacity(raw.len());
        for (i, v) in raw {
            match out.last_mut() {
                Some(last) if last.0 == i => last.1 += v,
                _ => out.push((i, v)),
            }
        }
        out.retain(|e| e.1 != 0.0);
        SparseVec { n, entries: out }
    }

    pub fn from_dense(v: &[f64]) -> Self {
        SparseVec {
            n: v.len(),
            entries: v.iter().copied().enumerate().filter(|e| e.1 != 0.0).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn dot(&self, x: &[f64]) -> f64 {
        self.entries.iter().map(|&(i, v)| v * x[i]).sum()
    }

    /// `out += scale * self`.
    pub fn add_scaled_to(&self, out: &mut [f64], scale: f64) {
        for &(i, v) in &self.entries {
            out[i] += scale * v;
        }
    }

    pub fn to_dense(&self) -> DVector<f64> {
        let mut out = DVector::zeros(self.n);
        self.add_scaled_to(out.as_mut_slice(), 1.0);
        out
    }

    pub fn is_finite(&self) -> bool {
        self.entries.iter().all(|e| e.1.is_finite())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triplets_merge_both_orientations() {
        let m = SymMatrix::from_triplets(3, [(0, 1, 1.0), (1, 0, 2.0), (2, 2, 0.0)]);
        assert_eq!(m.entries(), &[(0, 1, 3.0)]);
        assert_eq!(m.get(1, 0), 3.0);
        assert_eq!(m.get(2, 2), 0.0);
    }

    #[test]
    fn dense_round_trip_and_products() {
        let d = DMatrix::from_row_slice(3, 3, &[2.0, -1.0, 0.0, -1.0, 3.0, 0.5, 0.0, 0.5, -4.0]);
        let s = SymMatrix::from_dense(&d).unwrap();
        assert_eq!(s.to_dense(), d);
        let x = DVector::from_vec(vec![0.3, -1.2, 2.0]);
        let dense_mv = &d * &x;
        assert!((s.mul_vec(&x) - dense_mv).norm() < 1e-15);
        let q = x.dot(&(&d * &x));
        assert!((s.quad(x.as_slice()) - q).abs() < 1e-14);
        assert_eq!(s.trace(), 1.0);
    }

    #[test]
    fn small_asymmetry_is_symmetrized_large_is_rejected() {
        let d = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0 + 1e-14, 1.0]);
        let s = SymMatrix::from_dense(&d).unwrap();
        assert_eq!(s.get(0, 1), 0.5 * (2.0 + d[(1, 0)]));
        let bad = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.1, 1.0]);
        assert!(matches!(SymMatrix::from_dense(&bad), Err(Error::Asymmetric { .. })));
    }

    #[test]
    fn combination_matches_dense() {
        let a = SymMatrix::from_triplets(2, [(0, 0, -2.0)]);
        let b = SymMatrix::from_triplets(2, [(0, 1, 1.0), (1, 1, 4.0)]);
        let q = SymMatrix::diagonal(&[2.0, 0.0]);
        let g = SymMatrix::combination(&q, [(0.5, &a), (-1.0, &b)]);
        let expected = q.to_dense() + a.to_dense() * 0.5 - b.to_dense();
        assert_eq!(g.to_dense(), expected);
    }

    #[test]
    fn sparse_vec_ops() {
        let v = SparseVec::from_entries(4, [(2, 1.5), (0, -1.0), (2, 0.5)]);
        assert_eq!(v.entries(), &[(0, -1.0), (2, 2.0)]);
        assert_eq!(v.dot(&[1.0, 9.0, 2.0, 9.0]), 3.0);
        assert_eq!(SparseVec::from_dense(v.to_dense().as_slice()), v);
    }
}
