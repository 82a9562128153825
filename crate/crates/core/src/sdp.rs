//! SDP form of the dual maximization and its SDPA export.
//!
//! Variables are ordered `(sigma_1, ..., sigma_m, t1, t2)`. The problem is
//!
//! ```text
//! min  t1/2 + t2/2 - c^T sigma
//! s.t. [[G(sigma), F(sigma)], [F(sigma)^T, t1]]  >= 0
//!      [[diag(alpha), sigma], [sigma^T, t2]]     >= 0
//! ```
//!
//! The second block's Schur complement is `t2 - sigma^T diag(alpha)^{-1} sigma`,
//! which is the `V*` term of the dual, so the optimal value equals
//! `c0 - max P^d`.

use std::io::Write;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::matrix::SymMatrix;
use crate::model::PolynomialProblem;
use crate::numerics::{is_pd, is_psd, PSD_TOL};

/// `M(v) = constant + sum_i v_i * coefficients[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffinePencil {
    pub constant: SymMatrix,
    pub coefficients: Vec<SymMatrix>,
}

impl AffinePencil {
    pub fn size(&self) -> usize {
        self.constant.dim()
    }

    pub fn eval(&self, vars: &[f64]) -> DMatrix<f64> {
        let mut out = self.constant.to_dense();
        for (c, &v) in self.coefficients.iter().zip(vars) {
            c.add_scaled_to(&mut out, v);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SdpInstance {
    /// Number of dual variables `m`; the SDP has `m + 2` variables.
    pub num_sigma: usize,
    /// Linear objective over `(sigma, t1, t2)`.
    pub objective: DVector<f64>,
    /// Constant `c0` carried by the primal; not part of the SDP objective.
    pub offset: f64,
    pub block1: AffinePencil,
    pub block2: AffinePencil,
}

pub fn build_sdp(p: &PolynomialProblem) -> SdpInstance {
    let (n, m) = (p.dim(), p.num_measures());
    let nv = m + 2;

    let mut constant1: Vec<(usize, usize, f64)> = p.q().entries().to_vec();
    constant1.extend(p.f().iter().enumerate().map(|(i, &v)| (i, n, v)));
    let mut coeffs1: Vec<SymMatrix> = p
        .measures()
        .iter()
        .map(|mk| {
            let mut t: Vec<(usize, usize, f64)> = mk.a().entries().to_vec();
            t.extend(mk.b().entries().iter().map(|&(i, v)| (i, n, -v)));
            SymMatrix::from_triplets(n + 1, t)
        })
        .collect();
    coeffs1.push(SymMatrix::from_triplets(n + 1, [(n, n, 1.0)]));
    coeffs1.push(SymMatrix::zeros(n + 1));

    let constant2 = SymMatrix::from_triplets(m + 1, p.measures().iter().enumerate().map(|(k, mk)| (k, k, mk.alpha())));
    let mut coeffs2: Vec<SymMatrix> = (0..m).map(|k| SymMatrix::from_triplets(m + 1, [(k, m, 1.0)])).collect();
    coeffs2.push(SymMatrix::zeros(m + 1));
    coeffs2.push(SymMatrix::from_triplets(m + 1, [(m, m, 1.0)]));

    let mut objective = DVector::zeros(nv);
    for (k, mk) in p.measures().iter().enumerate() {
        objective[k] = -mk.c();
    }
    objective[m] = 0.5;
    objective[m + 1] = 0.5;

    SdpInstance {
        num_sigma: m,
        objective,
        offset: p.c0(),
        block1: AffinePencil { constant: SymMatrix::from_triplets(n + 1, constant1), coefficients: coeffs1 },
        block2: AffinePencil { constant: constant2, coefficients: coeffs2 },
    }
}

impl SdpInstance {
    fn vars(&self, sigma: &DVector<f64>, t1: f64, t2: f64) -> Vec<f64> {
        let mut v: Vec<f64> = sigma.iter().copied().collect();
        v.push(t1);
        v.push(t2);
        v
    }

    pub fn eval_blocks(&self, sigma: &DVector<f64>, t1: f64, t2: f64) -> (DMatrix<f64>, DMatrix<f64>) {
        let v = self.vars(sigma, t1, t2);
        (self.block1.eval(&v), self.block2.eval(&v))
    }

    pub fn objective_value(&self, sigma: &DVector<f64>, t1: f64, t2: f64) -> f64 {
        self.objective.dot(&DVector::from_vec(self.vars(sigma, t1, t2)))
    }

    pub fn is_feasible(&self, sigma: &DVector<f64>, t1: f64, t2: f64) -> bool {
        let (b1, b2) = self.eval_blocks(sigma, t1, t2);
        schur_psd(&b1) && schur_psd(&b2)
    }

    /// Sparse SDPA text. `F_0` is the negated constant since SDPA constrains
    /// `sum_i F_i x_i - F_0 >= 0`.
    pub fn write_sdpa<W: Write + ?Sized>(&self, out: &mut W) -> Result<()> {
        let nv = self.num_sigma + 2;
        writeln!(out, "\"canonical dual SDP: vars sigma_1..sigma_{}, t1, t2\"", self.num_sigma)?;
        writeln!(out, "* offset {:.16e}", self.offset)?;
        writeln!(out, "{nv}")?;
        writeln!(out, "2")?;
        writeln!(out, "{} {}", self.block1.size(), self.block2.size())?;
        let obj: Vec<String> = self.objective.iter().map(|v| format!("{v:.16e}")).collect();
        writeln!(out, "{}", obj.join(" "))?;
        let blocks = [&self.block1, &self.block2];
        for matno in 0..=nv {
            for (b, pencil) in blocks.iter().enumerate() {
                let (mat, sign) = if matno == 0 {
                    (&pencil.constant, -1.0)
                } else {
                    (&pencil.coefficients[matno - 1], 1.0)
                };
                for &(i, j, v) in mat.entries() {
                    writeln!(out, "{} {} {} {} {:.16e}", matno, b + 1, i + 1, j + 1, sign * v)?;
                }
            }
        }
        Ok(())
    }

    pub fn to_sdpa_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_sdpa(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("SDPA output is ASCII")
    }
}

pub fn export_sdpa<W: Write + ?Sized>(inst: &SdpInstance, sink: &mut W) -> Result<()> {
    inst.write_sdpa(sink)
}

fn parse_err(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}

/// Reads back a two-block file written by [`export_sdpa`].
pub fn parse_sdpa(text: &str) -> Result<SdpInstance> {
    let mut offset = 0.0;
    let mut body: Vec<&str> = Vec::new();
    for line in text.lines() {
        let t = line.trim();
        if t.is_empty() || t.starts_with('"') {
            continue;
        }
        if let Some(rest) = t.strip_prefix('*') {
            if let Some(v) = rest.trim().strip_prefix("offset") {
                offset = v.trim().parse().map_err(|_| parse_err("bad offset comment"))?;
            }
            continue;
        }
        body.push(t);
    }
    let mut it = body.into_iter();
    let mut next = |what: &str| it.next().ok_or_else(|| parse_err(format!("missing {what}")));
    let num = |s: &str| -> Result<f64> { s.parse::<f64>().map_err(|_| parse_err(format!("bad number '{s}'"))) };
    let int = |s: &str| -> Result<usize> { s.parse::<usize>().map_err(|_| parse_err(format!("bad integer '{s}'"))) };

    let nv = int(next("variable count")?)?;
    if nv < 2 {
        return Err(parse_err("need at least t1 and t2"));
    }
    if int(next("block count")?)? != 2 {
        return Err(parse_err("expected two blocks"));
    }
    let sizes: Vec<usize> = next("block structure")?.split_whitespace().map(int).collect::<Result<_>>()?;
    if sizes.len() != 2 {
        return Err(parse_err("block structure must list two sizes"));
    }
    let objective: Vec<f64> = next("objective")?.split_whitespace().map(num).collect::<Result<_>>()?;
    if objective.len() != nv {
        return Err(parse_err("objective length differs from variable count"));
    }
    let mut triplets: Vec<[Vec<(usize, usize, f64)>; 2]> = (0..=nv).map(|_| [Vec::new(), Vec::new()]).collect();
    for line in it {
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.len() != 5 {
            return Err(parse_err(format!("bad entry line '{line}'")));
        }
        let (matno, blk, i, j) = (int(parts[0])?, int(parts[1])?, int(parts[2])?, int(parts[3])?);
        let v = num(parts[4])?;
        if matno > nv || blk == 0 || blk > 2 || i == 0 || j == 0 || i > sizes[blk - 1] || j > sizes[blk - 1] {
            return Err(parse_err(format!("entry out of range '{line}'")));
        }
        let v = if matno == 0 { -v } else { v };
        triplets[matno][blk - 1].push((i - 1, j - 1, v));
    }
    let mut mats: Vec<[SymMatrix; 2]> = triplets
        .into_iter()
        .map(|[a, b]| [SymMatrix::from_triplets(sizes[0], a), SymMatrix::from_triplets(sizes[1], b)])
        .collect();
    let coeffs: Vec<[SymMatrix; 2]> = mats.split_off(1);
    let [c1, c2] = mats.pop().expect("constant matrices present");
    let (co1, co2): (Vec<SymMatrix>, Vec<SymMatrix>) = coeffs.into_iter().map(|[a, b]| (a, b)).unzip();
    Ok(SdpInstance {
        num_sigma: nv - 2,
        objective: DVector::from_vec(objective),
        offset,
        block1: AffinePencil { constant: c1, coefficients: co1 },
        block2: AffinePencil { constant: c2, coefficients: co2 },
    })
}

/// PSD test of `[[A, B], [B^T, C]]` with a scalar corner `C`.
///
/// Uses the Schur complement `C - B^T A^{-1} B` when `A > 0`, otherwise a
/// direct eigenvalue test of the whole block.
pub fn schur_psd(block: &DMatrix<f64>) -> bool {
    let k = block.nrows();
    if k == 0 {
        return true;
    }
    let a = block.view((0, 0), (k - 1, k - 1)).into_owned();
    let b = block.view((0, k - 1), (k - 1, 1)).into_owned();
    let c = block[(k - 1, k - 1)];
    if k > 1 && is_pd(&a, PSD_TOL).unwrap_or(false) {
        if let Some(chol) = a.clone().cholesky() {
            let schur = c - (b.transpose() * chol.solve(&b))[(0, 0)];
            return schur >= -PSD_TOL * c.abs().max(1.0);
        }
    }
    if k == 1 {
        return c >= -PSD_TOL;
    }
    is_psd(block, PSD_TOL).unwrap_or(false)
}
