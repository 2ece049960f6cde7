//! Dense linear algebra helpers on top of `nalgebra`.

use nalgebra::{DMatrix, DVector};

use crate::error::{LrscError, Result};

/// Thin SVD `M = U diag(S) V^T` with `r = min(p, n)` components.
///
/// Singular values are sorted nonincreasing. Backed by `faer`, whose SVD
/// stays accurate on rank-deficient input.
#[derive(Clone, Debug)]
pub struct SvdTriple {
    pub u: DMatrix<f64>,
    pub s: DVector<f64>,
    pub v: DMatrix<f64>,
}

impl SvdTriple {
    pub fn compute(m: &DMatrix<f64>) -> Result<SvdTriple> {
        let (p, n) = m.shape();
        if p == 0 || n == 0 {
            return Err(LrscError::InvalidInput(format!("cannot factor a {p}x{n} matrix")));
        }
        if m.iter().any(|x| !x.is_finite()) {
            return Err(LrscError::Numeric("matrix has non-finite entries".into()));
        }
        let svd = to_faer(m)
            .thin_svd()
            .map_err(|e| LrscError::Numeric(format!("SVD failed: {e:?}")))?;
        let (u, d, v) = (svd.U(), svd.S(), svd.V());
        let r = p.min(n);
        // faer already sorts nonincreasing; clamp tiny negative rounding
        let su = DMatrix::from_fn(p, r, |i, j| u[(i, j)]);
        let sv = DMatrix::from_fn(n, r, |i, j| v[(i, j)]);
        let ss = DVector::from_fn(r, |i, _| d[i].max(0.0));
        Ok(SvdTriple { u: su, s: ss, v: sv })
    }

    pub fn rank(&self) -> usize {
        self.s.len()
    }

    /// `U diag(values) V^T`.
    pub fn reconstruct_with(&self, values: &DVector<f64>) -> DMatrix<f64> {
        scaled_outer(&self.u, values, &self.v)
    }

    /// `V diag(weights) V^T`.
    pub fn right_spectral(&self, weights: &DVector<f64>) -> DMatrix<f64> {
        symmetric_spectral(&self.v, weights)
    }

    /// Numerical rank: count of `s_i > max(p, n) eps s_1`.
    pub fn numerical_rank(&self) -> usize {
        let dim = self.u.nrows().max(self.v.nrows()) as f64;
        let top = self.s.get(0).copied().unwrap_or(0.0);
        let tol = dim * f64::EPSILON * top;
        self.s.iter().filter(|&&x| x > tol).count()
    }
}

/// `left diag(values) right^T`, skipping zero weights.
pub fn scaled_outer(left: &DMatrix<f64>, values: &DVector<f64>, right: &DMatrix<f64>) -> DMatrix<f64> {
    let keep: Vec<usize> = (0..values.len()).filter(|&i| values[i] != 0.0).collect();
    if keep.is_empty() {
        return DMatrix::zeros(left.nrows(), right.nrows());
    }
    let mut l = DMatrix::zeros(left.nrows(), keep.len());
    let mut r = DMatrix::zeros(right.nrows(), keep.len());
    for (j, &i) in keep.iter().enumerate() {
        l.set_column(j, &(left.column(i) * values[i]));
        r.set_column(j, &right.column(i));
    }
    l * r.transpose()
}

/// `basis diag(weights) basis^T`, symmetrized to remove rounding asymmetry.
pub fn symmetric_spectral(basis: &DMatrix<f64>, weights: &DVector<f64>) -> DMatrix<f64> {
    let mut c = scaled_outer(basis, weights, basis);
    symmetrize_in_place(&mut c);
    c
}

pub fn symmetrize_in_place(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = avg;
            m[(j, i)] = avg;
        }
    }
}

/// Largest absolute entry; zero for an empty matrix.
pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0f64, |acc, x| acc.max(x.abs()))
}

pub fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.iter().zip(b.iter()).fold(0.0f64, |acc, (x, y)| acc.max((x - y).abs()))
}

pub fn nuclear_norm(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    to_faer(m)
        .singular_values()
        .map(|s| s.iter().sum())
        .unwrap_or(f64::NAN)
}

/// Eigenvalues (nondecreasing) and eigenvectors of a symmetric matrix.
/// Only the lower triangle is read.
pub fn symmetric_eigen(m: &DMatrix<f64>) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let n = m.nrows();
    if !m.is_square() {
        return Err(LrscError::InvalidInput(format!("{}x{} matrix is not square", m.nrows(), m.ncols())));
    }
    let evd = to_faer(m)
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|e| LrscError::Numeric(format!("eigendecomposition failed: {e:?}")))?;
    let (s, u) = (evd.S(), evd.U());
    Ok((DVector::from_fn(n, |i, _| s[i]), DMatrix::from_fn(n, n, |i, j| u[(i, j)])))
}

fn to_faer(m: &DMatrix<f64>) -> faer::Mat<f64> {
    faer::Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}
