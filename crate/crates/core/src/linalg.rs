//! Small dense linear-algebra helpers on top of `nalgebra`.

use nalgebra::{DMatrix, DVector};

use crate::{Error, Result};

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

/// Compact SVD with singular values sorted in decreasing order.
pub struct SortedSvd {
    pub u: DMatrix<f64>,
    pub singular_values: DVector<f64>,
    pub v: DMatrix<f64>,
}

/// Thin SVD computed with `faer`; nalgebra's SVD loses accuracy on some
/// exactly rank-deficient inputs, which are routine here.
pub fn svd_sorted(m: &DMatrix<f64>) -> Result<SortedSvd> {
    let (p, q) = m.shape();
    let k = p.min(q);
    if k == 0 {
        return Ok(SortedSvd { u: DMatrix::zeros(p, 0), singular_values: DVector::zeros(0), v: DMatrix::zeros(q, 0) });
    }
    let svd = faer::Mat::<f64>::from_fn(p, q, |i, j| m[(i, j)])
        .thin_svd()
        .map_err(|e| Error::SolverFailure(format!("SVD did not converge: {e:?}")))?;
    let (u, s, v) = (svd.U(), svd.S().column_vector(), svd.V());
    // faer returns nonincreasing singular values already.
    Ok(SortedSvd {
        u: DMatrix::from_fn(p, k, |i, j| u[(i, j)]),
        singular_values: DVector::from_fn(k, |i, _| s[i]),
        v: DMatrix::from_fn(q, k, |i, j| v[(i, j)]),
    })
}

/// Minimum-norm least-squares solution of `a x = b`, discarding singular
/// values below `rcond` times the largest.
pub fn lstsq(a: &DMatrix<f64>, b: &DVector<f64>, rcond: f64) -> Result<DVector<f64>> {
    let svd = svd_sorted(a)?;
    let cutoff = rcond * svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let mut coeffs = svd.u.transpose() * b;
    for (c, &sv) in coeffs.iter_mut().zip(svd.singular_values.iter()) {
        *c = if sv > cutoff { *c / sv } else { 0.0 };
    }
    Ok(&svd.v * coeffs)
}

/// Number of singular values above `rel_tol * sigma_max`.
pub fn numerical_rank(m: &DMatrix<f64>, rel_tol: f64) -> Result<usize> {
    if m.is_empty() {
        return Ok(0);
    }
    let s = svd_sorted(m)?.singular_values;
    let smax = s.iter().cloned().fold(0.0, f64::max);
    if smax == 0.0 {
        return Ok(0);
    }
    Ok(s.iter().filter(|&&x| x > rel_tol * smax).count())
}

/// Orthonormal basis of the column span via thin QR.
pub fn thin_q(m: &DMatrix<f64>) -> DMatrix<f64> {
    m.clone().qr().q()
}
