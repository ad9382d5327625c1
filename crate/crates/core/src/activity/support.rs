use super::CMatrix;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SupportRule {
    /// Columns with norm above `tau` times the largest column norm.
    Relative(f64),
    /// The `k` largest columns, ties to the smaller index.
    TopK(usize),
}

impl Default for SupportRule {
    fn default() -> Self {
        SupportRule::Relative(1e-3)
    }
}

pub fn column_norms(theta: &CMatrix) -> Vec<f64> {
    theta.column_iter().map(|c| c.norm()).collect()
}

/// Sorted estimated support.
pub fn detect_support(theta: &CMatrix, rule: SupportRule) -> Result<Vec<usize>> {
    if theta.ncols() == 0 || theta.nrows() == 0 {
        return Err(Error::invalid("empty estimate"));
    }
    let norms = column_norms(theta);
    let mut out: Vec<usize> = match rule {
        SupportRule::Relative(tau) => {
            let top = norms.iter().cloned().fold(0.0, f64::max);
            (0..norms.len()).filter(|&n| norms[n] > tau * top && norms[n] > 0.0).collect()
        }
        SupportRule::TopK(k) => {
            let mut idx: Vec<usize> = (0..norms.len()).collect();
            idx.sort_by(|&a, &b| norms[b].total_cmp(&norms[a]).then(a.cmp(&b)));
            idx.truncate(k);
            idx
        }
    };
    out.sort_unstable();
    Ok(out)
}

/// `||estimate - truth||_F^2 / ||truth||_F^2`
pub fn nmse(estimate: &CMatrix, truth: &CMatrix) -> Result<f64> {
    if estimate.shape() != truth.shape() {
        return Err(Error::DimensionMismatch {
            context: "estimate shape",
            expected: truth.nrows() * truth.ncols(),
            found: estimate.nrows() * estimate.ncols(),
        });
    }
    let denom = truth.norm_squared();
    if denom == 0.0 {
        return Err(Error::UndefinedInput("NMSE against an all-zero matrix".into()));
    }
    Ok((estimate - truth).norm_squared() / denom)
}

/// `||estimate - truth||_F / ||truth||_F`
pub fn relative_error(estimate: &CMatrix, truth: &CMatrix) -> Result<f64> {
    nmse(estimate, truth).map(f64::sqrt)
}
