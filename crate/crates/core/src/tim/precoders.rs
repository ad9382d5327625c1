use nalgebra::DMatrix;

use super::nuclear::NUMERICAL_RANK_TOL;
use super::SideInfoMask;
use crate::linalg::{numerical_rank, svd_sorted};
use crate::{Error, Result};

/// Linear scheme over `n` channel uses: receiver `i` projects onto decoder
/// `u_i`, transmitter `j` sends along precoder `v_j`, and `u_i^T v_j` is the
/// `(i, j)` entry of the completed matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct PrecoderDecoderSet {
    /// `n x K`, column `i` is `u_i`.
    pub decoders: DMatrix<f64>,
    /// `n x K`, column `j` is `v_j`.
    pub precoders: DMatrix<f64>,
}

impl PrecoderDecoderSet {
    pub fn channel_uses(&self) -> usize {
        self.decoders.nrows()
    }

    pub fn decoder(&self, i: usize) -> nalgebra::DVectorView<'_, f64> {
        self.decoders.column(i)
    }

    pub fn precoder(&self, j: usize) -> nalgebra::DVectorView<'_, f64> {
        self.precoders.column(j)
    }

    /// Matrix of all `u_i^T v_j`.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        self.decoders.transpose() * &self.precoders
    }

    /// Largest deviation of the scheme from the mask's fixed entries.
    pub fn mask_error(&self, mask: &SideInfoMask) -> f64 {
        mask.max_violation(&self.reconstruct())
    }
}

/// Splits a completed matrix of rank at most `rank` into decoders and
/// precoders of length `rank`, sharing each singular value evenly between
/// the two sides. Each component is signed so its decoder entries sum to a
/// nonnegative number.
pub fn extract_precoders(m: &DMatrix<f64>, rank: usize) -> Result<PrecoderDecoderSet> {
    let k = m.nrows().min(m.ncols());
    if rank == 0 || rank > k {
        return Err(Error::invalid(format!("rank {rank} outside 1..={k}")));
    }
    let actual = numerical_rank(m, NUMERICAL_RANK_TOL)?;
    if actual > rank {
        return Err(Error::invalid(format!("matrix has numerical rank {actual}, more than {rank}")));
    }
    let svd = svd_sorted(m)?;
    let mut decoders = DMatrix::zeros(rank, m.nrows());
    let mut precoders = DMatrix::zeros(rank, m.ncols());
    for c in 0..rank {
        let root = svd.singular_values[c].sqrt();
        let sign = if svd.u.column(c).sum() < 0.0 { -1.0 } else { 1.0 };
        decoders.row_mut(c).copy_from(&(svd.u.column(c).transpose() * (sign * root)));
        precoders.row_mut(c).copy_from(&(svd.v.column(c).transpose() * (sign * root)));
    }
    Ok(PrecoderDecoderSet { decoders, precoders })
}
