use nalgebra::DMatrix;

use super::cost::{MaskedLeastSquares, SmoothCost};
use super::geometry::FixedRankPoint;
use crate::rng::{gaussian_matrix, seeded};
use crate::Result;

/// Rank-`r` truncated SVD of the observed entries (zeros elsewhere) plus
/// i.i.d. Gaussian noise of standard deviation `perturbation`.
pub fn masked_svd_init(cost: &MaskedLeastSquares, rank: usize, perturbation: f64, seed: u64) -> Result<FixedRankPoint> {
    let (p, q) = cost.shape();
    let mut dense: DMatrix<f64> = gaussian_matrix(&mut seeded(seed), p, q) * perturbation;
    for &(i, j, t) in cost.entries() {
        dense[(i, j)] += t;
    }
    FixedRankPoint::from_dense(&dense, rank)
}
