use nalgebra::DMatrix;

use super::complete::{dof, CompletionResult, RankAttempt};
use super::SideInfoMask;
use crate::linalg::svd_sorted;
use crate::Result;

/// Singular values at or below this fraction of the largest are treated as
/// zero when reporting rank.
pub const NUMERICAL_RANK_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NuclearNormOptions {
    /// Proximal step of the splitting.
    pub step: f64,
    pub max_iters: usize,
    /// Stop when the two half-steps agree to this relative Frobenius distance.
    pub tolerance: f64,
}

impl Default for NuclearNormOptions {
    fn default() -> Self {
        NuclearNormOptions { step: 1.0, max_iters: 20_000, tolerance: 1e-9 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NuclearNormStatus {
    Converged,
    MaxIterations,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NuclearNormResult {
    pub completion: CompletionResult,
    pub status: NuclearNormStatus,
    pub iterations: usize,
}

/// Singular-value soft thresholding, the proximal map of `tau ||.||_*`.
pub fn singular_value_threshold(m: &DMatrix<f64>, tau: f64) -> Result<DMatrix<f64>> {
    let svd = svd_sorted(m)?;
    let s = svd.singular_values.map(|x| (x - tau).max(0.0));
    Ok(&svd.u * DMatrix::from_diagonal(&s) * svd.v.transpose())
}

/// Minimizes the nuclear norm over completions of the mask by Douglas-Rachford
/// splitting between singular-value thresholding and re-imposing the fixed
/// entries.
pub fn nuclear_norm_complete(mask: &SideInfoMask, opts: &NuclearNormOptions) -> Result<NuclearNormResult> {
    let k = mask.size();
    // The identity is always a minimizer (the nuclear norm is at least the
    // trace), so start away from it at the imposed all-ones matrix.
    let mut z = DMatrix::from_element(k, k, 1.0);
    mask.impose(&mut z);
    let mut feasible = z.clone();
    let mut status = NuclearNormStatus::MaxIterations;
    let mut iterations = opts.max_iters;
    for it in 1..=opts.max_iters {
        let low_rank = singular_value_threshold(&z, opts.step)?;
        let mut reflected = 2.0 * &low_rank - &z;
        mask.impose(&mut reflected);
        z += &reflected - &low_rank;
        let gap = (&reflected - &low_rank).norm();
        feasible = reflected;
        if gap <= opts.tolerance * low_rank.norm().max(1.0) {
            status = NuclearNormStatus::Converged;
            iterations = it;
            break;
        }
    }
    let rank = crate::linalg::numerical_rank(&feasible, NUMERICAL_RANK_TOL)?.max(1);
    let residual = mask.residual(&feasible);
    let attempt = RankAttempt { rank, restarts_run: 1, successes: 1, errors: 0, best_residual: residual };
    Ok(NuclearNormResult {
        completion: CompletionResult {
            rank,
            matrix: feasible,
            residual,
            dof: dof(rank)?,
            attempts: vec![attempt],
            success: status == NuclearNormStatus::Converged,
            certified_minimal: false,
        },
        status,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tim::{build_mask, NetworkTopology};

    #[test]
    fn full_interference_returns_identity() {
        let mask = build_mask(&NetworkTopology::fully_connected(4).unwrap());
        let res = nuclear_norm_complete(&mask, &NuclearNormOptions::default()).unwrap();
        assert_eq!(res.status, NuclearNormStatus::Converged);
        assert!((&res.completion.matrix - DMatrix::identity(4, 4)).amax() < 1e-9);
        assert_eq!(res.completion.rank, 4);
    }

    #[test]
    fn empty_mask_two_users() {
        let mask = SideInfoMask::new(2, []).unwrap();
        let res = nuclear_norm_complete(&mask, &NuclearNormOptions::default()).unwrap();
        assert_eq!(res.status, NuclearNormStatus::Converged);
        let m = &res.completion.matrix;
        assert_eq!((m[(0, 0)], m[(1, 1)]), (1.0, 1.0));
        assert!(res.completion.rank >= 1 && res.completion.rank <= 2);
    }

    #[test]
    fn iteration_cap_is_reported() {
        let mask = SideInfoMask::random(6, 10, 1).unwrap();
        let opts = NuclearNormOptions { max_iters: 1, ..Default::default() };
        let res = nuclear_norm_complete(&mask, &opts).unwrap();
        assert_eq!(res.status, NuclearNormStatus::MaxIterations);
        assert!(!res.completion.success);
    }

    #[test]
    fn thresholding_shrinks_singular_values() {
        let m = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![3.0, 0.5]));
        let t = singular_value_threshold(&m, 1.0).unwrap();
        assert!((t - DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![2.0, 0.0]))).amax() < 1e-12);
    }
}
