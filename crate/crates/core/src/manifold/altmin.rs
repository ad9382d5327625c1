use nalgebra::{DMatrix, DVector};

use super::cost::{riemannian_gradient, MaskedLeastSquares, SmoothCost};
use super::geometry::FixedRankPoint;
use super::trace::{converged, Recorder, SolveTrace, SolverOptions, Termination};
use crate::linalg::{lstsq, svd_sorted};
use crate::{Error, Result};

/// Singular values below this fraction of the largest are treated as zero
/// in the row subproblems.
const RCOND: f64 = 1e-12;

/// Fixed-rank point for `left * right^T`.
pub fn point_from_factors(left: &DMatrix<f64>, right: &DMatrix<f64>) -> Result<FixedRankPoint> {
    let r = left.ncols();
    let qa = left.clone().qr();
    let qb = right.clone().qr();
    let svd = svd_sorted(&(qa.r() * qb.r().transpose()))?;
    let s = DMatrix::from_diagonal(&svd.singular_values.rows(0, r).into_owned());
    FixedRankPoint::new(qa.q() * svd.u.columns(0, r), s, qb.q() * svd.v.columns(0, r))
}

/// Row-wise least squares for `A` in `sum (A_i . B_j - t_ij)^2`, where
/// `groups[i]` lists `(j, t_ij)`. Each row takes the minimum-norm minimizer
/// from an SVD of the observed rows of `B` (normal equations lose half the
/// digits when a row has few observations). A row is only replaced when its
/// residual does not grow, which rounding on nearly singular rows can cause.
/// Returns the total residual.
fn solve_rows(a: &mut DMatrix<f64>, b: &DMatrix<f64>, groups: &[Vec<(usize, f64)>]) -> Result<f64> {
    let r = b.ncols();
    let mut total = 0.0;
    for (i, obs) in groups.iter().enumerate() {
        if obs.is_empty() {
            continue;
        }
        let sub = DMatrix::from_fn(obs.len(), r, |k, c| b[(obs[k].0, c)]);
        let rhs = DVector::from_iterator(obs.len(), obs.iter().map(|&(_, t)| t));
        let old = (&sub * a.row(i).transpose() - &rhs).norm_squared();
        let sol = lstsq(&sub, &rhs, RCOND)?;
        let new = (&sub * &sol - &rhs).norm_squared();
        if new <= old {
            a.set_row(i, &sol.transpose());
            total += new;
        } else {
            total += old;
        }
    }
    Ok(total)
}

/// Alternating least squares on `M = X Y^T` for a masked objective: each
/// sweep solves exactly for `X` with `Y` fixed, then for `Y`.
pub fn altmin_solve(cost: &MaskedLeastSquares, rank: usize, x0: &FixedRankPoint, opts: &SolverOptions) -> Result<SolveTrace> {
    if rank == 0 {
        return Err(Error::invalid("rank must be at least one"));
    }
    if rank != x0.rank() {
        return Err(Error::invalid(format!("initial point has rank {}, expected {rank}", x0.rank())));
    }
    let (p, q) = cost.shape();
    let mut by_row = vec![Vec::new(); p];
    let mut by_col = vec![Vec::new(); q];
    for &(i, j, t) in cost.entries() {
        by_row[i].push((j, t));
        by_col[j].push((i, t));
    }
    let mut left = x0.u() * x0.core();
    let mut right = x0.v().clone();

    let mut rec = Recorder::new(opts.record_timing);
    let mut x = x0.clone();
    let mut f = cost.value(&x);
    let gn = riemannian_gradient(cost, &x)?.norm();
    rec.push(0, f, gn, 0.0);
    let done = |rec: Recorder, x: FixedRankPoint, termination| {
        Ok(SolveTrace { solver: "altmin", records: rec.records, final_point: x, termination })
    };
    if let Some(t) = converged(opts, f, gn) {
        return done(rec, x, t);
    }
    for iter in 1..=opts.max_iters {
        solve_rows(&mut left, &right, &by_row)?;
        let residual = solve_rows(&mut right, &left, &by_col)?;
        x = match point_from_factors(&left, &right) {
            Ok(x) => x,
            Err(Error::RankCollapse { .. }) => return done(rec, x, Termination::RankCollapse),
            Err(e) => return Err(e),
        };
        f = residual;
        let gn = riemannian_gradient(cost, &x)?.norm();
        rec.push(iter, f, gn, 1.0);
        if let Some(t) = rec.check(opts) {
            return done(rec, x, t);
        }
    }
    done(rec, x, Termination::MaxIterations)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{gaussian_matrix, seeded};

    #[test]
    fn fully_observed_rank_r_fits_in_one_sweep() {
        let mut rng = seeded(7);
        let truth = gaussian_matrix(&mut rng, 7, 2) * gaussian_matrix(&mut rng, 2, 6);
        let entries = (0..7).flat_map(|i| (0..6).map(move |j| (i, j))).map(|(i, j)| (i, j, truth[(i, j)])).collect();
        let cost = MaskedLeastSquares::new(7, 6, entries).unwrap();
        let x0 = FixedRankPoint::from_dense(&gaussian_matrix(&mut rng, 7, 6), 2).unwrap();
        let opts = SolverOptions { max_iters: 1, ..Default::default() };
        let trace = altmin_solve(&cost, 2, &x0, &opts).unwrap();
        assert!(trace.final_objective() < 1e-20, "{}", trace.final_objective());
    }

    #[test]
    fn zero_rank_is_rejected() {
        let cost = MaskedLeastSquares::new(3, 3, vec![(0, 0, 1.0)]).unwrap();
        let x0 = FixedRankPoint::from_dense(&DMatrix::identity(3, 3), 1).unwrap();
        assert!(altmin_solve(&cost, 0, &x0, &Default::default()).is_err());
    }

    #[test]
    fn factors_roundtrip() {
        let mut rng = seeded(8);
        let a = gaussian_matrix(&mut rng, 5, 2);
        let b = gaussian_matrix(&mut rng, 4, 2);
        let x = point_from_factors(&a, &b).unwrap();
        assert!((x.to_dense() - &a * b.transpose()).norm() < 1e-12);
    }
}
