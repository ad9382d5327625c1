use super::cost::{riemannian_gradient, SmoothCost};
use super::geometry::{retract, transport, FixedRankPoint};
use super::trace::{converged, Recorder, SolveTrace, SolverOptions, Termination};
use crate::{Error, Result};

/// Riemannian conjugate gradient with Polak-Ribiere+ updates, transport by
/// projection, and Armijo backtracking.
pub fn rcg_solve(cost: &dyn SmoothCost, x0: &FixedRankPoint, opts: &SolverOptions) -> Result<SolveTrace> {
    let ls = opts.line_search;
    let mut rec = Recorder::new(opts.record_timing);
    let mut x = x0.clone();
    let mut f = cost.value(&x);
    let mut g = riemannian_gradient(cost, &x)?;
    let mut gn = g.norm();
    rec.push(0, f, gn, 0.0);
    let done = |rec: Recorder, x: FixedRankPoint, termination| {
        Ok(SolveTrace { solver: "rcg", records: rec.records, final_point: x, termination })
    };
    if let Some(t) = converged(opts, f, gn) {
        return done(rec, x, t);
    }

    let mut d = g.scale(-1.0);
    let mut alpha0 = ls.initial_step;
    for iter in 1..=opts.max_iters {
        let mut slope = g.inner(&d);
        if slope >= 0.0 {
            d = g.scale(-1.0);
            slope = -gn * gn;
        }
        let mut alpha = alpha0;
        let mut accepted = None;
        let mut collapsed = false;
        for _ in 0..=ls.max_backtracks {
            match retract(&x, &d, alpha) {
                Ok(y) => {
                    let fy = cost.value(&y);
                    if fy <= f + ls.c1 * alpha * slope {
                        accepted = Some((y, fy));
                        break;
                    }
                }
                Err(Error::RankCollapse { .. }) => collapsed = true,
                Err(e) => return Err(e),
            }
            alpha *= ls.backtrack;
        }
        let Some((y, fy)) = accepted else {
            let t = if collapsed { Termination::RankCollapse } else { Termination::LineSearchFailure };
            return done(rec, x, t);
        };

        let g_new = riemannian_gradient(cost, &y)?;
        let g_old = transport(&x, &y, &g)?;
        let d_old = transport(&x, &y, &d)?;
        let beta = (g_new.inner(&g_new.lincomb(1.0, &g_old, -1.0)) / (gn * gn)).max(0.0);
        d = g_new.lincomb(-1.0, &d_old, beta);
        x = y;
        f = fy;
        g = g_new;
        gn = g.norm();
        alpha0 = 2.0 * alpha;
        rec.push(iter, f, gn, alpha);
        if let Some(t) = rec.check(opts) {
            return done(rec, x, t);
        }
    }
    done(rec, x, Termination::MaxIterations)
}
