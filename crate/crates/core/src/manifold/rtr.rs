use super::cost::{riemannian_gradient, HessianOperator, SmoothCost};
use super::geometry::{retract, FixedRankPoint, TangentVector};
use super::trace::{converged, Recorder, SolveTrace, SolverOptions, Termination};
use crate::{Error, Result};

struct Inner {
    eta: TangentVector,
    h_eta: TangentVector,
    on_boundary: bool,
}

/// Steihaug-Toint truncated CG on the quadratic model within radius `delta`.
fn truncated_cg(
    cost: &dyn SmoothCost,
    x: &FixedRankPoint,
    g: &TangentVector,
    delta: f64,
    max_inner: usize,
) -> Result<Inner> {
    let mut eta = TangentVector::zero(x);
    let mut h_eta = TangentVector::zero(x);
    let mut r = g.clone();
    let mut rr = r.inner(&r);
    let r0 = rr.sqrt();
    let stop = r0 * r0.min(0.1);
    let mut dir = r.scale(-1.0);
    let mut hess = HessianOperator::new(cost, x)?;
    for _ in 0..max_inner {
        let h_dir = hess.apply(&dir)?;
        let curv = dir.inner(&h_dir);
        let alpha = rr / curv;
        let next = eta.lincomb(1.0, &dir, alpha);
        if curv <= 0.0 || next.norm() >= delta {
            // Step to the boundary along dir: ||eta + tau dir|| = delta.
            let (ed, dd, ee) = (eta.inner(&dir), dir.inner(&dir), eta.inner(&eta));
            let tau = (-ed + (ed * ed + dd * (delta * delta - ee)).max(0.0).sqrt()) / dd;
            return Ok(Inner {
                eta: eta.lincomb(1.0, &dir, tau),
                h_eta: h_eta.lincomb(1.0, &h_dir, tau),
                on_boundary: true,
            });
        }
        eta = next;
        h_eta = h_eta.lincomb(1.0, &h_dir, alpha);
        r = r.lincomb(1.0, &h_dir, alpha);
        let rr_new = r.inner(&r);
        if rr_new.sqrt() <= stop {
            break;
        }
        dir = r.lincomb(-1.0, &dir, rr_new / rr);
        rr = rr_new;
    }
    Ok(Inner { eta, h_eta, on_boundary: false })
}

/// Riemannian trust-region method with a truncated-CG inner solver.
pub fn rtr_solve(cost: &dyn SmoothCost, x0: &FixedRankPoint, opts: &SolverOptions) -> Result<SolveTrace> {
    let tr = opts.trust_region;
    let mut rec = Recorder::new(opts.record_timing);
    let mut x = x0.clone();
    let mut f = cost.value(&x);
    let mut g = riemannian_gradient(cost, &x)?;
    let mut gn = g.norm();
    let mut delta = tr.initial_radius;
    rec.push(0, f, gn, delta);
    let done = |rec: Recorder, x: FixedRankPoint, termination| {
        Ok(SolveTrace { solver: "rtr", records: rec.records, final_point: x, termination })
    };
    if let Some(t) = converged(opts, f, gn) {
        return done(rec, x, t);
    }

    for iter in 1..=opts.max_iters {
        let inner = truncated_cg(cost, &x, &g, delta, tr.max_inner)?;
        let model_decrease = -(g.inner(&inner.eta) + 0.5 * inner.eta.inner(&inner.h_eta));
        let candidate = match retract(&x, &inner.eta, 1.0) {
            Ok(y) => Some(y),
            Err(Error::RankCollapse { .. }) => None,
            Err(e) => return Err(e),
        };
        let (rho, fy) = match &candidate {
            Some(y) => {
                let fy = cost.value(y);
                let reg = 1e3 * f64::EPSILON * f.abs().max(1.0);
                ((f - fy + reg) / (model_decrease + reg), fy)
            }
            None => (f64::NEG_INFINITY, f64::INFINITY),
        };

        if rho < 0.25 {
            delta *= 0.25;
        } else if rho > 0.75 && inner.on_boundary {
            delta = (2.0 * delta).min(tr.max_radius);
        }
        if rho >= tr.accept_ratio && fy <= f {
            x = candidate.expect("finite ratio implies a retracted point");
            f = fy;
            g = riemannian_gradient(cost, &x)?;
            gn = g.norm();
        }
        rec.push(iter, f, gn, delta);
        if let Some(t) = rec.check(opts) {
            return done(rec, x, t);
        }
        if delta < 1e-14 * tr.initial_radius {
            return done(rec, x, Termination::RadiusCollapse);
        }
    }
    done(rec, x, Termination::MaxIterations)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::{MaskedLeastSquares, QuadraticCost, SmoothCost};
    use crate::rng::{gaussian_matrix, seeded};

    #[test]
    fn quadratic_converges_fast() {
        let mut rng = seeded(4);
        let target = gaussian_matrix(&mut rng, 10, 2) * gaussian_matrix(&mut rng, 2, 9);
        let x0 = FixedRankPoint::from_dense(&(&target + gaussian_matrix(&mut rng, 10, 9) * 0.3), 2).unwrap();
        let opts = SolverOptions { grad_tol: 1e-9, ..Default::default() };
        let trace = rtr_solve(&QuadraticCost { target }, &x0, &opts).unwrap();
        assert_eq!(trace.termination, Termination::GradientTolerance);
        assert!(trace.iterations() <= 15, "{}", trace.iterations());
        assert!(trace.is_monotone());
    }

    #[test]
    fn stationary_start_returns_immediately() {
        let x0 = FixedRankPoint::from_dense(&gaussian_matrix(&mut seeded(5), 4, 4), 1).unwrap();
        let trace = rtr_solve(&QuadraticCost { target: x0.to_dense() }, &x0, &Default::default()).unwrap();
        assert_eq!(trace.iterations(), 0);
    }

    /// Cost without a Euclidean Hessian, to exercise the finite-difference path.
    struct NoHessian(MaskedLeastSquares);

    impl SmoothCost for NoHessian {
        fn shape(&self) -> (usize, usize) {
            self.0.shape()
        }
        fn value(&self, x: &FixedRankPoint) -> f64 {
            self.0.value(x)
        }
        fn euclidean_gradient(&self, x: &FixedRankPoint) -> crate::manifold::AmbientMatrix {
            self.0.euclidean_gradient(x)
        }
    }

    #[test]
    fn finite_difference_hessian_still_converges() {
        let mut rng = seeded(6);
        let truth = gaussian_matrix(&mut rng, 8, 2) * gaussian_matrix(&mut rng, 2, 8);
        let entries = (0..8).flat_map(|i| (0..8).map(move |j| (i, j))).filter(|(i, j)| (i + 2 * j) % 3 != 0);
        let entries: Vec<_> = entries.map(|(i, j)| (i, j, truth[(i, j)])).collect();
        let cost = NoHessian(MaskedLeastSquares::new(8, 8, entries).unwrap());
        let x0 = FixedRankPoint::from_dense(&(&truth + gaussian_matrix(&mut rng, 8, 8) * 0.1), 2).unwrap();
        let opts = SolverOptions { grad_tol: 1e-7, max_iters: 200, ..Default::default() };
        let trace = rtr_solve(&cost, &x0, &opts).unwrap();
        assert_eq!(trace.termination, Termination::GradientTolerance);
        assert!(trace.is_monotone());
    }
}
