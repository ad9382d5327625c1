use super::support::{column_norms, detect_support, SupportRule};
use super::CMatrix;
use crate::{Error, Result, C64};

#[derive(Debug, Clone)]
pub struct GroupLassoOptions {
    pub max_iters: usize,
    /// Stop after ten consecutive iterations whose relative objective
    /// decrease is below this. The default only catches a stall at machine
    /// precision: an objective-change test is far too weak to certify the
    /// block optimality conditions.
    pub rel_change_tol: f64,
    /// Stop once every column satisfies its optimality condition to within
    /// `kkt_tol * lambda` (plus a tiny floor relative to `lambda_max`).
    pub kkt_tol: f64,
    pub warm_start: Option<CMatrix>,
    pub support_rule: SupportRule,
}

impl Default for GroupLassoOptions {
    fn default() -> Self {
        GroupLassoOptions {
            max_iters: 50_000,
            rel_change_tol: 1e-15,
            kkt_tol: 1e-6,
            warm_start: None,
            support_rule: SupportRule::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct GroupLassoEstimate {
    pub theta: CMatrix,
    pub support: Vec<usize>,
    pub lambda: f64,
    /// Objective after each accepted iterate, starting with the initial point.
    pub objective_trace: Vec<f64>,
    pub iterations: usize,
    /// Whether the optimality conditions were met on exit.
    pub converged: bool,
    pub nmse: Option<f64>,
}

impl GroupLassoEstimate {
    pub fn objective(&self) -> f64 {
        *self.objective_trace.last().unwrap_or(&f64::NAN)
    }

    /// Fills in [`GroupLassoEstimate::nmse`] against a known truth.
    pub fn with_truth(mut self, truth: &CMatrix) -> Result<Self> {
        self.nmse = Some(super::nmse(&self.theta, truth)?);
        Ok(self)
    }
}

/// Largest column norm of `Y Q^H`; at or above it the estimate is zero.
pub fn lambda_max(y: &CMatrix, q: &CMatrix) -> Result<f64> {
    check_shapes(y, q)?;
    Ok(column_norms(&(y * q.adjoint())).into_iter().fold(0.0, f64::max))
}

/// `c * sd * sqrt(M ln N)`.
pub fn noise_lambda(c: f64, noise_sd: f64, antennas: usize, devices: usize) -> f64 {
    c * noise_sd * (antennas as f64 * (devices.max(2) as f64).ln()).sqrt()
}

fn check_shapes(y: &CMatrix, q: &CMatrix) -> Result<()> {
    if y.ncols() != q.ncols() {
        return Err(Error::DimensionMismatch { context: "pilot length", expected: q.ncols(), found: y.ncols() });
    }
    let finite = |m: &CMatrix| m.iter().all(|c| c.re.is_finite() && c.im.is_finite());
    if !finite(y) || !finite(q) {
        return Err(Error::NonFinite("group lasso input".into()));
    }
    Ok(())
}

struct Problem<'a> {
    y: &'a CMatrix,
    q: &'a CMatrix,
    gram: CMatrix,
    yqh: CMatrix,
    lambda: f64,
}

impl Problem<'_> {
    fn gradient(&self, theta: &CMatrix) -> CMatrix {
        theta * &self.gram - &self.yqh
    }

    fn objective(&self, theta: &CMatrix) -> f64 {
        let fit = (theta * self.q - self.y).norm_squared();
        0.5 * fit + self.lambda * column_norms(theta).iter().sum::<f64>()
    }
}

fn block_soft_threshold(v: &mut CMatrix, tau: f64) {
    for mut col in v.column_iter_mut() {
        let norm = col.norm();
        if norm <= tau {
            col.fill(C64::new(0.0, 0.0));
        } else {
            col *= C64::new(1.0 - tau / norm, 0.0);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KktResiduals {
    /// Largest `||g_n + lambda theta_n / ||theta_n|| ||` over the support.
    pub support: f64,
    /// Largest gradient block norm `||g_n||` off the support.
    pub off_support: f64,
}

/// Block optimality residuals of `theta` for the given support; `g` is the
/// gradient of the smooth part.
pub fn kkt_residuals(y: &CMatrix, q: &CMatrix, theta: &CMatrix, lambda: f64, support: &[usize]) -> Result<KktResiduals> {
    check_shapes(y, q)?;
    let g = (theta * q - y) * q.adjoint();
    let mut out = KktResiduals { support: 0.0, off_support: 0.0 };
    for n in 0..theta.ncols() {
        let gn = g.column(n);
        if support.contains(&n) {
            let t = theta.column(n);
            let norm = t.norm();
            let r = if norm > 0.0 { (gn + t * C64::new(lambda / norm, 0.0)).norm() } else { f64::INFINITY };
            out.support = out.support.max(r);
        } else {
            out.off_support = out.off_support.max(gn.norm());
        }
    }
    Ok(out)
}

/// Largest violation over all columns, zero columns included.
fn optimality_gap(g: &CMatrix, theta: &CMatrix, lambda: f64) -> f64 {
    let mut worst: f64 = 0.0;
    for n in 0..theta.ncols() {
        let t = theta.column(n);
        let norm = t.norm();
        let r = if norm == 0.0 {
            (g.column(n).norm() - lambda).max(0.0)
        } else {
            (g.column(n) + t * C64::new(lambda / norm, 0.0)).norm()
        };
        worst = worst.max(r);
    }
    worst
}

/// Minimizes `1/2 ||Y - Theta Q||_F^2 + lambda sum_n ||theta_n||_2` by
/// accelerated proximal gradient with restart on objective increase.
pub fn group_lasso_solve(y: &CMatrix, q: &CMatrix, lambda: f64, opts: &GroupLassoOptions) -> Result<GroupLassoEstimate> {
    check_shapes(y, q)?;
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::invalid("lambda must be finite and nonnegative"));
    }
    let (m, n) = (y.nrows(), q.nrows());
    let gram = q * q.adjoint();
    let yqh = y * q.adjoint();
    let lmax = column_norms(&yqh).into_iter().fold(0.0, f64::max);
    let prob = Problem { y, q, gram, yqh, lambda };

    let mut x = match &opts.warm_start {
        Some(w) if w.shape() == (m, n) => w.clone(),
        Some(_) => return Err(Error::invalid("warm start has the wrong shape")),
        None => CMatrix::zeros(m, n),
    };
    let finish = |x: CMatrix, trace: Vec<f64>, iterations: usize, converged: bool| -> Result<GroupLassoEstimate> {
        let support = if n == 0 || m == 0 { vec![] } else { detect_support(&x, opts.support_rule)? };
        Ok(GroupLassoEstimate { theta: x, support, lambda, objective_trace: trace, iterations, converged, nmse: None })
    };

    let sigma_max = q.singular_values().iter().cloned().fold(0.0, f64::max);
    let mut fx = prob.objective(&x);
    let mut trace = vec![fx];
    let tol = opts.kkt_tol * lambda + 1e-12 * lmax;
    if sigma_max == 0.0 || optimality_gap(&prob.gradient(&x), &x, lambda) <= tol {
        return finish(x, trace, 0, true);
    }
    let step = 1.0 / (sigma_max * sigma_max);

    let mut yk = x.clone();
    let mut t = 1.0_f64;
    let mut stalled = 0;
    for iter in 1..=opts.max_iters {
        let mut xn = &yk - prob.gradient(&yk) * C64::new(step, 0.0);
        block_soft_threshold(&mut xn, step * lambda);
        let mut fn_ = prob.objective(&xn);
        if fn_ > fx {
            // Restart from the last accepted point with a plain proximal step.
            t = 1.0;
            xn = &x - prob.gradient(&x) * C64::new(step, 0.0);
            block_soft_threshold(&mut xn, step * lambda);
            fn_ = prob.objective(&xn);
            if fn_ > fx {
                xn = x.clone();
                fn_ = fx;
            }
        }
        let tn = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        yk = &xn + (&xn - &x) * C64::new((t - 1.0) / tn, 0.0);
        t = tn;
        let rel = (fx - fn_) / fx.abs().max(f64::MIN_POSITIVE);
        x = xn;
        fx = fn_;
        trace.push(fx);

        stalled = if rel < opts.rel_change_tol { stalled + 1 } else { 0 };
        if iter % 5 == 0 || stalled >= 10 {
            let ok = optimality_gap(&prob.gradient(&x), &x, lambda) <= tol;
            if ok || stalled >= 10 {
                return finish(x, trace, iter, ok);
            }
        }
    }
    let ok = optimality_gap(&prob.gradient(&x), &x, lambda) <= tol;
    finish(x, trace, opts.max_iters, ok)
}

/// Solves along `lambda_max / 2^j` down to `lambda`, warm-starting each stage.
pub fn group_lasso_continuation(y: &CMatrix, q: &CMatrix, lambda: f64, opts: &GroupLassoOptions) -> Result<GroupLassoEstimate> {
    let lmax = lambda_max(y, q)?;
    let mut stage = lmax;
    let mut warm = opts.warm_start.clone();
    loop {
        stage = (stage * 0.5).max(lambda);
        let o = GroupLassoOptions { warm_start: warm.take(), ..opts.clone() };
        let est = group_lasso_solve(y, q, stage, &o)?;
        if stage <= lambda {
            return Ok(est);
        }
        warm = Some(est.theta);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::activity::{generate_instance, DetectionParams};
    use crate::rng::{complex_gaussian_matrix, seeded};

    fn instance(seed: u64) -> (CMatrix, CMatrix, CMatrix) {
        let p = DetectionParams { devices: 12, antennas: 2, active: 3, pilot_length: 8, noise_sd: 0.1 };
        let inst = generate_instance(p, seed).unwrap();
        (inst.observation, inst.pilots, inst.theta)
    }

    #[test]
    fn lambda_max_examples() {
        let q = CMatrix::identity(3, 3);
        assert_eq!(lambda_max(&CMatrix::zeros(2, 3), &q).unwrap(), 0.0);
        let mut y = CMatrix::zeros(2, 3);
        y[(0, 1)] = C64::new(0.0, 3.0);
        assert!((lambda_max(&y, &q).unwrap() - 3.0).abs() < 1e-15);
    }

    #[test]
    fn shutoff_at_lambda_max() {
        let (y, q, _) = instance(1);
        let lmax = lambda_max(&y, &q).unwrap();
        let above = group_lasso_solve(&y, &q, 1.01 * lmax, &Default::default()).unwrap();
        assert!(above.theta.iter().all(|c| *c == C64::new(0.0, 0.0)));
        assert!(above.converged);
        let below = group_lasso_solve(&y, &q, 0.5 * lmax, &Default::default()).unwrap();
        assert!(below.theta.norm() > 0.0);
    }

    #[test]
    fn unregularized_limit_is_least_squares() {
        let mut rng = seeded(3);
        let q = complex_gaussian_matrix(&mut rng, 4, 7, 1.0);
        let y = complex_gaussian_matrix(&mut rng, 2, 7, 1.0);
        let est = group_lasso_solve(&y, &q, 0.0, &Default::default()).unwrap();
        let qqh = &q * q.adjoint();
        let ls = &y * q.adjoint() * qqh.try_inverse().unwrap();
        assert!((&est.theta - &ls).norm() < 1e-8 * ls.norm(), "{}", (&est.theta - &ls).norm());
    }

    #[test]
    fn trace_is_monotone_and_kkt_holds() {
        for seed in 0..5 {
            let (y, q, _) = instance(seed);
            let lambda = 0.2 * lambda_max(&y, &q).unwrap();
            let est = group_lasso_solve(&y, &q, lambda, &Default::default()).unwrap();
            assert!(est.converged, "{} iterations", est.iterations);
            assert!(est.objective_trace.windows(2).all(|w| w[1] <= w[0]));
            let r = kkt_residuals(&y, &q, &est.theta, lambda, &est.support).unwrap();
            assert!(r.support <= 1e-5 * lambda, "{r:?}");
            assert!(r.off_support <= lambda * (1.0 + 1e-5), "{r:?}");
        }
    }

    #[test]
    fn identity_pilots_recover_exactly() {
        let p = DetectionParams { devices: 6, antennas: 3, active: 2, pilot_length: 6, noise_sd: 0.0 };
        let mut inst = generate_instance(p, 8).unwrap();
        inst.pilots = CMatrix::identity(6, 6);
        let y = &inst.theta * &inst.pilots;
        let est = group_lasso_solve(&y, &inst.pilots, 0.0, &Default::default()).unwrap();
        assert!((&est.theta - &inst.theta).norm() <= 1e-8);
    }

    #[test]
    fn continuation_reaches_the_same_point() {
        let (y, q, _) = instance(4);
        let lambda = 0.05 * lambda_max(&y, &q).unwrap();
        let a = group_lasso_solve(&y, &q, lambda, &Default::default()).unwrap();
        let b = group_lasso_continuation(&y, &q, lambda, &Default::default()).unwrap();
        assert!((a.objective() - b.objective()).abs() <= 1e-8 * a.objective());
    }
}
