//! ADMM on the homogeneous self-dual embedding.
//!
//! The iteration works on `u = (x, y, tau)` and `v = (r, s, kappa)` with
//! `v = Q u`, `u in R^n x K* x R+`, `v in {0}^n x K x R+` and
//!
//! ```text
//!     | 0    A^T  c |
//! Q = | -A   0    b |
//!     | -c^T -b^T 0 |
//! ```
//!
//! Each step solves one linear system with `I + Q`, reduced to a cached
//! Cholesky factorization of `I + A^T A`, followed by a projection onto the
//! cone product. When `tau` vanishes the iterates converge to a Farkas-type
//! certificate instead of a solution.

use nalgebra::{Cholesky, DVector, Dyn};

use super::cone::{product_violation, project_product_in_place};
use super::{Cone, SparseMatrix, StandardConicProgram};
use crate::error::check_dim;
use crate::linalg::{dot, norm_inf};
use crate::{Error, Result};

const CHECK_INTERVAL: usize = 5;

#[derive(Debug, Clone)]
pub struct AdmmSettings {
    pub max_iters: usize,
    pub eps_abs: f64,
    pub eps_rel: f64,
    /// Tolerance on the normalized infeasibility certificates.
    pub eps_infeas: f64,
    /// Over-relaxation factor in `(0, 2)`.
    pub relaxation: f64,
    /// Ruiz equilibration of `A` before solving. Off by default.
    pub equilibrate: bool,
}

impl Default for AdmmSettings {
    fn default() -> Self {
        AdmmSettings {
            max_iters: 10_000,
            eps_abs: 1e-6,
            eps_rel: 1e-6,
            eps_infeas: 1e-7,
            relaxation: 1.5,
            equilibrate: false,
        }
    }
}

impl AdmmSettings {
    pub fn with_tolerance(mut self, eps: f64) -> Self {
        self.eps_abs = eps;
        self.eps_rel = eps;
        self
    }

    pub fn with_max_iters(mut self, iters: usize) -> Self {
        self.max_iters = iters;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.relaxation > 0.0 && self.relaxation < 2.0) {
            return Err(Error::invalid("relaxation must lie in (0, 2)"));
        }
        if !(self.eps_abs >= 0.0 && self.eps_rel >= 0.0 && self.eps_infeas > 0.0) {
            return Err(Error::invalid("tolerances must be nonnegative"));
        }
        if self.max_iters == 0 {
            return Err(Error::invalid("max_iters must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    PrimalInfeasible,
    DualInfeasible,
    MaxIterations,
}

/// Solver output.
///
/// For `PrimalInfeasible`, `y` is a certificate with `A^T y ~ 0`, `y in K*`
/// and `b^T y = -1`; `x` and `s` are zero. For `DualInfeasible`, `x` is a
/// certificate with `A x + s ~ 0`, `s in K` and `c^T x = -1`; `y` is zero.
#[derive(Debug, Clone)]
pub struct ConicSolution {
    pub status: SolveStatus,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub s: Vec<f64>,
    /// `||A x + s - b||_inf`
    pub primal_residual: f64,
    /// `||A^T y + c||_inf`
    pub dual_residual: f64,
    /// `|c^T x + b^T y|`
    pub gap: f64,
    pub objective: f64,
    pub iterations: usize,
}

impl ConicSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }
}

/// Initial iterate for a solve.
#[derive(Debug, Clone)]
pub struct WarmStart {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub s: Vec<f64>,
}

#[derive(Debug, Clone)]
struct Scaling {
    row: Vec<f64>,
    col: Vec<f64>,
}

/// A solver bound to one program pattern. The factorization of
/// `I + A^T A` is computed once; [`AdmmSolver::update`] swaps in a re-stuffed
/// program with the same pattern and refreshes only the numeric factors.
pub struct AdmmSolver {
    settings: AdmmSettings,
    original: StandardConicProgram,
    a: SparseMatrix,
    b: Vec<f64>,
    c: Vec<f64>,
    scaling: Option<Scaling>,
    chol: Cholesky<f64, Dyn>,
    g_x: Vec<f64>,
    g_y: Vec<f64>,
    h_dot_g: f64,
}

impl AdmmSolver {
    pub fn new(prog: &StandardConicProgram, settings: AdmmSettings) -> Result<Self> {
        settings.validate()?;
        let (a, b, c, scaling) = scaled_data(prog, settings.equilibrate);
        let (chol, g_x, g_y, h_dot_g) = factor(&a, &b, &c)?;
        Ok(AdmmSolver {
            settings,
            original: prog.clone(),
            a,
            b,
            c,
            scaling,
            chol,
            g_x,
            g_y,
            h_dot_g,
        })
    }

    /// Replaces the program data. The sparsity pattern and cones must match.
    pub fn update(&mut self, prog: &StandardConicProgram) -> Result<()> {
        if !prog.a().same_pattern(self.original.a()) || prog.cones() != self.original.cones() {
            return Err(Error::invalid("update requires the same sparsity pattern and cones"));
        }
        let (a, b, c, scaling) = scaled_data(prog, self.settings.equilibrate);
        let (chol, g_x, g_y, h_dot_g) = factor(&a, &b, &c)?;
        self.original = prog.clone();
        self.a = a;
        self.b = b;
        self.c = c;
        self.scaling = scaling;
        self.chol = chol;
        self.g_x = g_x;
        self.g_y = g_y;
        self.h_dot_g = h_dot_g;
        Ok(())
    }

    pub fn program(&self) -> &StandardConicProgram {
        &self.original
    }

    pub fn solve(&self) -> Result<ConicSolution> {
        self.solve_from(None)
    }

    pub fn solve_from(&self, warm: Option<&WarmStart>) -> Result<ConicSolution> {
        let n = self.c.len();
        let m = self.b.len();
        let cones = self.original.cones();
        let alpha = self.settings.relaxation;

        let mut x = vec![0.0; n];
        let mut y = vec![0.0; m];
        let mut s = vec![0.0; m];
        let mut tau = 1.0;
        let mut kappa = 1.0;
        if let Some(w) = warm {
            check_dim("warm start x", n, w.x.len())?;
            check_dim("warm start y", m, w.y.len())?;
            check_dim("warm start s", m, w.s.len())?;
            x.clone_from(&w.x);
            y.clone_from(&w.y);
            s.clone_from(&w.s);
            if let Some(sc) = &self.scaling {
                x.iter_mut().zip(&sc.col).for_each(|(v, e)| *v /= e);
                y.iter_mut().zip(&sc.row).for_each(|(v, d)| *v /= d);
                s.iter_mut().zip(&sc.row).for_each(|(v, d)| *v *= d);
            }
            kappa = 0.0;
        }

        let mut wy = vec![0.0; m];
        let mut px = vec![0.0; n];
        let mut py = vec![0.0; m];
        let mut ur_y = vec![0.0; m];
        let mut best: Option<(f64, ConicSolution)> = None;

        for iter in 1..=self.settings.max_iters {
            // (I + Q) u~ = u + v
            for i in 0..m {
                wy[i] = y[i] + s[i];
            }
            let w_tau = tau + kappa;
            self.solve_m(&x, &wy, &mut px, &mut py);
            let tau_t = (w_tau + dot(&self.c, &px) + dot(&self.b, &py)) / (1.0 + self.h_dot_g);

            // Relaxed projection step.
            for j in 0..n {
                let ut = px[j] - tau_t * self.g_x[j];
                x[j] = alpha * ut + (1.0 - alpha) * x[j];
            }
            for i in 0..m {
                let ut = py[i] - tau_t * self.g_y[i];
                ur_y[i] = alpha * ut + (1.0 - alpha) * y[i];
            }
            let ur_tau = alpha * tau_t + (1.0 - alpha) * tau;

            let mut y_new: Vec<f64> = ur_y.iter().zip(&s).map(|(u, v)| u - v).collect();
            project_product_in_place(&mut y_new, cones, true);
            let tau_new = (ur_tau - kappa).max(0.0);
            for i in 0..m {
                s[i] += y_new[i] - ur_y[i];
            }
            kappa += tau_new - ur_tau;
            y = y_new;
            tau = tau_new;

            if !(tau.is_finite() && kappa.is_finite()) || x.iter().any(|v| !v.is_finite()) {
                return Err(Error::SolverFailure(format!(
                    "non-finite iterate at iteration {iter} (tau = {tau}, kappa = {kappa})"
                )));
            }

            if iter % CHECK_INTERVAL == 0 || iter == self.settings.max_iters {
                let (xu, yu, su) = self.unscale(&x, &y, &s);
                if let Some(sol) = self.check_infeasible(&xu, &yu, &su, iter) {
                    return Ok(sol);
                }
                if tau > 0.0 {
                    let xs: Vec<f64> = xu.iter().map(|v| v / tau).collect();
                    let ys: Vec<f64> = yu.iter().map(|v| v / tau).collect();
                    let ss: Vec<f64> = su.iter().map(|v| v / tau).collect();
                    let (sol, score) = self.evaluate(xs, ys, ss, iter);
                    if score <= 1.0 {
                        return Ok(sol);
                    }
                    if best.as_ref().is_none_or(|(b, _)| score < *b) {
                        best = Some((score, sol));
                    }
                }
            }
        }

        let mut sol = match best {
            Some((_, sol)) => sol,
            None => {
                let (xu, yu, su) = self.unscale(&x, &y, &s);
                self.evaluate(xu, yu, su, self.settings.max_iters).0
            }
        };
        sol.status = SolveStatus::MaxIterations;
        sol.iterations = self.settings.max_iters;
        Ok(sol)
    }

    /// Solves `[[I, A^T], [-A, I]] (zx, zy) = (a, d)`.
    fn solve_m(&self, a: &[f64], d: &[f64], zx: &mut [f64], zy: &mut [f64]) {
        let n = a.len();
        let mut atd = vec![0.0; n];
        self.a.mul_t_vec(d, &mut atd);
        let rhs = DVector::from_iterator(n, a.iter().zip(&atd).map(|(p, q)| p - q));
        let sol = self.chol.solve(&rhs);
        zx.copy_from_slice(sol.as_slice());
        self.a.mul_vec(zx, zy);
        for (z, dv) in zy.iter_mut().zip(d) {
            *z += dv;
        }
    }

    fn unscale(&self, x: &[f64], y: &[f64], s: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        match &self.scaling {
            None => (x.to_vec(), y.to_vec(), s.to_vec()),
            Some(sc) => (
                x.iter().zip(&sc.col).map(|(v, e)| v * e).collect(),
                y.iter().zip(&sc.row).map(|(v, d)| v * d).collect(),
                s.iter().zip(&sc.row).map(|(v, d)| v / d).collect(),
            ),
        }
    }

    /// Residuals of a candidate solution in original coordinates, and the
    /// largest ratio of residual to its tolerance.
    fn evaluate(&self, x: Vec<f64>, y: Vec<f64>, s: Vec<f64>, iter: usize) -> (ConicSolution, f64) {
        let prog = &self.original;
        let (n, m) = (x.len(), y.len());
        let mut ax = vec![0.0; m];
        prog.a().mul_vec(&x, &mut ax);
        let mut aty = vec![0.0; n];
        prog.a().mul_t_vec(&y, &mut aty);
        let pres: Vec<f64> = (0..m).map(|i| ax[i] + s[i] - prog.b()[i]).collect();
        let dres: Vec<f64> = (0..n).map(|j| aty[j] + prog.c()[j]).collect();
        let cx = dot(prog.c(), &x);
        let by = dot(prog.b(), &y);
        let p = norm_inf(&pres);
        let d = norm_inf(&dres);
        let gap = (cx + by).abs();
        let eps_a = self.settings.eps_abs;
        let eps_r = self.settings.eps_rel;
        let p_tol = eps_a + eps_r * norm_inf(&ax).max(norm_inf(&s)).max(norm_inf(prog.b()));
        let d_tol = eps_a + eps_r * norm_inf(&aty).max(norm_inf(prog.c()));
        let g_tol = eps_a + eps_r * cx.abs().max(by.abs());
        let score = ratio(p, p_tol).max(ratio(d, d_tol)).max(ratio(gap, g_tol));
        let sol = ConicSolution {
            status: SolveStatus::Optimal,
            x,
            y,
            s,
            primal_residual: p,
            dual_residual: d,
            gap,
            objective: cx,
            iterations: iter,
        };
        (sol, score)
    }

    fn check_infeasible(&self, x: &[f64], y: &[f64], s: &[f64], iter: usize) -> Option<ConicSolution> {
        let prog = &self.original;
        let (n, m) = (x.len(), y.len());
        let eps = self.settings.eps_infeas;
        let by = dot(prog.b(), y);
        if by < 0.0 {
            let mut aty = vec![0.0; n];
            prog.a().mul_t_vec(y, &mut aty);
            let cert: Vec<f64> = y.iter().map(|v| v / -by).collect();
            let res = norm_inf(&aty) / -by;
            if res <= eps && product_violation(&cert, prog.cones(), true) <= eps {
                return Some(ConicSolution {
                    status: SolveStatus::PrimalInfeasible,
                    x: vec![0.0; n],
                    y: cert,
                    s: vec![0.0; m],
                    primal_residual: f64::INFINITY,
                    dual_residual: res,
                    gap: f64::INFINITY,
                    objective: f64::INFINITY,
                    iterations: iter,
                });
            }
        }
        let cx = dot(prog.c(), x);
        if cx < 0.0 {
            let mut ax = vec![0.0; m];
            prog.a().mul_vec(x, &mut ax);
            let r: Vec<f64> = (0..m).map(|i| (ax[i] + s[i]) / -cx).collect();
            let res = norm_inf(&r);
            let cert_s: Vec<f64> = s.iter().map(|v| v / -cx).collect();
            if res <= eps && product_violation(&cert_s, prog.cones(), false) <= eps {
                return Some(ConicSolution {
                    status: SolveStatus::DualInfeasible,
                    x: x.iter().map(|v| v / -cx).collect(),
                    y: vec![0.0; m],
                    s: cert_s,
                    primal_residual: res,
                    dual_residual: f64::INFINITY,
                    gap: f64::INFINITY,
                    objective: f64::NEG_INFINITY,
                    iterations: iter,
                });
            }
        }
        None
    }
}

fn ratio(value: f64, tol: f64) -> f64 {
    if tol > 0.0 {
        value / tol
    } else if value == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

type Factors = (Cholesky<f64, Dyn>, Vec<f64>, Vec<f64>, f64);

fn factor(a: &SparseMatrix, b: &[f64], c: &[f64]) -> Result<Factors> {
    let n = c.len();
    let dense = a.to_dense();
    let mut kkt = dense.tr_mul(&dense);
    for j in 0..n {
        kkt[(j, j)] += 1.0;
    }
    let chol = Cholesky::new(kkt)
        .ok_or_else(|| Error::SolverFailure("factorization of I + A^T A failed".into()))?;
    // g = M^{-1} h with h = (c, b)
    let mut atb = vec![0.0; n];
    a.mul_t_vec(b, &mut atb);
    let rhs = DVector::from_iterator(n, c.iter().zip(&atb).map(|(p, q)| p - q));
    let g_x = chol.solve(&rhs).as_slice().to_vec();
    let mut g_y = vec![0.0; b.len()];
    a.mul_vec(&g_x, &mut g_y);
    for (z, bv) in g_y.iter_mut().zip(b) {
        *z += bv;
    }
    let h_dot_g = dot(c, &g_x) + dot(b, &g_y);
    Ok((chol, g_x, g_y, h_dot_g))
}

fn scaled_data(
    prog: &StandardConicProgram,
    equilibrate: bool,
) -> (SparseMatrix, Vec<f64>, Vec<f64>, Option<Scaling>) {
    let mut a = prog.a().clone();
    let mut b = prog.b().to_vec();
    let mut c = prog.c().to_vec();
    if !equilibrate || a.nnz() == 0 {
        return (a, b, c, None);
    }
    let (m, n) = (a.nrows(), a.ncols());
    let mut row = vec![1.0; m];
    let mut col = vec![1.0; n];
    for _ in 0..25 {
        let mut rn = vec![0.0_f64; m];
        let mut cn = vec![0.0_f64; n];
        for (r, cidx, v) in a.triplets() {
            rn[r] = rn[r].max(v.abs());
            cn[cidx] = cn[cidx].max(v.abs());
        }
        // Second-order cone blocks must be scaled uniformly.
        let mut off = 0;
        for cone in prog.cones() {
            let d = cone.dim();
            if let Cone::SecondOrder(_) = cone {
                let mx = rn[off..off + d].iter().cloned().fold(0.0, f64::max);
                rn[off..off + d].iter_mut().for_each(|v| *v = mx);
            }
            off += d;
        }
        let dr: Vec<f64> = rn.iter().map(|&v| if v > 0.0 { 1.0 / v.sqrt() } else { 1.0 }).collect();
        let dc: Vec<f64> = cn.iter().map(|&v| if v > 0.0 { 1.0 / v.sqrt() } else { 1.0 }).collect();
        let dr: Vec<f64> = dr.iter().zip(&row).map(|(f, r)| (f * r).clamp(1e-4, 1e4) / r).collect();
        let dc: Vec<f64> = dc.iter().zip(&col).map(|(f, c)| (f * c).clamp(1e-4, 1e4) / c).collect();
        a.scale(&dr, &dc);
        row.iter_mut().zip(&dr).for_each(|(r, f)| *r *= f);
        col.iter_mut().zip(&dc).for_each(|(c, f)| *c *= f);
    }
    b.iter_mut().zip(&row).for_each(|(v, d)| *v *= d);
    c.iter_mut().zip(&col).for_each(|(v, e)| *v *= e);
    (a, b, c, Some(Scaling { row, col }))
}

/// One-shot solve.
pub fn admm_solve(prog: &StandardConicProgram, settings: &AdmmSettings) -> Result<ConicSolution> {
    AdmmSolver::new(prog, settings.clone())?.solve()
}


#[cfg(test)]
mod tests {
    use super::*;

    fn prog(c: Vec<f64>, rows: usize, trip: &[(usize, usize, f64)], b: Vec<f64>, cones: Vec<Cone>) -> StandardConicProgram {
        let a = SparseMatrix::from_triplets(rows, c.len(), trip).unwrap();
        StandardConicProgram::new(c, a, b, cones).unwrap()
    }

    #[test]
    fn halfline() {
        // min x s.t. x >= 1  ->  s = -1 + x >= 0
        let p = prog(vec![1.0], 1, &[(0, 0, -1.0)], vec![-1.0], vec![Cone::NonNegative(1)]);
        let sol = admm_solve(&p, &AdmmSettings::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!((sol.x[0] - 1.0).abs() < 1e-5, "{:?}", sol.x);
        assert!((sol.objective - 1.0).abs() < 1e-5);
    }

    #[test]
    fn norm_epigraph() {
        // min t s.t. ||(3, 4)|| <= t
        let p = prog(vec![1.0], 3, &[(0, 0, -1.0)], vec![0.0, 3.0, 4.0], vec![Cone::SecondOrder(3)]);
        let sol = admm_solve(&p, &AdmmSettings::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!((sol.x[0] - 5.0).abs() < 1e-5, "{:?}", sol.x);
    }

    #[test]
    fn contradictory_halflines() {
        // x >= 1 and -x >= 0
        let p = prog(vec![0.0], 2, &[(0, 0, -1.0), (1, 0, 1.0)], vec![-1.0, 0.0], vec![Cone::NonNegative(2)]);
        let sol = admm_solve(&p, &AdmmSettings::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::PrimalInfeasible);
        let mut aty = vec![0.0];
        p.a().mul_t_vec(&sol.y, &mut aty);
        assert!(aty[0].abs() < 1e-6);
        assert!((dot(p.b(), &sol.y) + 1.0).abs() < 1e-12);
        assert!(sol.y.iter().all(|&v| v >= -1e-9));
    }

    #[test]
    fn unbounded_below() {
        // min -x s.t. x >= 0
        let p = prog(vec![-1.0], 1, &[(0, 0, -1.0)], vec![0.0], vec![Cone::NonNegative(1)]);
        let sol = admm_solve(&p, &AdmmSettings::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::DualInfeasible);
        assert!((dot(p.c(), &sol.x) + 1.0).abs() < 1e-12);
    }

    #[test]
    fn equilibration_helps_badly_scaled_rows() {
        // x0 >= 1, x1 >= 2, x0 >= |x1|, written with wildly different row scales
        let p = prog(
            vec![1.0, 1.0],
            4,
            &[(0, 0, -100.0), (1, 1, -0.01), (2, 0, -1.0), (3, 1, -1.0)],
            vec![-100.0, -0.02, 0.0, 0.0],
            vec![Cone::NonNegative(2), Cone::SecondOrder(2)],
        );
        let settings = AdmmSettings::default().with_max_iters(50_000);
        let plain = admm_solve(&p, &settings).unwrap();
        let eq = admm_solve(&p, &AdmmSettings { equilibrate: true, ..settings }).unwrap();
        assert!(eq.is_optimal(), "{:?} after {}", eq.status, eq.iterations);
        assert!((eq.objective - 4.0).abs() < 1e-4, "{}", eq.objective);
        assert!(eq.iterations <= plain.iterations);
    }

    #[test]
    fn update_requires_same_pattern() {
        let p = prog(vec![1.0], 1, &[(0, 0, -1.0)], vec![-1.0], vec![Cone::NonNegative(1)]);
        let mut solver = AdmmSolver::new(&p, AdmmSettings::default()).unwrap();
        let p2 = prog(vec![1.0], 1, &[(0, 0, -2.0)], vec![-1.0], vec![Cone::NonNegative(1)]);
        solver.update(&p2).unwrap();
        let sol = solver.solve().unwrap();
        assert!((sol.x[0] - 0.5).abs() < 1e-5);
        let other = prog(vec![1.0], 1, &[], vec![-1.0], vec![Cone::NonNegative(1)]);
        assert!(solver.update(&other).is_err());
    }

    #[test]
    fn warm_start_at_solution_converges_immediately() {
        let p = prog(vec![1.0], 1, &[(0, 0, -1.0)], vec![-1.0], vec![Cone::NonNegative(1)]);
        let solver = AdmmSolver::new(&p, AdmmSettings::default()).unwrap();
        let cold = solver.solve().unwrap();
        let warm = solver
            .solve_from(Some(&WarmStart { x: cold.x.clone(), y: cold.y.clone(), s: cold.s.clone() }))
            .unwrap();
        assert!(warm.is_optimal());
        assert!(warm.iterations <= cold.iterations);
    }
}
