use super::support::{column_norms, detect_support, SupportRule};
use super::{CMatrix, GroupLassoEstimate};
use crate::conic::{embed_complex, AdmmSettings, AdmmSolver, AffineExpr, ComplexConstraint, ComplexSocp, RealForm, SolveStatus};
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct BasisPursuitOptions {
    pub admm: AdmmSettings,
    /// After the conic solve, re-fit by least squares on the columns above
    /// this relative norm and keep the result if it is feasible and no worse.
    pub polish_threshold: Option<f64>,
    /// Relative residual `||Theta Q - Y|| / ||Y||` a polished point may have.
    pub polish_residual: f64,
    pub support_rule: SupportRule,
}

impl Default for BasisPursuitOptions {
    fn default() -> Self {
        BasisPursuitOptions {
            admm: AdmmSettings::default().with_tolerance(1e-7).with_max_iters(20_000),
            polish_threshold: Some(1e-3),
            polish_residual: 1e-10,
            support_rule: SupportRule::default(),
        }
    }
}

/// Minimizes `sum_n ||theta_n||_2` subject to `Theta Q = Y` with the conic
/// ADMM solver: one second-order cone per column and zero-cone rows for
/// the equalities.
pub fn basis_pursuit_group(y: &CMatrix, q: &CMatrix, opts: &BasisPursuitOptions) -> Result<GroupLassoEstimate> {
    if y.ncols() != q.ncols() {
        return Err(Error::DimensionMismatch { context: "pilot length", expected: q.ncols(), found: y.ncols() });
    }
    let (m, n, l) = (y.nrows(), q.nrows(), q.ncols());
    let var = |row: usize, col: usize| col * m + row;

    let mut constraints = Vec::with_capacity(m * l + n);
    for row in 0..m {
        for j in 0..l {
            constraints.push(ComplexConstraint::Equal(AffineExpr {
                complex: (0..n).map(|col| (var(row, col), q[(col, j)])).collect(),
                real: vec![],
                constant: -y[(row, j)],
            }));
        }
    }
    for col in 0..n {
        constraints.push(ComplexConstraint::SecondOrder {
            bound: RealForm::real_var(col),
            entries: (0..m).map(|row| AffineExpr::var(var(row, col))).collect(),
        });
    }
    let objective = RealForm { real: (0..n).map(|col| (col, 1.0)).collect(), ..Default::default() };
    let socp = ComplexSocp { num_complex: m * n, num_real: n, objective, constraints };
    let embedded = embed_complex(&socp)?;
    let sol = AdmmSolver::new(&embedded.program, opts.admm.clone())?.solve()?;
    match sol.status {
        SolveStatus::Optimal | SolveStatus::MaxIterations => {}
        other => return Err(Error::SolverFailure(format!("basis pursuit solve returned {other:?}"))),
    }
    let z = embedded.complex_part(&sol.x);
    let mut theta = CMatrix::from_fn(m, n, |row, col| z[var(row, col)]);
    let mut converged = sol.status == SolveStatus::Optimal;

    if let Some(tau) = opts.polish_threshold {
        if let Some(p) = polish(y, q, &theta, tau, opts.polish_residual) {
            let before: f64 = column_norms(&theta).iter().sum();
            let after: f64 = column_norms(&p).iter().sum();
            if after <= before * (1.0 + 1e-4) + 1e-12 {
                theta = p;
                converged = true;
            }
        }
    }
    let objective = column_norms(&theta).iter().sum();
    let support = if m == 0 || n == 0 { vec![] } else { detect_support(&theta, opts.support_rule)? };
    Ok(GroupLassoEstimate {
        theta,
        support,
        lambda: 0.0,
        objective_trace: vec![objective],
        iterations: sol.iterations,
        converged,
        nmse: None,
    })
}

/// Least-squares refit on the detected columns, if it reproduces `Y`.
fn polish(y: &CMatrix, q: &CMatrix, theta: &CMatrix, tau: f64, residual_tol: f64) -> Option<CMatrix> {
    let (m, n) = theta.shape();
    let norms = column_norms(theta);
    let top = norms.iter().cloned().fold(0.0, f64::max);
    let cols: Vec<usize> = (0..n).filter(|&c| top > 0.0 && norms[c] > tau * top).collect();
    if cols.len() > q.ncols() {
        return None;
    }
    let mut out = CMatrix::zeros(m, n);
    if !cols.is_empty() {
        let qs = q.select_rows(&cols);
        let gram = &qs * qs.adjoint();
        let fit = (y * qs.adjoint()) * gram.try_inverse()?;
        for (i, &c) in cols.iter().enumerate() {
            out.set_column(c, &fit.column(i));
        }
    }
    let residual = (&out * q - y).norm();
    (residual <= residual_tol * y.norm().max(f64::MIN_POSITIVE) || residual == 0.0).then_some(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::activity::{generate_instance, relative_error, DetectionParams};
    use crate::rng::{complex_gaussian_matrix, seeded};

    #[test]
    fn zero_observation_gives_zero() {
        let q = complex_gaussian_matrix(&mut seeded(1), 5, 3, 1.0);
        let est = basis_pursuit_group(&CMatrix::zeros(2, 3), &q, &Default::default()).unwrap();
        assert!(est.theta.norm() < 1e-9);
    }

    #[test]
    fn square_pilots_determine_theta() {
        let mut rng = seeded(2);
        let q = complex_gaussian_matrix(&mut rng, 4, 4, 1.0);
        let y = complex_gaussian_matrix(&mut rng, 2, 4, 1.0);
        let est = basis_pursuit_group(&y, &q, &Default::default()).unwrap();
        let exact = &y * q.clone().try_inverse().unwrap();
        assert!((&est.theta - &exact).norm() < 1e-8 * exact.norm());
    }

    #[test]
    fn recovers_sparse_columns() {
        let p = DetectionParams { devices: 20, antennas: 2, active: 2, pilot_length: 12, noise_sd: 0.0 };
        let inst = generate_instance(p, 3).unwrap();
        let est = basis_pursuit_group(&inst.observation, &inst.pilots, &Default::default()).unwrap();
        assert_eq!(est.support, inst.support);
        assert!(relative_error(&est.theta, &inst.theta).unwrap() <= 1e-5);
    }
}
