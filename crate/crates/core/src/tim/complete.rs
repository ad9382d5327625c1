use std::fmt;

use nalgebra::DMatrix;
use rayon::prelude::*;

use super::SideInfoMask;
use crate::manifold::{masked_svd_init, rcg_solve, rtr_solve, SmoothCost, SolverOptions, StallRule, TrustRegionOptions};
use crate::rng::derive_seed;
use crate::{Error, Result};

/// Degrees of freedom `1/n` of a scheme using `n` channel uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Dof {
    channel_uses: usize,
}

impl Dof {
    pub fn channel_uses(self) -> usize {
        self.channel_uses
    }

    pub fn value(self) -> f64 {
        1.0 / self.channel_uses as f64
    }
}

impl fmt::Display for Dof {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "1/{}", self.channel_uses)
    }
}

pub fn dof(rank: usize) -> Result<Dof> {
    if rank == 0 {
        return Err(Error::invalid("rank must be at least one"));
    }
    Ok(Dof { channel_uses: rank })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ManifoldSolver {
    Rcg,
    #[default]
    Rtr,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompletionOptions {
    /// Largest rank tried; defaults to `K`.
    pub max_rank: Option<usize>,
    pub restarts: usize,
    /// Cost value below which a rank counts as feasible.
    pub feasibility_tol: f64,
    pub solver: ManifoldSolver,
    pub seed: u64,
    /// Standard deviation of the noise added to the identity before
    /// truncating to the starting point.
    pub init_scale: f64,
    pub solver_options: SolverOptions,
    /// Run restarts one after another and stop at the first success instead
    /// of running all of them in parallel.
    pub stop_at_first_success: bool,
}

impl Default for CompletionOptions {
    fn default() -> Self {
        CompletionOptions {
            max_rank: None,
            restarts: 10,
            feasibility_tol: 1e-6,
            solver: ManifoldSolver::Rtr,
            seed: 0,
            init_scale: 1.0,
            solver_options: SolverOptions {
                max_iters: 300,
                grad_tol: 1e-10,
                trust_region: TrustRegionOptions { max_inner: 50, ..Default::default() },
                stall: Some(StallRule { window: 10, rel_decrease: 0.5 }),
                ..Default::default()
            },
            stop_at_first_success: false,
        }
    }
}

/// Outcome of all restarts at one rank.
#[derive(Debug, Clone, PartialEq)]
pub struct RankAttempt {
    pub rank: usize,
    pub restarts_run: usize,
    pub successes: usize,
    /// Restarts that ended in a solver error.
    pub errors: usize,
    pub best_residual: f64,
}

impl RankAttempt {
    pub fn feasible(&self) -> bool {
        self.successes > 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompletionResult {
    pub rank: usize,
    pub matrix: DMatrix<f64>,
    /// Mask cost of `matrix`.
    pub residual: f64,
    pub dof: Dof,
    pub attempts: Vec<RankAttempt>,
    pub success: bool,
    /// True when every smaller rank was ruled out exactly rather than by
    /// failed restarts, so `rank` is the true minimum.
    pub certified_minimal: bool,
}

/// Tries rank exactly `rank` and returns the attempt summary with the best
/// matrix found.
///
/// Rank one is decided exactly: `a_i b_i = 1 = a_j b_j` forbids `a_i b_j = 0`,
/// so it is feasible iff there are no prescribed zeros. Rank `K` is always
/// feasible through the identity.
pub fn complete_at_rank(mask: &SideInfoMask, rank: usize, opts: &CompletionOptions) -> Result<(RankAttempt, DMatrix<f64>)> {
    let k = mask.size();
    if rank == 0 || rank > k {
        return Err(Error::invalid(format!("rank {rank} outside 1..={k}")));
    }
    let exact = |m: DMatrix<f64>, ok: bool| {
        let residual = mask.residual(&m);
        let attempt = RankAttempt { rank, restarts_run: 0, successes: usize::from(ok), errors: 0, best_residual: residual };
        (attempt, m)
    };
    if rank == 1 {
        if mask.fixed_zeros().is_empty() {
            return Ok(exact(DMatrix::from_element(k, k, 1.0), true));
        }
        // The residual of the all-ones matrix is reported, but no rank-one
        // matrix meets the mask.
        return Ok(exact(DMatrix::from_element(k, k, 1.0), false));
    }
    if rank == k {
        return Ok(exact(DMatrix::identity(k, k), true));
    }

    let cost = mask.cost();
    let mut solver_opts = opts.solver_options.clone();
    solver_opts.target_objective = Some(opts.feasibility_tol);
    let run = |t: usize| -> Result<(f64, DMatrix<f64>)> {
        let seed = derive_seed(opts.seed, &[rank as u64, t as u64]);
        let x0 = masked_svd_init(&cost, rank, opts.init_scale, seed)?;
        let trace = match opts.solver {
            ManifoldSolver::Rcg => rcg_solve(&cost, &x0, &solver_opts)?,
            ManifoldSolver::Rtr => rtr_solve(&cost, &x0, &solver_opts)?,
        };
        Ok((cost.value(&trace.final_point), trace.final_point.to_dense()))
    };

    let outcomes: Vec<Result<(f64, DMatrix<f64>)>> = if opts.stop_at_first_success {
        let mut out = Vec::new();
        for t in 0..opts.restarts {
            let o = run(t);
            let done = matches!(&o, Ok((f, _)) if *f <= opts.feasibility_tol);
            out.push(o);
            if done {
                break;
            }
        }
        out
    } else {
        (0..opts.restarts).into_par_iter().map(run).collect()
    };

    let mut attempt = RankAttempt { rank, restarts_run: outcomes.len(), successes: 0, errors: 0, best_residual: f64::INFINITY };
    let mut best = None;
    for o in outcomes {
        match o {
            Ok((f, m)) => {
                if f <= opts.feasibility_tol {
                    attempt.successes += 1;
                }
                if f < attempt.best_residual {
                    attempt.best_residual = f;
                    best = Some(m);
                }
            }
            Err(_) => attempt.errors += 1,
        }
    }
    let matrix = best.unwrap_or_else(|| DMatrix::zeros(k, k));
    if !attempt.best_residual.is_finite() {
        attempt.best_residual = mask.residual(&matrix);
    }
    Ok((attempt, matrix))
}

/// Smallest rank, searched upward from one, at which a completion of the
/// mask is found. Ranks above one are decided by nonconvex local search, so
/// the result is an upper bound on the minimum rank.
pub fn min_rank_complete(mask: &SideInfoMask, opts: &CompletionOptions) -> Result<CompletionResult> {
    let k = mask.size();
    let max_rank = opts.max_rank.unwrap_or(k);
    if max_rank == 0 || max_rank > k {
        return Err(Error::invalid(format!("maximum rank {max_rank} outside 1..={k}")));
    }
    if opts.restarts == 0 {
        return Err(Error::invalid("at least one restart is required"));
    }
    let mut attempts = Vec::new();
    let mut last = None;
    for rank in 1..=max_rank {
        let (attempt, matrix) = complete_at_rank(mask, rank, opts)?;
        let success = attempt.feasible();
        attempts.push(attempt);
        if success {
            return Ok(CompletionResult {
                rank,
                residual: mask.residual(&matrix),
                matrix,
                dof: dof(rank)?,
                certified_minimal: rank <= 2,
                attempts,
                success: true,
            });
        }
        last = Some(matrix);
    }
    let matrix = last.expect("at least one rank tried");
    Ok(CompletionResult {
        rank: max_rank,
        residual: mask.residual(&matrix),
        matrix,
        dof: dof(max_rank)?,
        attempts,
        success: false,
        certified_minimal: false,
    })
}
