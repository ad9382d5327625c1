use rayon::prelude::*;
use sparse_lowrank::rng::derive_seed;
use sparse_lowrank::tim::{complete_at_rank, CompletionOptions, ManifoldSolver, SideInfoMask};

use super::{check_trials, stepped_range};
use crate::error::{HarnessError, Result};
use crate::grid::{Axis, HeatmapGrid, RunMetadata};

/// Fixed-rank completion success over rank and number of prescribed zeros
/// for random masks.
#[derive(Debug, Clone, PartialEq)]
pub struct TimPtConfig {
    pub users: usize,
    pub rank_min: usize,
    pub rank_max: usize,
    pub s_step: usize,
    /// Defaults to all `K(K-1)` off-diagonal entries.
    pub s_max: Option<usize>,
    pub trials: usize,
    pub seed: u64,
    pub restarts: usize,
    pub feasibility_tol: f64,
    pub solver: ManifoldSolver,
}

impl Default for TimPtConfig {
    fn default() -> Self {
        TimPtConfig {
            users: 30,
            rank_min: 1,
            rank_max: 10,
            s_step: 58,
            s_max: None,
            trials: 20,
            seed: 1,
            restarts: 10,
            feasibility_tol: 1e-6,
            solver: ManifoldSolver::Rtr,
        }
    }
}

impl TimPtConfig {
    pub fn rank_values(&self) -> Result<Vec<usize>> {
        stepped_range(self.rank_min, self.rank_max, 1)
    }

    pub fn zero_counts(&self) -> Result<Vec<usize>> {
        let all = self.users * self.users.saturating_sub(1);
        stepped_range(0, self.s_max.unwrap_or(all), self.s_step)
    }

    pub fn validate(&self) -> Result<()> {
        check_trials(self.trials)?;
        if self.users < 2 {
            return Err(HarnessError::config("need at least two users"));
        }
        if self.rank_min == 0 || self.rank_max > self.users {
            return Err(HarnessError::config(format!("ranks must lie in 1..={}", self.users)));
        }
        self.rank_values()?;
        let all = self.users * (self.users - 1);
        if self.zero_counts()?.last().is_some_and(|&s| s > all) {
            return Err(HarnessError::config(format!("at most {all} off-diagonal zeros fit a {0}x{0} mask", self.users)));
        }
        if self.restarts == 0 {
            return Err(HarnessError::config("at least one restart is required"));
        }
        if !(self.feasibility_tol > 0.0) {
            return Err(HarnessError::config("feasibility tolerance must be positive"));
        }
        Ok(())
    }

    fn completion_options(&self, zeros: usize, trial: usize) -> CompletionOptions {
        CompletionOptions {
            restarts: self.restarts,
            feasibility_tol: self.feasibility_tol,
            solver: self.solver,
            seed: derive_seed(self.seed, &[zeros as u64, trial as u64, 1]),
            stop_at_first_success: true,
            ..Default::default()
        }
    }
}

/// The mask of trial `trial` with `zeros` prescribed zeros. It does not
/// depend on the rank, so each column of the grid tests the same masks at
/// every rank.
pub fn trial_mask(cfg: &TimPtConfig, zeros: usize, trial: usize) -> Result<SideInfoMask> {
    Ok(SideInfoMask::random(cfg.users, zeros, derive_seed(cfg.seed, &[zeros as u64, trial as u64]))?)
}

/// Returns whether rank `rank` was reached and how many restarts errored.
pub fn tim_trial(cfg: &TimPtConfig, rank: usize, zeros: usize, trial: usize) -> Result<(bool, usize)> {
    let mask = trial_mask(cfg, zeros, trial)?;
    let (attempt, _) = complete_at_rank(&mask, rank, &cfg.completion_options(zeros, trial))?;
    Ok((attempt.feasible(), attempt.errors))
}

pub fn run_tim_phase_transition(cfg: &TimPtConfig) -> Result<HeatmapGrid> {
    cfg.validate()?;
    let ranks = cfg.rank_values()?;
    let counts_s = cfg.zero_counts()?;
    let jobs: Vec<(usize, usize, usize)> = ranks
        .iter()
        .flat_map(|&r| counts_s.iter().flat_map(move |&s| (0..cfg.trials).map(move |t| (r, s, t))))
        .collect();
    let outcomes: Vec<Result<(bool, usize)>> = jobs.par_iter().map(|&(r, s, t)| tim_trial(cfg, r, s, t)).collect();
    let errors: usize = outcomes.iter().map(|o| o.as_ref().map_or(1, |&(_, e)| e)).sum();
    let counts: Vec<usize> = outcomes
        .chunks(cfg.trials)
        .map(|c| c.iter().filter(|o| matches!(o, Ok((true, _)))).count())
        .collect();

    let defaults = CompletionOptions::default().solver_options;
    let stall = defaults.stall.expect("completion default has a stall rule");
    let mut meta = RunMetadata::new(
        "tim-pt",
        "success iff some restart of fixed-rank completion at rank exactly r reaches mask cost <= feasibility_tol; rank 1 decided exactly (no prescribed zeros), rank K by the identity",
        cfg.seed,
        cfg.trials,
        "mask: derive_seed(base, [|S|, trial]) shared by all ranks; restarts: derived from derive_seed(base, [|S|, trial, 1]), rank and restart index",
    )
    .tolerance("feasibility", cfg.feasibility_tol)
    .tolerance("grad", defaults.grad_tol)
    .parameter("K", cfg.users)
    .parameter("restarts", cfg.restarts)
    .parameter("solver", format!("{:?}", cfg.solver))
    .parameter("max_iters", defaults.max_iters)
    .parameter("max_inner", defaults.trust_region.max_inner)
    .parameter("stall_window", stall.window)
    .parameter("stall_rel_decrease", stall.rel_decrease)
    .parameter("restart_policy", "sequential, stop at first success");
    meta.solver_errors = errors;
    Ok(HeatmapGrid::from_counts(
        Axis { name: "r".into(), values: ranks },
        Axis { name: "|S|".into(), values: counts_s },
        &counts,
        cfg.trials,
        meta,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boundaries_of_small_grid() {
        let cfg = TimPtConfig { users: 6, rank_max: 6, s_step: 10, trials: 2, restarts: 3, ..Default::default() };
        let grid = run_tim_phase_transition(&cfg).unwrap();
        assert_eq!(grid.axis2.values, vec![0, 10, 20, 30]);
        // No zeros: rank one works. Rank K: the identity works.
        assert!(grid.column_successes(0).iter().all(|&s| s == 2));
        assert!(grid.row_successes(5).iter().all(|&s| s == 2));
        // Any zero rules out rank one; all zeros rule out everything below K.
        assert!(grid.row_successes(0)[1..].iter().all(|&s| s == 0));
        assert_eq!(grid.column_successes(3), vec![0, 0, 0, 0, 0, 2]);
    }

    #[test]
    fn masks_are_shared_across_ranks() {
        let cfg = TimPtConfig { users: 8, ..Default::default() };
        assert_eq!(trial_mask(&cfg, 12, 3).unwrap(), trial_mask(&cfg, 12, 3).unwrap());
        assert_ne!(trial_mask(&cfg, 12, 3).unwrap(), trial_mask(&cfg, 12, 4).unwrap());
    }

    #[test]
    fn rejects_ranks_above_users() {
        let cfg = TimPtConfig { users: 5, rank_max: 6, ..Default::default() };
        assert!(matches!(cfg.validate(), Err(HarnessError::Config(_))));
        let cfg = TimPtConfig { users: 5, rank_max: 5, s_max: Some(21), ..Default::default() };
        assert!(cfg.validate().is_err());
    }
}
