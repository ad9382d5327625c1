use std::fmt::Write as _;
use std::str::FromStr;

use rand::seq::index::sample;
use rayon::prelude::*;
use sparse_lowrank::manifold::{altmin_solve, masked_svd_init, rcg_solve, rtr_solve, MaskedLeastSquares, SolveTrace, SolverOptions};
use sparse_lowrank::rng::{derive_seed, seeded};

use super::check_trials;
use crate::error::{HarnessError, Result};
use crate::grid::RunMetadata;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ConvergeSolver {
    Rcg,
    Rtr,
    Altmin,
}

impl ConvergeSolver {
    pub const ALL: [ConvergeSolver; 3] = [ConvergeSolver::Rcg, ConvergeSolver::Rtr, ConvergeSolver::Altmin];

    pub fn name(self) -> &'static str {
        match self {
            ConvergeSolver::Rcg => "rcg",
            ConvergeSolver::Rtr => "rtr",
            ConvergeSolver::Altmin => "altmin",
        }
    }
}

impl FromStr for ConvergeSolver {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| HarnessError::config(format!("unknown solver {s:?}; expected rcg, rtr or altmin")))
    }
}

/// Rank-constrained completion of a unit diagonal with `omega` prescribed
/// zeros, solved from a shared start by each selected solver.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergeConfig {
    pub rows: usize,
    pub cols: usize,
    pub rank: usize,
    /// Number of off-diagonal entries pinned to zero.
    pub omega: usize,
    pub solvers: Vec<ConvergeSolver>,
    pub trials: usize,
    pub seed: u64,
    pub max_iters: usize,
    pub target: f64,
    /// Noise level added before truncating to the starting point.
    pub init_perturbation: f64,
    /// Record wall-clock times. Breaks bitwise reproducibility of the output.
    pub timing: bool,
}

impl Default for ConvergeConfig {
    fn default() -> Self {
        ConvergeConfig {
            rows: 100,
            cols: 100,
            rank: 5,
            omega: 400,
            solvers: ConvergeSolver::ALL.to_vec(),
            trials: 10,
            seed: 1,
            max_iters: 500,
            target: 1e-6,
            init_perturbation: 1e-2,
            timing: false,
        }
    }
}

impl ConvergeConfig {
    fn off_diagonal(&self) -> usize {
        self.rows * self.cols - self.rows.min(self.cols)
    }

    pub fn validate(&self) -> Result<()> {
        check_trials(self.trials)?;
        if self.rows == 0 || self.cols == 0 {
            return Err(HarnessError::config("matrix dimensions must be positive"));
        }
        if self.rank == 0 || self.rank > self.rows.min(self.cols) {
            return Err(HarnessError::config(format!("rank {} outside 1..={}", self.rank, self.rows.min(self.cols))));
        }
        if self.omega > self.off_diagonal() {
            return Err(HarnessError::config(format!("{} zeros exceed {} off-diagonal entries", self.omega, self.off_diagonal())));
        }
        if self.solvers.is_empty() {
            return Err(HarnessError::config("no solvers selected"));
        }
        if self.max_iters == 0 || !(self.target > 0.0) || !(self.init_perturbation >= 0.0) {
            return Err(HarnessError::config("iteration cap, target and perturbation must be positive"));
        }
        Ok(())
    }

    fn solver_options(&self) -> SolverOptions {
        SolverOptions {
            max_iters: self.max_iters,
            grad_tol: 1e-12,
            target_objective: Some(self.target),
            record_timing: self.timing,
            ..Default::default()
        }
    }
}

/// `sum_i (M_ii - 1)^2 + sum_omega M_ij^2` with the zero positions drawn
/// uniformly among off-diagonal entries.
pub fn converge_cost(cfg: &ConvergeConfig, trial: usize) -> Result<MaskedLeastSquares> {
    let diag = cfg.rows.min(cfg.cols);
    let off: Vec<(usize, usize)> =
        (0..cfg.rows).flat_map(|i| (0..cfg.cols).map(move |j| (i, j))).filter(|(i, j)| i != j).collect();
    let mut rng = seeded(derive_seed(cfg.seed, &[trial as u64, 0]));
    let mut picks = sample(&mut rng, off.len(), cfg.omega).into_vec();
    picks.sort_unstable();
    let entries = (0..diag).map(|i| (i, i, 1.0)).chain(picks.into_iter().map(|s| (off[s].0, off[s].1, 0.0))).collect();
    Ok(MaskedLeastSquares::new(cfg.rows, cfg.cols, entries)?)
}

#[derive(Debug, Clone)]
pub struct SolverRun {
    pub trial: usize,
    pub solver: ConvergeSolver,
    /// `Err` holds the solver's error message.
    pub trace: std::result::Result<SolveTrace, String>,
}

impl SolverRun {
    pub fn iterations_to(&self, level: f64) -> Option<usize> {
        self.trace.as_ref().ok().and_then(|t| t.iterations_to(level))
    }
}

#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    pub target: f64,
    /// Trial-major, then in the configured solver order.
    pub runs: Vec<SolverRun>,
    pub metadata: RunMetadata,
}

impl ConvergenceReport {
    pub fn run(&self, trial: usize, solver: ConvergeSolver) -> Option<&SolverRun> {
        self.runs.iter().find(|r| r.trial == trial && r.solver == solver)
    }

    /// `trial,solver,status,iterations,iterations_to_target,final_objective,wall_seconds`
    pub fn summary_csv(&self) -> String {
        let mut out = String::from("trial,solver,status,iterations,iterations_to_target,final_objective,wall_seconds\n");
        for r in &self.runs {
            match &r.trace {
                Ok(t) => {
                    let to = t.iterations_to(self.target).map(|i| i.to_string()).unwrap_or_default();
                    let wall = t.wall_time().map(|w| format!("{w:.6}")).unwrap_or_default();
                    let _ = writeln!(
                        out,
                        "{},{},{:?},{},{},{:.17e},{}",
                        r.trial,
                        r.solver.name(),
                        t.termination,
                        t.iterations(),
                        to,
                        t.final_objective(),
                        wall
                    );
                }
                Err(_) => {
                    let _ = writeln!(out, "{},{},Error,,,,", r.trial, r.solver.name());
                }
            }
        }
        out
    }
}

pub fn run_convergence_comparison(cfg: &ConvergeConfig) -> Result<ConvergenceReport> {
    cfg.validate()?;
    let opts = cfg.solver_options();
    let jobs: Vec<(usize, ConvergeSolver)> =
        (0..cfg.trials).flat_map(|t| cfg.solvers.iter().map(move |&s| (t, s))).collect();
    let runs: Vec<Result<SolverRun>> = jobs
        .par_iter()
        .map(|&(trial, solver)| {
            let cost = converge_cost(cfg, trial)?;
            let x0 = masked_svd_init(&cost, cfg.rank, cfg.init_perturbation, derive_seed(cfg.seed, &[trial as u64, 1]))?;
            let trace = match solver {
                ConvergeSolver::Rcg => rcg_solve(&cost, &x0, &opts),
                ConvergeSolver::Rtr => rtr_solve(&cost, &x0, &opts),
                ConvergeSolver::Altmin => altmin_solve(&cost, cfg.rank, &x0, &opts),
            };
            Ok(SolverRun { trial, solver, trace: trace.map_err(|e| e.to_string()) })
        })
        .collect();
    let runs: Vec<SolverRun> = runs.into_iter().collect::<Result<_>>()?;
    let mut metadata = RunMetadata::new(
        "converge",
        "iterations until the objective first drops to the target, from a shared initialization per trial",
        cfg.seed,
        cfg.trials,
        "mask: derive_seed(base, [trial, 0]); start: derive_seed(base, [trial, 1])",
    )
    .tolerance("target", cfg.target)
    .tolerance("grad", opts.grad_tol)
    .parameter("p", cfg.rows)
    .parameter("q", cfg.cols)
    .parameter("r", cfg.rank)
    .parameter("omega", cfg.omega)
    .parameter("max_iters", cfg.max_iters)
    .parameter("init_perturbation", cfg.init_perturbation)
    .parameter("solvers", cfg.solvers.iter().map(|s| s.name()).collect::<Vec<_>>())
    .parameter("timing", cfg.timing);
    metadata.solver_errors = runs.iter().filter(|r| r.trace.is_err()).count();
    Ok(ConvergenceReport { target: cfg.target, runs, metadata })
}
