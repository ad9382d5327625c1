use std::fmt::Write as _;
use std::time::Instant;

use super::geometry::FixedRankPoint;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineSearchOptions {
    /// Armijo sufficient-decrease constant.
    pub c1: f64,
    pub backtrack: f64,
    pub max_backtracks: usize,
    pub initial_step: f64,
}

impl Default for LineSearchOptions {
    fn default() -> Self {
        LineSearchOptions { c1: 1e-4, backtrack: 0.5, max_backtracks: 60, initial_step: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrustRegionOptions {
    pub initial_radius: f64,
    pub max_radius: f64,
    /// Minimum actual-to-predicted decrease ratio for accepting a step.
    pub accept_ratio: f64,
    /// Cap on truncated-CG iterations per subproblem.
    pub max_inner: usize,
}

impl Default for TrustRegionOptions {
    fn default() -> Self {
        TrustRegionOptions { initial_radius: 1.0, max_radius: 1e4, accept_ratio: 0.1, max_inner: 200 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    pub max_iters: usize,
    pub grad_tol: f64,
    /// Also stop once the objective drops to this value.
    pub target_objective: Option<f64>,
    /// Fill in wall-clock times. Off by default so traces are reproducible.
    pub record_timing: bool,
    pub line_search: LineSearchOptions,
    pub trust_region: TrustRegionOptions,
    pub stall: Option<StallRule>,
}

/// Give up when the objective fell by less than `rel_decrease` (relative)
/// over the last `window` iterations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StallRule {
    pub window: usize,
    pub rel_decrease: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            max_iters: 1000,
            grad_tol: 1e-6,
            target_objective: None,
            record_timing: false,
            line_search: LineSearchOptions::default(),
            trust_region: TrustRegionOptions::default(),
            stall: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    GradientTolerance,
    TargetObjective,
    MaxIterations,
    LineSearchFailure,
    RankCollapse,
    /// Trust radius shrank below resolution without progress.
    RadiusCollapse,
    /// Progress fell below the configured stall rule.
    Stalled,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterRecord {
    pub iter: usize,
    pub objective: f64,
    pub grad_norm: f64,
    /// Accepted step length, or trust radius for trust-region solvers.
    pub step: f64,
    pub elapsed_seconds: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct SolveTrace {
    pub solver: &'static str,
    pub records: Vec<IterRecord>,
    pub final_point: FixedRankPoint,
    pub termination: Termination,
}

impl SolveTrace {
    pub fn iterations(&self) -> usize {
        self.records.last().map_or(0, |r| r.iter)
    }

    pub fn final_objective(&self) -> f64 {
        self.records.last().map_or(f64::NAN, |r| r.objective)
    }

    /// First iteration whose objective is at most `level`.
    pub fn iterations_to(&self, level: f64) -> Option<usize> {
        self.records.iter().find(|r| r.objective <= level).map(|r| r.iter)
    }

    pub fn is_monotone(&self) -> bool {
        self.records.windows(2).all(|w| w[1].objective <= w[0].objective)
    }

    pub fn wall_time(&self) -> Option<f64> {
        self.records.last().and_then(|r| r.elapsed_seconds)
    }

    /// `iter,objective,grad_norm,step,elapsed_seconds`; the time column is
    /// empty when timing was not recorded.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("iter,objective,grad_norm,step,elapsed_seconds\n");
        for r in &self.records {
            let t = r.elapsed_seconds.map(|t| format!("{t:.6}")).unwrap_or_default();
            let _ = writeln!(out, "{},{:.17e},{:.17e},{:.17e},{}", r.iter, r.objective, r.grad_norm, r.step, t);
        }
        out
    }
}

pub(crate) struct Recorder {
    start: Option<Instant>,
    pub records: Vec<IterRecord>,
}

impl Recorder {
    pub fn new(timing: bool) -> Self {
        Recorder { start: timing.then(Instant::now), records: Vec::new() }
    }

    pub fn push(&mut self, iter: usize, objective: f64, grad_norm: f64, step: f64) {
        let elapsed_seconds = self.start.map(|s| s.elapsed().as_secs_f64());
        self.records.push(IterRecord { iter, objective, grad_norm, step, elapsed_seconds });
    }

    /// Convergence test on the latest record, then the stall rule.
    pub fn check(&self, opts: &SolverOptions) -> Option<Termination> {
        let last = self.records.last()?;
        converged(opts, last.objective, last.grad_norm).or_else(|| {
            let rule = opts.stall?;
            let n = self.records.len();
            if rule.window == 0 || n <= rule.window {
                return None;
            }
            let before = self.records[n - 1 - rule.window].objective;
            (before - last.objective <= rule.rel_decrease * before.abs()).then_some(Termination::Stalled)
        })
    }
}

/// Shared stopping test; `None` means keep going.
pub(crate) fn converged(opts: &SolverOptions, objective: f64, grad_norm: f64) -> Option<Termination> {
    if grad_norm <= opts.grad_tol {
        Some(Termination::GradientTolerance)
    } else if opts.target_objective.is_some_and(|t| objective <= t) {
        Some(Termination::TargetObjective)
    } else {
        None
    }
}
