use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use slr_harness::experiments::demos::{AdmissionReport, GsbfReport};
use slr_harness::{
    run_admission_demo, run_convergence_comparison, run_gsbf_demo, run_nmse_curve, run_sparse_phase_transition,
    run_tim_phase_transition, write_file, write_outputs, ConvergeConfig, ConvergeSolver, DemoConfig, HarnessError,
    InstanceSource, NmseConfig, Result, SparsePtConfig, TimPtConfig,
};
use sparse_lowrank::beamforming::{CranGenerator, CranInstance};
use sparse_lowrank::tim::ManifoldSolver;

#[derive(Parser)]
#[command(name = "slr", version, about = "Run sparse and low-rank network optimization experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Base seed; every trial derives its own seed from it.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Trials per grid cell (defaults depend on the experiment).
    #[arg(long)]
    trials: Option<usize>,
    /// Output CSV; metadata goes to `<out>.meta.json`.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Activity detection success over active devices K and pilot length L.
    SparsePt {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        m: usize,
        #[arg(long, default_value_t = 1)]
        k_min: usize,
        #[arg(long, default_value_t = 20)]
        k_max: usize,
        /// First pilot length (default: the step).
        #[arg(long)]
        l_min: Option<usize>,
        /// Last pilot length (default: N).
        #[arg(long)]
        l_max: Option<usize>,
        #[arg(long, default_value_t = 4)]
        l_step: usize,
        /// Relative error counted as recovery.
        #[arg(long, default_value_t = 1e-5)]
        tol: f64,
    },
    /// Group lasso NMSE against pilot length under noise.
    Nmse {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        m: usize,
        /// Active devices.
        #[arg(long, default_value_t = 20)]
        k: usize,
        #[arg(long, default_value_t = 0.1)]
        noise_sd: f64,
        #[arg(long)]
        l_min: Option<usize>,
        #[arg(long)]
        l_max: Option<usize>,
        #[arg(long, default_value_t = 10)]
        l_step: usize,
        /// c in lambda = c * sd * sqrt(M ln N).
        #[arg(long, default_value_t = 1.0)]
        lambda_scale: f64,
    },
    /// Interference management completion success over rank and zero count.
    TimPt {
        #[command(flatten)]
        common: Common,
        /// Users.
        #[arg(long, default_value_t = 30)]
        k: usize,
        #[arg(long, default_value_t = 1)]
        rank_min: usize,
        #[arg(long, default_value_t = 10)]
        rank_max: usize,
        #[arg(long, default_value_t = 58)]
        s_step: usize,
        /// Largest zero count (default: all off-diagonal entries).
        #[arg(long)]
        s_max: Option<usize>,
        #[arg(long, default_value_t = 10)]
        restarts: usize,
        /// Mask cost counted as a completion.
        #[arg(long, default_value_t = 1e-6)]
        eps: f64,
        #[arg(long, value_enum, default_value_t = TimSolver::Rtr)]
        solver: TimSolver,
    },
    /// Compare fixed-rank solvers on a rank-constrained completion.
    Converge {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 100)]
        p: usize,
        #[arg(long, default_value_t = 100)]
        q: usize,
        #[arg(long, default_value_t = 5)]
        rank: usize,
        #[arg(long, default_value_t = 400)]
        omega: usize,
        #[arg(long, value_delimiter = ',', default_value = "rcg,rtr,altmin", value_parser = parse_solver)]
        solvers: Vec<ConvergeSolver>,
        #[arg(long, default_value_t = 500)]
        max_iters: usize,
        #[arg(long, default_value_t = 1e-6)]
        target: f64,
        /// Record wall-clock times (output is then not reproducible).
        #[arg(long)]
        timing: bool,
    },
    /// Group sparse beamforming against the all-active and exhaustive baselines.
    Gsbf {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        instance: InstanceArgs,
    },
    /// User admission by the l1 surrogate and deflation.
    Admission {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        instance: InstanceArgs,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum TimSolver {
    Rcg,
    Rtr,
}

#[derive(Args)]
struct InstanceArgs {
    /// Instance file; replaces the generator options.
    #[arg(long)]
    instance: Option<PathBuf>,
    /// RRHs.
    #[arg(long, default_value_t = 4)]
    l: usize,
    /// Users.
    #[arg(long, default_value_t = 3)]
    k: usize,
    /// Antennas per RRH.
    #[arg(long, default_value_t = 2)]
    antennas: usize,
    /// Fronthaul power per RRH in watts.
    #[arg(long, default_value_t = 5.0)]
    fronthaul_power: f64,
    #[arg(long, default_value_t = 0.0)]
    sinr_db: f64,
}

fn parse_solver(s: &str) -> std::result::Result<ConvergeSolver, String> {
    s.parse().map_err(|e: HarnessError| e.to_string())
}

fn demo_config(common: &Common, args: &InstanceArgs) -> Result<DemoConfig> {
    let source = match &args.instance {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io { path: path.clone(), source })?;
            InstanceSource::Fixed(CranInstance::from_text(&text)?)
        }
        None => InstanceSource::Generated(CranGenerator {
            rrhs: args.l,
            users: args.k,
            antennas: args.antennas,
            fronthaul_power: args.fronthaul_power,
            sinr_db: args.sinr_db,
            ..Default::default()
        }),
    };
    Ok(DemoConfig { source, trials: common.trials.unwrap_or(1), seed: common.seed })
}

/// `dir/stem.csv` to `dir/stem.<suffix>.csv`.
fn sibling(out: &Path, suffix: &str) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let ext = out.extension().map(|e| format!(".{}", e.to_string_lossy())).unwrap_or_default();
    out.with_file_name(format!("{stem}.{suffix}{ext}"))
}

fn print_gsbf(report: &GsbfReport) {
    for r in &report.rows {
        match (&r.error, r.power) {
            (Some(e), _) => eprintln!("trial {}: solver error: {e}", r.trial),
            (None, None) => println!("trial {}: infeasible", r.trial),
            (None, Some(p)) => {
                print!("trial {}: active {:?}, network power {p:.4} W", r.trial, r.active);
                if let Some(all) = r.all_active_power {
                    print!(", all active {all:.4} W");
                }
                if let Some(gap) = r.oracle_gap() {
                    print!(", oracle gap {:.2}%", 100.0 * gap);
                }
                println!();
            }
        }
    }
}

fn print_admission(report: &AdmissionReport) {
    for r in &report.rows {
        match &r.error {
            Some(e) => eprintln!("trial {}: solver error: {e}", r.trial),
            None => println!("trial {}: admitted {}/{} users {:?}", r.trial, r.admitted.len(), r.users, r.admitted),
        }
    }
}

fn solver_failure(errors: usize, total: usize) -> Result<()> {
    if errors == total {
        return Err(HarnessError::Solver(sparse_lowrank::Error::SolverFailure(format!("all {total} runs failed"))));
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::SparsePt { common, n, m, k_min, k_max, l_min, l_max, l_step, tol } => {
            let cfg = SparsePtConfig {
                devices: n,
                antennas: m,
                k_min,
                k_max,
                l_min,
                l_max,
                l_step,
                trials: common.trials.unwrap_or(20),
                seed: common.seed,
                rel_error_tol: tol,
            };
            let grid = run_sparse_phase_transition(&cfg)?;
            write_outputs(&common.out, &grid.to_csv(), &grid.metadata)?;
            solver_failure(grid.metadata.solver_errors, grid.cells.len() * cfg.trials)
        }
        Command::Nmse { common, n, m, k, noise_sd, l_min, l_max, l_step, lambda_scale } => {
            let cfg = NmseConfig {
                devices: n,
                antennas: m,
                active: k,
                noise_sd,
                l_min,
                l_max,
                l_step,
                trials: common.trials.unwrap_or(20),
                seed: common.seed,
                lambda_scale,
            };
            let curve = run_nmse_curve(&cfg)?;
            write_outputs(&common.out, &curve.to_csv(), &curve.metadata)?;
            solver_failure(curve.metadata.solver_errors, curve.points.len() * cfg.trials)
        }
        Command::TimPt { common, k, rank_min, rank_max, s_step, s_max, restarts, eps, solver } => {
            let cfg = TimPtConfig {
                users: k,
                rank_min,
                rank_max,
                s_step,
                s_max,
                trials: common.trials.unwrap_or(20),
                seed: common.seed,
                restarts,
                feasibility_tol: eps,
                solver: match solver {
                    TimSolver::Rcg => ManifoldSolver::Rcg,
                    TimSolver::Rtr => ManifoldSolver::Rtr,
                },
            };
            let grid = run_tim_phase_transition(&cfg)?;
            write_outputs(&common.out, &grid.to_csv(), &grid.metadata)
        }
        Command::Converge { common, p, q, rank, omega, solvers, max_iters, target, timing } => {
            let cfg = ConvergeConfig {
                rows: p,
                cols: q,
                rank,
                omega,
                solvers,
                trials: common.trials.unwrap_or(10),
                seed: common.seed,
                max_iters,
                target,
                timing,
                ..Default::default()
            };
            let report = run_convergence_comparison(&cfg)?;
            for run in &report.runs {
                if let Ok(trace) = &run.trace {
                    write_file(&sibling(&common.out, &format!("{}.{}", run.trial, run.solver.name())), &trace.to_csv())?;
                }
            }
            write_outputs(&common.out, &report.summary_csv(), &report.metadata)?;
            solver_failure(report.metadata.solver_errors, report.runs.len())
        }
        Command::Gsbf { common, instance } => {
            let report = run_gsbf_demo(&demo_config(&common, &instance)?)?;
            print_gsbf(&report);
            write_outputs(&common.out, &report.to_csv(), &report.metadata)?;
            solver_failure(report.metadata.solver_errors, report.rows.len())
        }
        Command::Admission { common, instance } => {
            let report = run_admission_demo(&demo_config(&common, &instance)?)?;
            print_admission(&report);
            write_outputs(&common.out, &report.to_csv(), &report.metadata)?;
            solver_failure(report.metadata.solver_errors, report.rows.len())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
