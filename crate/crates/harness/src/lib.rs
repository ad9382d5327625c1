//! Experiment driver for the `sparse-lowrank` solvers: phase-transition
//! grids, error curves, solver convergence comparisons and beamforming
//! demos, all written as deterministic CSV with a JSON metadata sidecar.
//!
//! Every trial seeds its own generator from the base seed and its grid
//! coordinates, so results do not depend on thread count or on which other
//! cells are run.
//!
//! ```
//! use slr_harness::{run_tim_phase_transition, TimPtConfig};
//!
//! let cfg = TimPtConfig { users: 5, rank_max: 5, s_step: 10, trials: 2, ..Default::default() };
//! let grid = run_tim_phase_transition(&cfg)?;
//! // With no prescribed zeros the all-ones matrix has rank one.
//! assert_eq!(grid.get(1, 0).unwrap().successes, 2);
//! # Ok::<(), slr_harness::HarnessError>(())
//! ```

pub mod error;
pub mod experiments;
pub mod grid;
pub mod stats;

use std::path::{Path, PathBuf};

pub use error::{HarnessError, Result};
pub use experiments::converge::{run_convergence_comparison, ConvergeConfig, ConvergeSolver, ConvergenceReport};
pub use experiments::demos::{run_admission_demo, run_gsbf_demo, DemoConfig, InstanceSource};
pub use experiments::nmse::{run_nmse_curve, NmseConfig, NmseCurve};
pub use experiments::sparse_pt::{run_sparse_phase_transition, SparsePtConfig};
pub use experiments::tim_pt::{run_tim_phase_transition, TimPtConfig};
pub use grid::{Axis, Cell, HeatmapGrid, RunMetadata};

/// `<out>.meta.json`
pub fn metadata_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".meta.json");
    PathBuf::from(name)
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|source| HarnessError::Io { path: dir.to_path_buf(), source })?;
    }
    std::fs::write(path, contents).map_err(|source| HarnessError::Io { path: path.to_path_buf(), source })
}

/// Writes the CSV to `out` and the metadata next to it.
pub fn write_outputs(out: &Path, csv: &str, metadata: &RunMetadata) -> Result<()> {
    write_file(out, csv)?;
    write_file(&metadata_path(out), &metadata.to_json())
}
