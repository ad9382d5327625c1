use rayon::prelude::*;
use sparse_lowrank::activity::{basis_pursuit_group, generate_instance, relative_error, BasisPursuitOptions, DetectionParams, SupportRule};
use sparse_lowrank::rng::derive_seed;

use super::{check_trials, stepped_range};
use crate::error::{HarnessError, Result};
use crate::grid::{Axis, HeatmapGrid, RunMetadata};

/// Noiseless activity-detection phase transition over active devices `K`
/// and pilot length `L`.
#[derive(Debug, Clone, PartialEq)]
pub struct SparsePtConfig {
    pub devices: usize,
    pub antennas: usize,
    pub k_min: usize,
    pub k_max: usize,
    /// Defaults to `l_step`.
    pub l_min: Option<usize>,
    /// Defaults to the number of devices.
    pub l_max: Option<usize>,
    pub l_step: usize,
    pub trials: usize,
    pub seed: u64,
    /// Largest relative Frobenius error counted as recovery.
    pub rel_error_tol: f64,
}

impl Default for SparsePtConfig {
    fn default() -> Self {
        SparsePtConfig {
            devices: 100,
            antennas: 2,
            k_min: 1,
            k_max: 20,
            l_min: None,
            l_max: None,
            l_step: 4,
            trials: 20,
            seed: 1,
            rel_error_tol: 1e-5,
        }
    }
}

impl SparsePtConfig {
    pub fn k_values(&self) -> Result<Vec<usize>> {
        stepped_range(self.k_min, self.k_max, 1)
    }

    pub fn l_values(&self) -> Result<Vec<usize>> {
        let l_max = self.l_max.unwrap_or(self.devices);
        stepped_range(self.l_min.unwrap_or(self.l_step), l_max, self.l_step)
    }

    pub fn validate(&self) -> Result<()> {
        check_trials(self.trials)?;
        if self.devices == 0 || self.antennas == 0 {
            return Err(HarnessError::config("device and antenna counts must be positive"));
        }
        if self.k_max > self.devices {
            return Err(HarnessError::config(format!("K up to {} exceeds {} devices", self.k_max, self.devices)));
        }
        let ls = self.l_values()?;
        if ls[0] == 0 {
            return Err(HarnessError::config("pilot length must be positive"));
        }
        self.k_values()?;
        if !(self.rel_error_tol > 0.0) {
            return Err(HarnessError::config("error tolerance must be positive"));
        }
        Ok(())
    }
}

/// One trial: generate, solve by group basis pursuit, score.
/// `Err` means the solver failed, which the grid counts as a failure.
pub fn sparse_trial(cfg: &SparsePtConfig, k: usize, l: usize, trial: usize) -> Result<bool> {
    let params = DetectionParams { devices: cfg.devices, antennas: cfg.antennas, active: k, pilot_length: l, noise_sd: 0.0 };
    let inst = generate_instance(params, derive_seed(cfg.seed, &[k as u64, l as u64, trial as u64]))?;
    let opts = BasisPursuitOptions { support_rule: SupportRule::TopK(k), ..Default::default() };
    let est = basis_pursuit_group(&inst.observation, &inst.pilots, &opts)?;
    if est.support != inst.support {
        return Ok(false);
    }
    if k == 0 {
        return Ok(est.theta.norm() <= cfg.rel_error_tol);
    }
    Ok(relative_error(&est.theta, &inst.theta)? <= cfg.rel_error_tol)
}

pub fn run_sparse_phase_transition(cfg: &SparsePtConfig) -> Result<HeatmapGrid> {
    cfg.validate()?;
    let ks = cfg.k_values()?;
    let ls = cfg.l_values()?;
    let jobs: Vec<(usize, usize, usize)> = ks
        .iter()
        .flat_map(|&k| ls.iter().flat_map(move |&l| (0..cfg.trials).map(move |t| (k, l, t))))
        .collect();
    let outcomes: Vec<Result<bool>> = jobs.par_iter().map(|&(k, l, t)| sparse_trial(cfg, k, l, t)).collect();
    let errors = outcomes.iter().filter(|o| o.is_err()).count();
    let counts: Vec<usize> = outcomes
        .chunks(cfg.trials)
        .map(|c| c.iter().filter(|o| matches!(o, Ok(true))).count())
        .collect();

    let mut meta = RunMetadata::new(
        "sparse-pt",
        "noiseless group basis pursuit; success = top-K support equals the true support and ||Theta_hat - Theta||_F / ||Theta||_F <= rel_error",
        cfg.seed,
        cfg.trials,
        "derive_seed(base, [K, L, trial])",
    )
    .tolerance("rel_error", cfg.rel_error_tol)
    .tolerance("admm", BasisPursuitOptions::default().admm.eps_abs)
    .parameter("N", cfg.devices)
    .parameter("M", cfg.antennas)
    .parameter("pilots", "i.i.d. CN(0,1)")
    .parameter("channels", "i.i.d. CN(0,1)");
    meta.solver_errors = errors;
    Ok(HeatmapGrid::from_counts(
        Axis { name: "K".into(), values: ks },
        Axis { name: "L".into(), values: ls },
        &counts,
        cfg.trials,
        meta,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_row_and_full_column_succeed() {
        let cfg = SparsePtConfig { devices: 12, k_min: 0, k_max: 2, l_step: 6, trials: 3, ..Default::default() };
        let grid = run_sparse_phase_transition(&cfg).unwrap();
        assert_eq!(grid.axis2.values, vec![6, 12]);
        assert_eq!(grid.row_successes(0), vec![3, 3]);
        // L = N: the equality constraints determine Theta.
        assert_eq!(grid.get(2, 12).unwrap().successes, 3);
        assert_eq!(grid.metadata.solver_errors, 0);
    }

    #[test]
    fn rejects_bad_ranges() {
        let cfg = SparsePtConfig { devices: 10, k_max: 11, ..Default::default() };
        assert!(matches!(cfg.validate(), Err(HarnessError::Config(_))));
        let cfg = SparsePtConfig { trials: 0, ..Default::default() };
        assert!(cfg.validate().is_err());
        let cfg = SparsePtConfig { l_min: Some(0), l_step: 2, devices: 10, k_max: 3, ..Default::default() };
        assert!(cfg.validate().is_err());
    }
}
