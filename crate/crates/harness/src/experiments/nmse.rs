use std::fmt::Write as _;

use rayon::prelude::*;
use sparse_lowrank::activity::{generate_instance, group_lasso_solve, nmse, noise_lambda, DetectionParams, GroupLassoOptions};
use sparse_lowrank::rng::derive_seed;

use super::{check_trials, stepped_range};
use crate::error::{HarnessError, Result};
use crate::grid::RunMetadata;
use crate::stats::mean_and_std_error;

/// NMSE of the group lasso estimate as a function of pilot length.
#[derive(Debug, Clone, PartialEq)]
pub struct NmseConfig {
    pub devices: usize,
    pub antennas: usize,
    pub active: usize,
    pub noise_sd: f64,
    /// Defaults to `l_step`.
    pub l_min: Option<usize>,
    /// Defaults to the number of devices.
    pub l_max: Option<usize>,
    pub l_step: usize,
    pub trials: usize,
    pub seed: u64,
    /// Multiplier `c` in `lambda = c * sd * sqrt(M ln N)`.
    pub lambda_scale: f64,
}

impl Default for NmseConfig {
    fn default() -> Self {
        NmseConfig {
            devices: 100,
            antennas: 2,
            active: 20,
            noise_sd: 0.1,
            l_min: None,
            l_max: None,
            l_step: 10,
            trials: 20,
            seed: 1,
            lambda_scale: 1.0,
        }
    }
}

impl NmseConfig {
    pub fn l_values(&self) -> Result<Vec<usize>> {
        stepped_range(self.l_min.unwrap_or(self.l_step), self.l_max.unwrap_or(self.devices), self.l_step)
    }

    pub fn lambda(&self) -> f64 {
        noise_lambda(self.lambda_scale, self.noise_sd, self.antennas, self.devices)
    }

    pub fn validate(&self) -> Result<()> {
        check_trials(self.trials)?;
        if self.devices == 0 || self.antennas == 0 {
            return Err(HarnessError::config("device and antenna counts must be positive"));
        }
        if self.active == 0 || self.active > self.devices {
            return Err(HarnessError::config(format!("need 1 <= K <= N, got K = {}", self.active)));
        }
        if !(self.noise_sd >= 0.0 && self.noise_sd.is_finite()) {
            return Err(HarnessError::config("noise standard deviation must be finite and nonnegative"));
        }
        if !(self.lambda_scale >= 0.0 && self.lambda_scale.is_finite()) {
            return Err(HarnessError::config("lambda scale must be finite and nonnegative"));
        }
        if self.l_values()?[0] == 0 {
            return Err(HarnessError::config("pilot length must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NmsePoint {
    pub pilot_length: usize,
    pub mean: f64,
    pub std_error: f64,
    /// Trials that produced an estimate.
    pub trials: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NmseCurve {
    pub points: Vec<NmsePoint>,
    pub metadata: RunMetadata,
}

impl NmseCurve {
    /// `l,mean_nmse,std_error,trials`
    pub fn to_csv(&self) -> String {
        let mut out = String::from("l,mean_nmse,std_error,trials\n");
        for p in &self.points {
            let _ = writeln!(out, "{},{:.17e},{:.17e},{}", p.pilot_length, p.mean, p.std_error, p.trials);
        }
        out
    }
}

pub fn nmse_trial(cfg: &NmseConfig, l: usize, trial: usize) -> Result<f64> {
    let params =
        DetectionParams { devices: cfg.devices, antennas: cfg.antennas, active: cfg.active, pilot_length: l, noise_sd: cfg.noise_sd };
    let inst = generate_instance(params, derive_seed(cfg.seed, &[l as u64, trial as u64]))?;
    let est = group_lasso_solve(&inst.observation, &inst.pilots, cfg.lambda(), &GroupLassoOptions::default())?;
    Ok(nmse(&est.theta, &inst.theta)?)
}

pub fn run_nmse_curve(cfg: &NmseConfig) -> Result<NmseCurve> {
    cfg.validate()?;
    let ls = cfg.l_values()?;
    let jobs: Vec<(usize, usize)> = ls.iter().flat_map(|&l| (0..cfg.trials).map(move |t| (l, t))).collect();
    let outcomes: Vec<Result<f64>> = jobs.par_iter().map(|&(l, t)| nmse_trial(cfg, l, t)).collect();
    let errors = outcomes.iter().filter(|o| o.is_err()).count();
    let points = ls
        .iter()
        .zip(outcomes.chunks(cfg.trials))
        .map(|(&l, chunk)| {
            let values: Vec<f64> = chunk.iter().filter_map(|o| o.as_ref().ok().copied()).collect();
            let (mean, std_error) = mean_and_std_error(&values);
            NmsePoint { pilot_length: l, mean, std_error, trials: values.len() }
        })
        .collect();
    let mut metadata = RunMetadata::new(
        "nmse",
        "NMSE = ||Theta_hat - Theta||_F^2 / ||Theta||_F^2 of the group lasso estimate; mean and standard error over trials",
        cfg.seed,
        cfg.trials,
        "derive_seed(base, [L, trial])",
    )
    .tolerance("kkt", GroupLassoOptions::default().kkt_tol)
    .parameter("N", cfg.devices)
    .parameter("M", cfg.antennas)
    .parameter("K", cfg.active)
    .parameter("noise_sd", cfg.noise_sd)
    .parameter("lambda", cfg.lambda())
    .parameter("lambda_rule", format!("{} * sd * sqrt(M ln N)", cfg.lambda_scale));
    metadata.solver_errors = errors;
    Ok(NmseCurve { points, metadata })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noiseless_full_length_is_exact() {
        let cfg = NmseConfig { devices: 20, active: 4, noise_sd: 0.0, l_min: Some(20), l_step: 5, trials: 3, ..Default::default() };
        let curve = run_nmse_curve(&cfg).unwrap();
        assert_eq!(curve.points.len(), 1);
        assert!(curve.points[0].mean <= 1e-10, "{}", curve.points[0].mean);
        assert_eq!(curve.points[0].trials, 3);
    }

    #[test]
    fn csv_has_one_row_per_length() {
        let cfg = NmseConfig { devices: 16, active: 3, l_step: 8, trials: 2, ..Default::default() };
        let csv = run_nmse_curve(&cfg).unwrap().to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("8,") && lines[2].starts_with("16,"));
        assert!(lines[2].ends_with(",2"));
    }

    #[test]
    fn bad_configs_are_rejected() {
        assert!(NmseConfig { active: 0, ..Default::default() }.validate().is_err());
        assert!(NmseConfig { noise_sd: -1.0, ..Default::default() }.validate().is_err());
        assert!(NmseConfig { l_step: 0, ..Default::default() }.validate().is_err());
    }
}
