use std::fmt::Write as _;

use rayon::prelude::*;
use sparse_lowrank::beamforming::{
    exhaustive_active_set_search, group_sparse_beamforming, network_power, socp_power_min, user_admission, AdmissionInstance,
    BeamformingSettings, CranGenerator, CranInstance,
};
use sparse_lowrank::rng::derive_seed;

use super::check_trials;
use crate::error::{HarnessError, Result};
use crate::grid::RunMetadata;

/// Largest RRH count for which the exhaustive oracle runs.
pub const ORACLE_MAX_RRHS: usize = 4;

/// Where demo instances come from.
#[derive(Debug, Clone)]
pub enum InstanceSource {
    /// A single instance; `trials` is ignored.
    Fixed(CranInstance),
    Generated(CranGenerator),
}

#[derive(Debug, Clone)]
pub struct DemoConfig {
    pub source: InstanceSource,
    pub trials: usize,
    pub seed: u64,
}

impl DemoConfig {
    fn instances(&self) -> Result<Vec<CranInstance>> {
        check_trials(self.trials)?;
        match &self.source {
            InstanceSource::Fixed(inst) => {
                inst.validate().map_err(|e| HarnessError::config(e.to_string()))?;
                Ok(vec![inst.clone()])
            }
            InstanceSource::Generated(g) => {
                if g.rrhs == 0 || g.users == 0 || g.antennas == 0 {
                    return Err(HarnessError::config("RRH, user and antenna counts must be positive"));
                }
                Ok((0..self.trials).map(|t| g.generate(derive_seed(self.seed, &[t as u64]))).collect())
            }
        }
    }

    fn metadata(&self, experiment: &str, criterion: &str, trials: usize) -> RunMetadata {
        let settings = BeamformingSettings::default();
        let meta = RunMetadata::new(experiment, criterion, self.seed, trials, "instance: derive_seed(base, [trial])")
            .tolerance("admm", settings.admm.eps_abs)
            .parameter("admm_max_iters", settings.admm.max_iters);
        match &self.source {
            InstanceSource::Fixed(inst) => meta.parameter("instance", "file").parameter("L", inst.num_rrh()).parameter("K", inst.num_users()),
            InstanceSource::Generated(g) => meta
                .parameter("instance", "generated")
                .parameter("L", g.rrhs)
                .parameter("K", g.users)
                .parameter("N_l", g.antennas)
                .parameter("P_l", g.power_budget)
                .parameter("eta", g.efficiency)
                .parameter("P_c", g.fronthaul_power)
                .parameter("sinr_db", g.sinr_db)
                .parameter("noise_power", g.noise_power),
        }
    }
}

fn join_set(set: &[usize]) -> String {
    set.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(";")
}

fn fmt_power(p: Option<f64>) -> String {
    p.map(|p| format!("{p:.17e}")).unwrap_or_default()
}

#[derive(Debug, Clone, PartialEq)]
pub struct GsbfRow {
    pub trial: usize,
    pub feasible: bool,
    pub active: Vec<usize>,
    pub power: Option<f64>,
    pub all_active_power: Option<f64>,
    pub oracle_power: Option<f64>,
    pub error: Option<String>,
}

impl GsbfRow {
    /// `(power - oracle) / oracle` when both exist.
    pub fn oracle_gap(&self) -> Option<f64> {
        Some((self.power? - self.oracle_power?) / self.oracle_power?)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GsbfReport {
    pub rows: Vec<GsbfRow>,
    pub metadata: RunMetadata,
}

impl GsbfReport {
    /// `trial,status,active_set,network_power,all_active_power,oracle_power,oracle_gap`;
    /// active sets are `;`-separated RRH indices.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("trial,status,active_set,network_power,all_active_power,oracle_power,oracle_gap\n");
        for r in &self.rows {
            let status = if r.error.is_some() {
                "error"
            } else if r.feasible {
                "feasible"
            } else {
                "infeasible"
            };
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r.trial,
                status,
                join_set(&r.active),
                fmt_power(r.power),
                fmt_power(r.all_active_power),
                fmt_power(r.oracle_power),
                fmt_power(r.oracle_gap())
            );
        }
        out
    }
}

fn gsbf_row(trial: usize, inst: &CranInstance, settings: &BeamformingSettings) -> sparse_lowrank::Result<GsbfRow> {
    let res = group_sparse_beamforming(inst, settings)?;
    let all: Vec<usize> = (0..inst.num_rrh()).collect();
    let baseline = socp_power_min(inst, &all, settings)?;
    let all_active_power = if baseline.is_feasible() { Some(network_power(inst, &baseline)?) } else { None };
    let oracle_power = if inst.num_rrh() <= ORACLE_MAX_RRHS {
        exhaustive_active_set_search(inst, settings)?.best.map(|b| b.network_power)
    } else {
        None
    };
    let feasible = res.solution.is_feasible();
    Ok(GsbfRow {
        trial,
        feasible,
        active: res.solution.active.clone(),
        power: feasible.then_some(res.solution.network_power),
        all_active_power,
        oracle_power,
        error: None,
    })
}

pub fn run_gsbf_demo(cfg: &DemoConfig) -> Result<GsbfReport> {
    let instances = cfg.instances()?;
    let settings = BeamformingSettings::default();
    let rows: Vec<GsbfRow> = instances
        .par_iter()
        .enumerate()
        .map(|(t, inst)| {
            gsbf_row(t, inst, &settings).unwrap_or_else(|e| GsbfRow {
                trial: t,
                feasible: false,
                active: vec![],
                power: None,
                all_active_power: None,
                oracle_power: None,
                error: Some(e.to_string()),
            })
        })
        .collect();
    let mut metadata = cfg.metadata(
        "gsbf",
        "network power of the group sparse beamforming active set against the all-active baseline and, for L <= 4, the exhaustive oracle",
        rows.len(),
    );
    metadata.solver_errors = rows.iter().filter(|r| r.error.is_some()).count();
    Ok(GsbfReport { rows, metadata })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdmissionRow {
    pub trial: usize,
    pub users: usize,
    pub admitted: Vec<usize>,
    pub removed: Vec<usize>,
    pub transmit_power: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdmissionReport {
    pub rows: Vec<AdmissionRow>,
    pub metadata: RunMetadata,
}

impl AdmissionReport {
    /// `trial,status,users,admitted_count,admitted,removed,transmit_power`
    pub fn to_csv(&self) -> String {
        let mut out = String::from("trial,status,users,admitted_count,admitted,removed,transmit_power\n");
        for r in &self.rows {
            let status = if r.error.is_some() { "error" } else { "ok" };
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r.trial,
                status,
                r.users,
                r.admitted.len(),
                join_set(&r.admitted),
                join_set(&r.removed),
                fmt_power(r.transmit_power)
            );
        }
        out
    }
}

pub fn run_admission_demo(cfg: &DemoConfig) -> Result<AdmissionReport> {
    let instances = cfg.instances()?;
    let settings = BeamformingSettings::default();
    let rows: Vec<AdmissionRow> = instances
        .par_iter()
        .enumerate()
        .map(|(t, inst)| {
            let users = inst.num_users();
            match AdmissionInstance::new(inst.clone()).and_then(|a| user_admission(&a, &settings)) {
                Ok(res) => AdmissionRow {
                    trial: t,
                    users,
                    transmit_power: Some(res.solution.transmit_power),
                    admitted: res.admitted,
                    removed: res.removed,
                    error: None,
                },
                Err(e) => AdmissionRow {
                    trial: t,
                    users,
                    admitted: vec![],
                    removed: vec![],
                    transmit_power: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    let mut metadata = cfg.metadata(
        "admission",
        "users admitted by the l1 admission surrogate followed by deflation until the served set is feasible",
        rows.len(),
    );
    metadata.solver_errors = rows.iter().filter(|r| r.error.is_some()).count();
    Ok(AdmissionReport { rows, metadata })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn generated(trials: usize) -> DemoConfig {
        DemoConfig { source: InstanceSource::Generated(CranGenerator { rrhs: 3, users: 2, ..Default::default() }), trials, seed: 4 }
    }

    #[test]
    fn gsbf_is_never_below_the_oracle() {
        let report = run_gsbf_demo(&generated(2)).unwrap();
        assert_eq!(report.rows.len(), 2);
        for r in &report.rows {
            assert!(r.error.is_none());
            if r.feasible {
                assert!(r.oracle_gap().unwrap() >= -1e-6);
                assert!(r.power.unwrap() <= r.all_active_power.unwrap() + 1e-6);
            }
        }
        assert_eq!(report.to_csv().lines().count(), 3);
    }

    #[test]
    fn fixed_instance_runs_once() {
        let inst = CranGenerator { rrhs: 2, users: 2, ..Default::default() }.generate(9);
        let cfg = DemoConfig { source: InstanceSource::Fixed(inst), trials: 5, seed: 0 };
        let report = run_admission_demo(&cfg).unwrap();
        assert_eq!(report.rows.len(), 1);
        let row = &report.rows[0];
        assert!(row.error.is_none());
        assert_eq!(row.admitted.len() + row.removed.len(), 2);
    }

    #[test]
    fn zero_trials_is_a_config_error() {
        assert!(matches!(run_gsbf_demo(&generated(0)), Err(HarnessError::Config(_))));
    }
}
