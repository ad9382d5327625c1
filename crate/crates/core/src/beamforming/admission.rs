use super::power_min::{socp_power_min_served, BeamformingSettings, BeamformingSolution};
use super::qos::{cross_gains, qos_constraints, sinr_scale, Layout};
use super::CranInstance;
use crate::conic::{embed_complex, AdmmSolver, ComplexConstraint, ComplexSocp, RealForm, SolveStatus};
use crate::{Error, Result, C64};

/// QoS constraints `g_k(v) <= 0` of a CRAN with every RRH active, where
/// `g_k(v) = ||(h_k^H V, sigma_k)|| - sqrt(1 + 1/gamma_k) Re(h_k^H v_k)`.
#[derive(Debug, Clone)]
pub struct AdmissionInstance {
    pub cran: CranInstance,
}

impl AdmissionInstance {
    pub fn new(cran: CranInstance) -> Result<Self> {
        cran.validate()?;
        Ok(AdmissionInstance { cran })
    }

    pub fn num_constraints(&self) -> usize {
        self.cran.num_users()
    }

    /// `g_k` at the beamformers `[l][k]`; `-inf` for users without a target.
    pub fn constraint_values(&self, beams: &[Vec<Vec<C64>>]) -> Vec<f64> {
        let inst = &self.cran;
        let g = cross_gains(inst, beams);
        (0..inst.num_users())
            .map(|k| {
                if inst.sinr_target[k] == 0.0 {
                    return f64::NEG_INFINITY;
                }
                let norm = (g[k].iter().map(|c| c.norm_sqr()).sum::<f64>() + inst.noise_power[k]).sqrt();
                norm - sinr_scale(inst.sinr_target[k]) * g[k][k].re
            })
            .collect()
    }
}

/// The two instantiations of a composite combinatorial objective
/// `f1(support) + f2(x)`.
#[derive(Debug, Clone, PartialEq)]
pub enum SparseObjectiveSpec {
    /// `f1 = sum_l w_l 1{z~_l != 0}`, `f2` = total transmit power.
    GroupSparse { weights: Vec<f64> },
    /// `f1` = number of violated QoS constraints, `f2 = 0`.
    Admission { users: usize },
}

impl SparseObjectiveSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            SparseObjectiveSpec::GroupSparse { weights } if weights.iter().any(|w| !(*w >= 0.0)) => {
                Err(Error::invalid("group weights must be nonnegative"))
            }
            _ => Ok(()),
        }
    }

    /// `f1` for a support indicator (active groups, or violated users).
    pub fn combinatorial(&self, support: &[bool]) -> f64 {
        match self {
            SparseObjectiveSpec::GroupSparse { weights } => {
                weights.iter().zip(support).filter(|(_, &s)| s).map(|(w, _)| w).sum()
            }
            SparseObjectiveSpec::Admission { .. } => support.iter().filter(|&&s| s).count() as f64,
        }
    }

    /// `f2` at a beamforming solution.
    pub fn smooth(&self, inst: &CranInstance, sol: &BeamformingSolution) -> f64 {
        match self {
            SparseObjectiveSpec::GroupSparse { .. } => {
                (0..inst.num_rrh()).map(|l| sol.rrh_power(l) / inst.efficiency[l]).sum()
            }
            SparseObjectiveSpec::Admission { .. } => 0.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct AdmissionResult {
    /// Sorted admitted users.
    pub admitted: Vec<usize>,
    /// Optimal `l1` slack `z_k` per user (zero for users without a target).
    pub violations: Vec<f64>,
    /// Users dropped during deflation, in removal order.
    pub removed: Vec<usize>,
    /// Feasible beamformers serving exactly the admitted users.
    pub solution: BeamformingSolution,
}

/// Maximizes the number of served users through the `l1` surrogate
/// `min sum_k z_k  s.t.  g_k(v) <= z_k, z >= 0`, followed by deflation.
pub fn user_admission(inst: &AdmissionInstance, settings: &BeamformingSettings) -> Result<AdmissionResult> {
    let cran = &inst.cran;
    cran.validate()?;
    let all: Vec<usize> = (0..cran.num_rrh()).collect();
    let constrained: Vec<usize> = (0..cran.num_users()).filter(|&k| cran.sinr_target[k] > 0.0).collect();
    let mut violations = vec![0.0; cran.num_users()];

    if !constrained.is_empty() {
        let layout = Layout::new(cran, &all, &constrained);
        let mut constraints = qos_constraints(cran, &layout, Some(0))?;
        constraints.extend((0..constrained.len()).map(|q| ComplexConstraint::NonNegative(RealForm::real_var(q))));
        let objective = RealForm { real: (0..constrained.len()).map(|q| (q, 1.0)).collect(), ..Default::default() };
        let socp = ComplexSocp {
            num_complex: layout.num_complex(),
            num_real: constrained.len(),
            objective,
            constraints,
        };
        let embedded = embed_complex(&socp)?;
        let sol = AdmmSolver::new(&embedded.program, settings.admm.clone())?.solve()?;
        if !matches!(sol.status, SolveStatus::Optimal | SolveStatus::MaxIterations) {
            return Err(Error::SolverFailure(format!("l1 admission surrogate returned {:?}", sol.status)));
        }
        for (q, z) in embedded.real_part(&sol.x).into_iter().enumerate() {
            violations[constrained[q]] = z.max(0.0);
        }
    }

    let zmax = violations.iter().cloned().fold(0.0, f64::max);
    let eps = 1e-5 * (1.0 + zmax);
    let mut admitted: Vec<usize> = (0..cran.num_users()).filter(|&k| violations[k] <= eps).collect();
    let mut removed = Vec::new();
    loop {
        let sol = socp_power_min_served(cran, &all, &admitted, settings)?;
        if sol.is_feasible() {
            return Ok(AdmissionResult { admitted, violations, removed, solution: sol });
        }
        let worst = admitted
            .iter()
            .copied()
            .filter(|&k| cran.sinr_target[k] > 0.0)
            .max_by(|&a, &b| violations[a].total_cmp(&violations[b]).then(a.cmp(&b)))
            .ok_or_else(|| Error::SolverFailure("restricted problem infeasible with no constrained user".into()))?;
        admitted.retain(|&k| k != worst);
        removed.push(worst);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::beamforming::CranGenerator;

    #[test]
    fn easy_instance_admits_everyone() {
        let cran = CranGenerator::default().generate(1).with_scaled_targets(0.1);
        let res = user_admission(&AdmissionInstance::new(cran).unwrap(), &BeamformingSettings::default()).unwrap();
        assert_eq!(res.admitted, vec![0, 1, 2]);
        assert!(res.violations.iter().all(|&z| z < 1e-5));
        assert!(res.solution.is_feasible());
    }

    #[test]
    fn deaf_user_is_rejected() {
        let mut cran = CranGenerator::default().generate(2);
        for row in &mut cran.channels {
            row[1].iter_mut().for_each(|c| *c = C64::new(0.0, 0.0));
        }
        let res = user_admission(&AdmissionInstance::new(cran).unwrap(), &BeamformingSettings::default()).unwrap();
        assert!(!res.admitted.contains(&1));
        assert!(res.violations[1] > 0.0);
    }

    #[test]
    fn objective_spec_evaluates() {
        let spec = SparseObjectiveSpec::GroupSparse { weights: vec![1.0, 2.0, 4.0] };
        assert_eq!(spec.combinatorial(&[true, false, true]), 5.0);
        assert!(SparseObjectiveSpec::GroupSparse { weights: vec![-1.0] }.validate().is_err());
        assert_eq!(SparseObjectiveSpec::Admission { users: 3 }.combinatorial(&[true, true, false]), 2.0);
    }
}
