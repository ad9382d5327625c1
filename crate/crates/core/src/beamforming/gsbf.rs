use rayon::prelude::*;

use super::power_min::{socp_power_min, BeamformingSettings, BeamformingSolution, BeamformingStatus};
use super::qos::{qos_constraints, Layout};
use super::CranInstance;
use crate::conic::{embed_complex, AdmmSolver, AffineExpr, ComplexConstraint, ComplexSocp, RealForm, SolveStatus};
use crate::Result;

/// Outcome of [`group_sparse_beamforming`] with the intermediate stages.
#[derive(Debug, Clone)]
pub struct GsbfResult {
    pub solution: BeamformingSolution,
    /// Stage-1 weights; infinite for RRHs with an all-zero channel.
    pub weights: Vec<f64>,
    /// Stage-1 group norms `||z~_l||`.
    pub group_norms: Vec<f64>,
    /// Switch-off priority, smallest group norm first.
    pub ordering: Vec<usize>,
    /// Feasible active sets visited by the greedy scan with their network power.
    pub candidates: Vec<(Vec<usize>, f64)>,
}

/// `w_l = sqrt(P^c_l K / sum_k ||h_lk||^2)`; RRHs that reach nobody get `+inf`.
pub fn group_weights(inst: &CranInstance) -> Vec<f64> {
    (0..inst.num_rrh())
        .map(|l| {
            let energy = inst.channel_energy(l);
            if energy == 0.0 {
                f64::INFINITY
            } else {
                (inst.fronthaul_power[l] * inst.num_users() as f64 / energy).sqrt()
            }
        })
        .collect()
}

/// Three-stage network power minimization: weighted mixed `l1/l2` relaxation,
/// ordering by group norm, then a greedy switch-off scan refined by
/// [`socp_power_min`].
pub fn group_sparse_beamforming(inst: &CranInstance, settings: &BeamformingSettings) -> Result<GsbfResult> {
    inst.validate()?;
    let all: Vec<usize> = (0..inst.num_rrh()).collect();
    let weights = group_weights(inst);
    let served: Vec<usize> = (0..inst.num_users()).filter(|&k| inst.sinr_target[k] > 0.0).collect();

    let baseline = socp_power_min(inst, &all, settings)?;
    if !baseline.is_feasible() || served.is_empty() {
        let group_norms = vec![0.0; inst.num_rrh()];
        let candidates = if baseline.is_feasible() { vec![(all.clone(), baseline.network_power)] } else { vec![] };
        let mut solution = baseline;
        if solution.is_feasible() {
            // Nobody needs service: every RRH can sleep.
            solution = BeamformingSolution::zero(inst, &[]);
        }
        return Ok(GsbfResult { solution, weights, group_norms, ordering: all, candidates });
    }

    // Stage 1
    let live: Vec<usize> = all.iter().copied().filter(|&l| weights[l].is_finite()).collect();
    let mut group_norms = vec![0.0; inst.num_rrh()];
    let relaxed = relaxed_group_norms(inst, &live, &served, &weights, settings)?;
    if let Some(norms) = relaxed {
        for (p, &l) in live.iter().enumerate() {
            group_norms[l] = norms[p];
        }
    }

    // Stage 2
    let mut ordering = all.clone();
    ordering.sort_by(|&a, &b| {
        let key = |l: usize| if weights[l].is_finite() { group_norms[l] } else { f64::NEG_INFINITY };
        key(a).total_cmp(&key(b)).then(a.cmp(&b))
    });

    // Stage 3
    let mut current = all.clone();
    let mut best = baseline.clone();
    let mut candidates = vec![(all.clone(), baseline.network_power)];
    for &l in &ordering {
        if current.len() == 1 {
            break;
        }
        let trial: Vec<usize> = current.iter().copied().filter(|&x| x != l).collect();
        let sol = socp_power_min(inst, &trial, settings)?;
        if sol.is_feasible() {
            candidates.push((trial.clone(), sol.network_power));
            if sol.network_power <= best.network_power + 1e-9 * (1.0 + best.network_power) {
                best = sol;
            }
            current = trial;
        }
    }
    Ok(GsbfResult { solution: best, weights, group_norms, ordering, candidates })
}

/// Solves `min sum_l w_l ||z~_l||` under the QoS and power constraints and
/// returns the group norms over `live`, or `None` if the solver gave no
/// optimal point.
fn relaxed_group_norms(
    inst: &CranInstance,
    live: &[usize],
    served: &[usize],
    weights: &[f64],
    settings: &BeamformingSettings,
) -> Result<Option<Vec<f64>>> {
    if live.is_empty() {
        return Ok(None);
    }
    let layout = Layout::new(inst, live, served);
    let mut constraints = qos_constraints(inst, &layout, None)?;
    for p in 0..live.len() {
        constraints.push(ComplexConstraint::SecondOrder {
            bound: RealForm::real_var(p),
            entries: layout.group_vars(inst, p).into_iter().map(AffineExpr::var).collect(),
        });
    }
    let objective = RealForm {
        real: live.iter().enumerate().map(|(p, &l)| (p, weights[l])).collect(),
        ..Default::default()
    };
    let socp = ComplexSocp { num_complex: layout.num_complex(), num_real: live.len(), objective, constraints };
    let embedded = embed_complex(&socp)?;
    let sol = AdmmSolver::new(&embedded.program, settings.admm.clone())?.solve()?;
    if sol.status != SolveStatus::Optimal && sol.status != SolveStatus::MaxIterations {
        return Ok(None);
    }
    let z = embedded.complex_part(&sol.x);
    Ok(Some(
        (0..live.len())
            .map(|p| layout.group_vars(inst, p).iter().map(|&v| z[v].norm_sqr()).sum::<f64>().sqrt())
            .collect(),
    ))
}

#[derive(Debug, Clone)]
pub struct ExhaustiveResult {
    /// Best feasible solution, if any active set is feasible.
    pub best: Option<BeamformingSolution>,
    /// Every nonempty active set with its network power (infinite if not feasible).
    pub evaluated: Vec<(Vec<usize>, f64)>,
}

/// Enumerates all `2^L - 1` active sets. Ties go to the smaller set, then the
/// lexicographically smaller one.
pub fn exhaustive_active_set_search(inst: &CranInstance, settings: &BeamformingSettings) -> Result<ExhaustiveResult> {
    inst.validate()?;
    let l = inst.num_rrh();
    let sets: Vec<Vec<usize>> = (1u64..(1 << l)).map(|mask| (0..l).filter(|&i| mask >> i & 1 == 1).collect()).collect();
    let sols: Vec<BeamformingSolution> =
        sets.par_iter().map(|set| socp_power_min(inst, set, settings)).collect::<Result<_>>()?;
    let evaluated = sets.iter().cloned().zip(sols.iter().map(|s| s.network_power)).collect();
    let best = sols
        .into_iter()
        .filter(|s| s.status == BeamformingStatus::Feasible)
        .min_by(|a, b| {
            a.network_power
                .total_cmp(&b.network_power)
                .then(a.active.len().cmp(&b.active.len()))
                .then(a.active.cmp(&b.active))
        });
    Ok(ExhaustiveResult { best, evaluated })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::beamforming::CranGenerator;
    use crate::C64;

    #[test]
    fn zero_fronthaul_keeps_power_at_most_all_active() {
        let mut inst = CranGenerator::default().generate(5);
        inst.fronthaul_power.iter_mut().for_each(|p| *p = 0.0);
        let s = BeamformingSettings::default();
        let res = group_sparse_beamforming(&inst, &s).unwrap();
        let all = socp_power_min(&inst, &[0, 1, 2, 3], &s).unwrap();
        assert!(res.solution.network_power <= all.network_power + 1e-6);
    }

    #[test]
    fn dead_rrh_is_switched_off() {
        let mut inst = CranGenerator::default().generate(6);
        for h in &mut inst.channels[2] {
            h.iter_mut().for_each(|c| *c = C64::new(0.0, 0.0));
        }
        let res = group_sparse_beamforming(&inst, &BeamformingSettings::default()).unwrap();
        assert!(res.weights[2].is_infinite());
        assert_eq!(res.ordering[0], 2);
        assert!(res.solution.is_feasible());
        assert!(!res.solution.active.contains(&2));
    }

    #[test]
    fn never_beats_exhaustive_oracle() {
        let s = BeamformingSettings::default();
        let inst = CranGenerator::default().generate(11);
        let res = group_sparse_beamforming(&inst, &s).unwrap();
        let oracle = exhaustive_active_set_search(&inst, &s).unwrap();
        if let Some(best) = oracle.best {
            assert!(best.network_power <= res.solution.network_power + 1e-6);
            assert_eq!(oracle.evaluated.len(), 15);
        }
    }
}
