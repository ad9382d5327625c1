use super::qos::{cross_gains, sinr_scale, Layout};
use super::CranInstance;
use crate::conic::{
    stuff, AdmmSettings, AdmmSolver, Cone, Entry, ParamValues, SolveStatus, StuffingTemplate,
    TemplateBuilder,
};
use crate::error::check_dim;
use crate::{Error, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BeamformingStatus {
    Feasible,
    Infeasible,
    /// The conic solver hit its iteration limit without a verdict.
    Inconclusive,
}

#[derive(Debug, Clone)]
pub struct BeamformingSettings {
    pub admm: AdmmSettings,
}

impl Default for BeamformingSettings {
    fn default() -> Self {
        BeamformingSettings { admm: AdmmSettings::default().with_tolerance(1e-9).with_max_iters(40_000) }
    }
}

#[derive(Debug, Clone)]
pub struct BeamformingSolution {
    pub status: BeamformingStatus,
    /// Sorted active RRH indices.
    pub active: Vec<usize>,
    /// `beamformers[l][k]` is `z_lk`; exactly zero for inactive RRHs.
    pub beamformers: Vec<Vec<Vec<C64>>>,
    /// `sum_l (1/eta_l) ||z~_l||^2`
    pub transmit_power: f64,
    /// Transmit plus fronthaul power; infinite when not feasible.
    pub network_power: f64,
    pub sinr: Vec<f64>,
    pub iterations: usize,
}

impl BeamformingSolution {
    /// All-zero beamformers with the given active set, marked feasible.
    pub fn zero(inst: &CranInstance, active: &[usize]) -> Self {
        let beamformers = inst
            .antennas
            .iter()
            .map(|&n| vec![vec![C64::new(0.0, 0.0); n]; inst.num_users()])
            .collect();
        let mut sol = BeamformingSolution {
            status: BeamformingStatus::Feasible,
            active: active.to_vec(),
            beamformers,
            transmit_power: 0.0,
            network_power: 0.0,
            sinr: vec![0.0; inst.num_users()],
            iterations: 0,
        };
        sol.network_power = network_power(inst, &sol).unwrap_or(f64::INFINITY);
        sol
    }

    fn failed(inst: &CranInstance, active: &[usize], status: BeamformingStatus, iterations: usize) -> Self {
        let mut sol = Self::zero(inst, active);
        sol.status = status;
        sol.transmit_power = f64::INFINITY;
        sol.network_power = f64::INFINITY;
        sol.iterations = iterations;
        sol
    }

    pub fn is_feasible(&self) -> bool {
        self.status == BeamformingStatus::Feasible
    }

    /// `||z~_l||_2`
    pub fn group_norm(&self, l: usize) -> f64 {
        self.rrh_power(l).sqrt()
    }

    /// Radiated power of RRH `l`, `||z~_l||^2`.
    pub fn rrh_power(&self, l: usize) -> f64 {
        self.beamformers[l].iter().flatten().map(|c| c.norm_sqr()).sum()
    }

    /// `sqrt(1 + 1/gamma_k) Re(h_k^H v_k) - ||(h_k^H V, sigma_k)||` per user;
    /// `+inf` for users without a target.
    pub fn sinr_slack(&self, inst: &CranInstance) -> Vec<f64> {
        let g = cross_gains(inst, &self.beamformers);
        (0..inst.num_users())
            .map(|k| {
                if inst.sinr_target[k] == 0.0 {
                    return f64::INFINITY;
                }
                let norm = (g[k].iter().map(|c| c.norm_sqr()).sum::<f64>() + inst.noise_power[k]).sqrt();
                sinr_scale(inst.sinr_target[k]) * g[k][k].re - norm
            })
            .collect()
    }
}

/// Achieved SINR of every user.
pub(crate) fn achieved_sinr(inst: &CranInstance, beams: &[Vec<Vec<C64>>]) -> Vec<f64> {
    let g = cross_gains(inst, beams);
    (0..inst.num_users())
        .map(|k| {
            let interference: f64 = (0..inst.num_users()).filter(|&j| j != k).map(|j| g[k][j].norm_sqr()).sum();
            g[k][k].norm_sqr() / (interference + inst.noise_power[k])
        })
        .collect()
}

/// `sum_{l in A} (1/eta_l) sum_k ||z_lk||^2 + sum_{l in A} P^c_l`.
pub fn network_power(inst: &CranInstance, sol: &BeamformingSolution) -> Result<f64> {
    check_dim("beamformer groups", inst.num_rrh(), sol.beamformers.len())?;
    for (l, group) in sol.beamformers.iter().enumerate() {
        check_dim("beamformer users", inst.num_users(), group.len())?;
        for z in group {
            check_dim("beamformer length", inst.antennas[l], z.len())?;
        }
    }
    let mut total = 0.0;
    for &l in &sol.active {
        if l >= inst.num_rrh() {
            return Err(Error::invalid(format!("active RRH {l} out of range")));
        }
        total += sol.rrh_power(l) / inst.efficiency[l] + inst.fronthaul_power[l];
    }
    Ok(total)
}

fn h_name(part: &str, l: usize, k: usize, a: usize) -> String {
    format!("h_{part}[{l}][{k}][{a}]")
}

/// Parameterized power-minimization program for a fixed active set and set
/// of served users. Columns are the interleaved `z` variables followed by
/// the epigraph variable `t >= ||(z~_l / sqrt(eta_l))_l||`.
pub fn power_min_template(inst: &CranInstance, active: &[usize], served: &[usize]) -> Result<StuffingTemplate> {
    let layout = Layout::new(inst, active, served);
    let nc = layout.num_complex();
    let t_col = 2 * nc;
    let mut tb = TemplateBuilder::new(nc * 2 + 1);
    tb.c(t_col, Entry::Fixed(1.0));

    // Im(h_k^H v_k) = 0
    let im0 = tb.cone(Cone::Zero(served.len()));
    for (q, &k) in served.iter().enumerate() {
        for (p, &l) in active.iter().enumerate() {
            for a in 0..inst.antennas[l] {
                let v = layout.var(q, p, a);
                tb.a(im0 + q, 2 * v + 1, Entry::scaled(-1.0, &[&h_name("re", l, k, a)]));
                tb.a(im0 + q, 2 * v, Entry::scaled(1.0, &[&h_name("im", l, k, a)]));
            }
        }
    }

    let obj = tb.cone(Cone::SecondOrder(1 + 2 * nc));
    tb.a(obj, t_col, Entry::Fixed(-1.0));
    for (p, &l) in active.iter().enumerate() {
        let eta = format!("inv_sqrt_eta[{l}]");
        for v in layout.group_vars(inst, p) {
            tb.a(obj + 1 + 2 * v, 2 * v, Entry::scaled(-1.0, &[&eta]));
            tb.a(obj + 2 + 2 * v, 2 * v + 1, Entry::scaled(-1.0, &[&eta]));
        }
    }

    for (qk, &k) in served.iter().enumerate() {
        let row = tb.cone(Cone::SecondOrder(2 + 2 * served.len()));
        let scale = format!("sinr_scale[{k}]");
        for (qj, _) in served.iter().enumerate() {
            for (p, &l) in active.iter().enumerate() {
                for a in 0..inst.antennas[l] {
                    let v = layout.var(qj, p, a);
                    let (hr, hi) = (h_name("re", l, k, a), h_name("im", l, k, a));
                    if qj == qk {
                        tb.a(row, 2 * v, Entry::scaled(-1.0, &[&scale, &hr]));
                        tb.a(row, 2 * v + 1, Entry::scaled(-1.0, &[&scale, &hi]));
                    }
                    // conj(h) z = (hr zr + hi zi) + i (hr zi - hi zr)
                    let re = row + 1 + 2 * qj;
                    tb.a(re, 2 * v, Entry::scaled(-1.0, &[&hr]));
                    tb.a(re, 2 * v + 1, Entry::scaled(-1.0, &[&hi]));
                    tb.a(re + 1, 2 * v + 1, Entry::scaled(-1.0, &[&hr]));
                    tb.a(re + 1, 2 * v, Entry::scaled(1.0, &[&hi]));
                }
            }
        }
        tb.b(row + 1 + 2 * served.len(), Entry::param(format!("sigma[{k}]")));
    }

    for (p, &l) in active.iter().enumerate() {
        let vars = layout.group_vars(inst, p);
        let row = tb.cone(Cone::SecondOrder(1 + 2 * vars.len()));
        tb.b(row, Entry::param(format!("sqrt_power[{l}]")));
        for (i, v) in vars.into_iter().enumerate() {
            tb.a(row + 1 + 2 * i, 2 * v, Entry::Fixed(-1.0));
            tb.a(row + 2 + 2 * i, 2 * v + 1, Entry::Fixed(-1.0));
        }
    }
    tb.build()
}

/// Parameter values for [`power_min_template`].
pub fn power_min_params(inst: &CranInstance, active: &[usize], served: &[usize]) -> ParamValues {
    let mut pv = ParamValues::new();
    for &l in active {
        pv.insert(format!("inv_sqrt_eta[{l}]"), 1.0 / inst.efficiency[l].sqrt());
        pv.insert(format!("sqrt_power[{l}]"), inst.power_budget[l].sqrt());
        for &k in served {
            for (a, h) in inst.channels[l][k].iter().enumerate() {
                pv.insert(h_name("re", l, k, a), h.re);
                pv.insert(h_name("im", l, k, a), h.im);
            }
        }
    }
    for &k in served {
        pv.insert(format!("sinr_scale[{k}]"), sinr_scale(inst.sinr_target[k]));
        pv.insert(format!("sigma[{k}]"), inst.noise_power[k].sqrt());
    }
    pv
}

fn normalize_set(set: &[usize], bound: usize, what: &str) -> Result<Vec<usize>> {
    let mut v = set.to_vec();
    v.sort_unstable();
    v.dedup();
    if let Some(&bad) = v.iter().find(|&&i| i >= bound) {
        return Err(Error::invalid(format!("{what} index {bad} out of range")));
    }
    Ok(v)
}

/// Minimum transmit power over the RRHs in `active`, serving every user with
/// a positive SINR target.
pub fn socp_power_min(inst: &CranInstance, active: &[usize], settings: &BeamformingSettings) -> Result<BeamformingSolution> {
    let served: Vec<usize> = (0..inst.num_users()).filter(|&k| inst.sinr_target[k] > 0.0).collect();
    socp_power_min_served(inst, active, &served, settings)
}

/// Like [`socp_power_min`], but only users in `served` get beamformers and
/// QoS constraints; everyone else is left unserved.
pub fn socp_power_min_served(
    inst: &CranInstance,
    active: &[usize],
    served: &[usize],
    settings: &BeamformingSettings,
) -> Result<BeamformingSolution> {
    inst.validate()?;
    let active = normalize_set(active, inst.num_rrh(), "RRH")?;
    let served: Vec<usize> = normalize_set(served, inst.num_users(), "user")?
        .into_iter()
        .filter(|&k| inst.sinr_target[k] > 0.0)
        .collect();
    if served.is_empty() {
        return Ok(BeamformingSolution::zero(inst, &active));
    }
    if active.is_empty() {
        return Err(Error::invalid("active set must be nonempty"));
    }
    let template = power_min_template(inst, &active, &served)?;
    let prog = stuff(&template, &power_min_params(inst, &active, &served))?;
    let sol = AdmmSolver::new(&prog, settings.admm.clone())?.solve()?;
    let status = match sol.status {
        SolveStatus::Optimal => BeamformingStatus::Feasible,
        SolveStatus::PrimalInfeasible => BeamformingStatus::Infeasible,
        SolveStatus::DualInfeasible | SolveStatus::MaxIterations => BeamformingStatus::Inconclusive,
    };
    if status != BeamformingStatus::Feasible {
        return Ok(BeamformingSolution::failed(inst, &active, status, sol.iterations));
    }
    let layout = Layout::new(inst, &active, &served);
    let z: Vec<C64> = sol.x[..2 * layout.num_complex()].chunks(2).map(|p| C64::new(p[0], p[1])).collect();
    Ok(finish(inst, &active, layout.scatter(inst, &z), sol.iterations))
}

/// Applies the phase convention `h_k^H v_k >= 0` and fills in the derived
/// quantities.
pub(crate) fn finish(inst: &CranInstance, active: &[usize], mut beams: Vec<Vec<Vec<C64>>>, iterations: usize) -> BeamformingSolution {
    let g = cross_gains(inst, &beams);
    for k in 0..inst.num_users() {
        let own = g[k][k];
        if own.norm() > 0.0 {
            let rot = own.conj() / own.norm();
            for group in beams.iter_mut() {
                group[k].iter_mut().for_each(|z| *z *= rot);
            }
        }
    }
    let mut out = BeamformingSolution::zero(inst, active);
    out.sinr = achieved_sinr(inst, &beams);
    out.beamformers = beams;
    out.iterations = iterations;
    out.transmit_power = active.iter().map(|&l| out.rrh_power(l) / inst.efficiency[l]).sum();
    out.network_power = network_power(inst, &out).unwrap_or(f64::INFINITY);
    out
}
