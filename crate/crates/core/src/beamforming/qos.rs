//! Variable layout and SINR/power constraints shared by the beamforming
//! programs.

use super::CranInstance;
use crate::conic::{AffineExpr, ComplexConstraint, RealForm};
use crate::{Result, C64};

/// Complex variables for `z_lk`, restricted to active RRHs and served users.
/// Variable index = `user_pos * per_user + rrh_offset + antenna`.
#[derive(Debug, Clone)]
pub(crate) struct Layout {
    pub rrhs: Vec<usize>,
    pub users: Vec<usize>,
    offsets: Vec<usize>,
    per_user: usize,
}

impl Layout {
    pub fn new(inst: &CranInstance, rrhs: &[usize], users: &[usize]) -> Self {
        let mut offsets = Vec::with_capacity(rrhs.len());
        let mut acc = 0;
        for &l in rrhs {
            offsets.push(acc);
            acc += inst.antennas[l];
        }
        Layout { rrhs: rrhs.to_vec(), users: users.to_vec(), offsets, per_user: acc }
    }

    pub fn num_complex(&self) -> usize {
        self.per_user * self.users.len()
    }

    pub fn var(&self, user_pos: usize, rrh_pos: usize, antenna: usize) -> usize {
        user_pos * self.per_user + self.offsets[rrh_pos] + antenna
    }

    /// Variables of RRH group `z~_l` for `l = rrhs[rrh_pos]`.
    pub fn group_vars(&self, inst: &CranInstance, rrh_pos: usize) -> Vec<usize> {
        let n = inst.antennas[self.rrhs[rrh_pos]];
        (0..self.users.len())
            .flat_map(|q| (0..n).map(move |a| (q, a)))
            .map(|(q, a)| self.var(q, rrh_pos, a))
            .collect()
    }

    /// Coefficients of `h_k^H v_j` where `v_j` is the beamformer of `users[q]`.
    pub fn inner(&self, inst: &CranInstance, k: usize, q: usize) -> Vec<(usize, C64)> {
        let mut out = Vec::with_capacity(self.per_user);
        for (p, &l) in self.rrhs.iter().enumerate() {
            for (a, h) in inst.channels[l][k].iter().enumerate() {
                out.push((self.var(q, p, a), h.conj()));
            }
        }
        out
    }

    /// Scatters a flat complex solution into `[l][k]` blocks over the whole
    /// instance, zero outside the layout.
    pub fn scatter(&self, inst: &CranInstance, z: &[C64]) -> Vec<Vec<Vec<C64>>> {
        let mut out: Vec<Vec<Vec<C64>>> = inst
            .antennas
            .iter()
            .map(|&n| vec![vec![C64::new(0.0, 0.0); n]; inst.num_users()])
            .collect();
        for (q, &k) in self.users.iter().enumerate() {
            for (p, &l) in self.rrhs.iter().enumerate() {
                for a in 0..inst.antennas[l] {
                    out[l][k][a] = z[self.var(q, p, a)];
                }
            }
        }
        out
    }
}

pub(crate) fn sinr_scale(gamma: f64) -> f64 {
    (1.0 + 1.0 / gamma).sqrt()
}

/// QoS and per-RRH power constraints. With `slack = Some(j0)`, user
/// `users[q]` gets the relaxed constraint `||...|| <= scale * Re(h^H v) + r_{j0+q}`.
pub(crate) fn qos_constraints(
    inst: &CranInstance,
    layout: &Layout,
    slack: Option<usize>,
) -> Result<Vec<ComplexConstraint>> {
    let mut cons = Vec::new();
    for (q, &k) in layout.users.iter().enumerate() {
        let own = layout.inner(inst, k, q);
        let im_part = own.iter().map(|&(i, a)| (i, a * C64::new(0.0, -1.0))).collect();
        cons.push(ComplexConstraint::RealEqual(RealForm { complex: im_part, ..Default::default() }));

        let scale = sinr_scale(inst.sinr_target[k]);
        let bound = RealForm {
            complex: own.iter().map(|&(i, a)| (i, a * scale)).collect(),
            real: slack.map(|j0| vec![(j0 + q, 1.0)]).unwrap_or_default(),
            constant: 0.0,
        };
        let mut entries: Vec<AffineExpr> = (0..layout.users.len())
            .map(|qj| AffineExpr { complex: layout.inner(inst, k, qj), ..Default::default() })
            .collect();
        entries.push(AffineExpr::constant(C64::new(inst.noise_power[k].sqrt(), 0.0)));
        cons.push(ComplexConstraint::SecondOrder { bound, entries });
    }
    for (p, &l) in layout.rrhs.iter().enumerate() {
        cons.push(ComplexConstraint::SecondOrder {
            bound: RealForm::constant(inst.power_budget[l].sqrt()),
            entries: layout.group_vars(inst, p).into_iter().map(AffineExpr::var).collect(),
        });
    }
    Ok(cons)
}

/// `h_k^H v_j` for all pairs, from `[l][k]` blocks.
pub(crate) fn cross_gains(inst: &CranInstance, beams: &[Vec<Vec<C64>>]) -> Vec<Vec<C64>> {
    let k_users = inst.num_users();
    (0..k_users)
        .map(|k| {
            (0..k_users)
                .map(|j| {
                    (0..inst.num_rrh())
                        .map(|l| {
                            inst.channels[l][k]
                                .iter()
                                .zip(&beams[l][j])
                                .map(|(h, z)| h.conj() * z)
                                .sum::<C64>()
                        })
                        .sum()
                })
                .collect()
        })
        .collect()
}
