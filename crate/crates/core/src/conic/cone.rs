use crate::error::check_dim;
use crate::linalg::norm2;
use crate::{Error, Result};

/// A convex cone of a given dimension.
///
/// `SecondOrder(d)` is `{(t, z) : t >= ||z||_2}` with `z` of length `d - 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Cone {
    Zero(usize),
    NonNegative(usize),
    SecondOrder(usize),
}

impl Cone {
    pub fn dim(&self) -> usize {
        match *self {
            Cone::Zero(d) | Cone::NonNegative(d) | Cone::SecondOrder(d) => d,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Cone::Zero(0) | Cone::NonNegative(0) => Err(Error::invalid("cone dimension must be >= 1")),
            Cone::SecondOrder(d) if d < 2 => {
                Err(Error::invalid("second-order cone dimension must be >= 2"))
            }
            _ => Ok(()),
        }
    }

    /// Euclidean projection onto the cone, in place. `v.len()` must equal `dim()`.
    pub(crate) fn project_in_place(&self, v: &mut [f64]) {
        match *self {
            Cone::Zero(_) => v.iter_mut().for_each(|x| *x = 0.0),
            Cone::NonNegative(_) => v.iter_mut().for_each(|x| *x = x.max(0.0)),
            Cone::SecondOrder(_) => project_soc(v),
        }
    }

    /// Projection onto the dual cone. The zero cone's dual is the whole space.
    pub(crate) fn project_dual_in_place(&self, v: &mut [f64]) {
        match *self {
            Cone::Zero(_) => {}
            _ => self.project_in_place(v),
        }
    }

    /// Distance-style membership violation: 0 for members.
    pub fn violation(&self, v: &[f64]) -> f64 {
        match *self {
            Cone::Zero(_) => v.iter().fold(0.0_f64, |m, x| m.max(x.abs())),
            Cone::NonNegative(_) => v.iter().fold(0.0_f64, |m, x| m.max(-x)),
            Cone::SecondOrder(_) => (norm2(&v[1..]) - v[0]).max(0.0),
        }
    }

    pub(crate) fn dual_violation(&self, v: &[f64]) -> f64 {
        match *self {
            Cone::Zero(_) => 0.0,
            _ => self.violation(v),
        }
    }
}

fn project_soc(v: &mut [f64]) {
    let t = v[0];
    let nz = norm2(&v[1..]);
    if nz <= t {
        return;
    }
    // Includes the kink t = -||z||, where the projection is the origin.
    if nz <= -t {
        v.iter_mut().for_each(|x| *x = 0.0);
        return;
    }
    let alpha = 0.5 * (t + nz);
    let scale = alpha / nz;
    v[0] = alpha;
    v[1..].iter_mut().for_each(|x| *x *= scale);
}

pub fn project_cone(v: &[f64], cone: &Cone) -> Result<Vec<f64>> {
    cone.validate()?;
    check_dim("project_cone", cone.dim(), v.len())?;
    let mut out = v.to_vec();
    cone.project_in_place(&mut out);
    Ok(out)
}

/// Blockwise projection onto a product of cones, blocks taken in order.
pub fn project_cone_product(v: &[f64], cones: &[Cone]) -> Result<Vec<f64>> {
    let total: usize = cones.iter().map(Cone::dim).sum();
    check_dim("project_cone_product", total, v.len())?;
    for c in cones {
        c.validate()?;
    }
    let mut out = v.to_vec();
    project_product_in_place(&mut out, cones, false);
    Ok(out)
}

pub(crate) fn project_product_in_place(v: &mut [f64], cones: &[Cone], dual: bool) {
    let mut off = 0;
    for c in cones {
        let d = c.dim();
        let block = &mut v[off..off + d];
        if dual {
            c.project_dual_in_place(block);
        } else {
            c.project_in_place(block);
        }
        off += d;
    }
}

pub(crate) fn product_violation(v: &[f64], cones: &[Cone], dual: bool) -> f64 {
    let mut off = 0;
    let mut worst = 0.0_f64;
    for c in cones {
        let d = c.dim();
        let block = &v[off..off + d];
        let viol = if dual {
            c.dual_violation(block)
        } else {
            c.violation(block)
        };
        worst = worst.max(viol);
        off += d;
    }
    worst
}
