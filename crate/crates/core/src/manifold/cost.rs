use nalgebra::DMatrix;

use super::geometry::{project_tangent, retract, transport, AmbientMatrix, FixedRankPoint, TangentVector};
use crate::error::check_dim;
use crate::{Error, Result};

/// A smooth function of a `p x q` matrix, evaluated at fixed-rank points.
pub trait SmoothCost: Sync {
    fn shape(&self) -> (usize, usize);

    fn value(&self, x: &FixedRankPoint) -> f64;

    fn euclidean_gradient(&self, x: &FixedRankPoint) -> AmbientMatrix;

    /// Action of the Euclidean Hessian on the ambient form of `xi`, if known.
    fn euclidean_hessian(&self, _x: &FixedRankPoint, _xi: &TangentVector) -> Option<AmbientMatrix> {
        None
    }
}

pub fn riemannian_gradient(cost: &dyn SmoothCost, x: &FixedRankPoint) -> Result<TangentVector> {
    check_shape(cost, x)?;
    project_tangent(x, &cost.euclidean_gradient(x))
}

fn check_shape(cost: &dyn SmoothCost, x: &FixedRankPoint) -> Result<()> {
    let (p, q) = cost.shape();
    check_dim("point rows", p, x.shape().0)?;
    check_dim("point columns", q, x.shape().1)
}

/// Riemannian Hessian action. Uses the exact embedded-geometry formula when
/// the cost supplies a Euclidean Hessian, otherwise a forward difference of
/// the Riemannian gradient along a retraction.
pub fn riemannian_hessian(cost: &dyn SmoothCost, x: &FixedRankPoint, xi: &TangentVector) -> Result<TangentVector> {
    HessianOperator::new(cost, x)?.apply(xi)
}

/// Riemannian Hessian at a fixed point, with the point-dependent pieces
/// computed once for repeated products.
pub struct HessianOperator<'a> {
    cost: &'a dyn SmoothCost,
    x: &'a FixedRankPoint,
    egrad: AmbientMatrix,
    s_inv: DMatrix<f64>,
    rgrad: Option<TangentVector>,
}

impl<'a> HessianOperator<'a> {
    pub fn new(cost: &'a dyn SmoothCost, x: &'a FixedRankPoint) -> Result<Self> {
        check_shape(cost, x)?;
        let s_inv = x
            .core()
            .clone()
            .try_inverse()
            .ok_or(Error::RankCollapse { sigma_min: 0.0, sigma_max: x.core().norm() })?;
        Ok(HessianOperator { cost, x, egrad: cost.euclidean_gradient(x), s_inv, rgrad: None })
    }

    pub fn apply(&mut self, xi: &TangentVector) -> Result<TangentVector> {
        let x = self.x;
        match self.cost.euclidean_hessian(x, xi) {
            Some(ehess) => {
                let u = x.u();
                let v = x.v();
                let hv = ehess.mul(v);
                let htu = ehess.tr_mul(u);
                let m = u.transpose() * &hv;
                let up_raw = hv + self.egrad.mul(&xi.vp) * &self.s_inv;
                let vp_raw = htu + self.egrad.tr_mul(&xi.up) * self.s_inv.transpose();
                let up = &up_raw - u * (u.transpose() * &up_raw);
                let vp = &vp_raw - v * (v.transpose() * &vp_raw);
                Ok(TangentVector { m, up, vp })
            }
            None => {
                let norm = xi.norm();
                if norm == 0.0 {
                    return Ok(TangentVector::zero(x));
                }
                let h = 1e-6 / norm;
                if self.rgrad.is_none() {
                    self.rgrad = Some(project_tangent(x, &self.egrad)?);
                }
                let g0 = self.rgrad.as_ref().expect("filled above");
                let y = retract(x, xi, h)?;
                let g1 = transport(&y, x, &riemannian_gradient(self.cost, &y)?)?;
                Ok(g1.lincomb(1.0 / h, g0, -1.0 / h))
            }
        }
    }
}

/// `sum_(i,j) (M_ij - t_ij)^2` over a list of observed entries.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskedLeastSquares {
    rows: usize,
    cols: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl MaskedLeastSquares {
    pub fn new(rows: usize, cols: usize, entries: Vec<(usize, usize, f64)>) -> Result<Self> {
        let mut seen = std::collections::BTreeSet::new();
        for &(i, j, t) in &entries {
            if i >= rows || j >= cols {
                return Err(Error::invalid(format!("entry ({i}, {j}) outside {rows}x{cols}")));
            }
            if !t.is_finite() {
                return Err(Error::NonFinite(format!("target at ({i}, {j})")));
            }
            if !seen.insert((i, j)) {
                return Err(Error::invalid(format!("entry ({i}, {j}) listed twice")));
            }
        }
        Ok(MaskedLeastSquares { rows, cols, entries })
    }

    pub fn entries(&self) -> &[(usize, usize, f64)] {
        &self.entries
    }

    fn residuals(&self, x: &FixedRankPoint) -> Vec<f64> {
        let (left, right) = x.left_right();
        self.entries
            .iter()
            .map(|&(i, j, t)| left.row(i).dot(&right.row(j)) - t)
            .collect()
    }
}

impl SmoothCost for MaskedLeastSquares {
    fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    fn value(&self, x: &FixedRankPoint) -> f64 {
        self.residuals(x).iter().map(|r| r * r).sum()
    }

    fn euclidean_gradient(&self, x: &FixedRankPoint) -> AmbientMatrix {
        let entries = self
            .entries
            .iter()
            .zip(self.residuals(x))
            .map(|(&(i, j, _), r)| (i, j, 2.0 * r))
            .collect();
        AmbientMatrix::Sparse { rows: self.rows, cols: self.cols, entries }
    }

    fn euclidean_hessian(&self, x: &FixedRankPoint, xi: &TangentVector) -> Option<AmbientMatrix> {
        let AmbientMatrix::Factored { left, right } = xi.to_ambient(x) else {
            unreachable!("tangent vectors expand to factored form")
        };
        let entries = self
            .entries
            .iter()
            .map(|&(i, j, _)| (i, j, 2.0 * left.row(i).dot(&right.row(j))))
            .collect();
        Some(AmbientMatrix::Sparse { rows: self.rows, cols: self.cols, entries })
    }
}

/// `1/2 ||M - A||_F^2`
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticCost {
    pub target: DMatrix<f64>,
}

impl SmoothCost for QuadraticCost {
    fn shape(&self) -> (usize, usize) {
        self.target.shape()
    }

    fn value(&self, x: &FixedRankPoint) -> f64 {
        0.5 * (x.to_dense() - &self.target).norm_squared()
    }

    fn euclidean_gradient(&self, x: &FixedRankPoint) -> AmbientMatrix {
        AmbientMatrix::Dense(x.to_dense() - &self.target)
    }

    fn euclidean_hessian(&self, x: &FixedRankPoint, xi: &TangentVector) -> Option<AmbientMatrix> {
        Some(xi.to_ambient(x))
    }
}

/// `<C, M>`
#[derive(Debug, Clone, PartialEq)]
pub struct LinearCost {
    pub weights: DMatrix<f64>,
}

impl SmoothCost for LinearCost {
    fn shape(&self) -> (usize, usize) {
        self.weights.shape()
    }

    fn value(&self, x: &FixedRankPoint) -> f64 {
        x.to_dense().dot(&self.weights)
    }

    fn euclidean_gradient(&self, _x: &FixedRankPoint) -> AmbientMatrix {
        AmbientMatrix::Dense(self.weights.clone())
    }

    fn euclidean_hessian(&self, x: &FixedRankPoint, _xi: &TangentVector) -> Option<AmbientMatrix> {
        let (p, q) = x.shape();
        Some(AmbientMatrix::Sparse { rows: p, cols: q, entries: vec![] })
    }
}
