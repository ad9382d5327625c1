use nalgebra::DMatrix;

use crate::error::check_dim;
use crate::linalg::svd_sorted;
use crate::{Error, Result};

/// Smallest admissible `sigma_min / sigma_max` of a core factor.
pub const RANK_FLOOR: f64 = 1e-12;

/// A `p x q` matrix of rank exactly `r`, stored as `U S V^T` with orthonormal
/// `U`, `V` and an invertible (not necessarily diagonal) core `S`.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedRankPoint {
    u: DMatrix<f64>,
    s: DMatrix<f64>,
    v: DMatrix<f64>,
}

impl FixedRankPoint {
    pub fn new(u: DMatrix<f64>, s: DMatrix<f64>, v: DMatrix<f64>) -> Result<Self> {
        let r = s.nrows();
        if r == 0 {
            return Err(Error::invalid("rank must be at least one"));
        }
        check_dim("core columns", r, s.ncols())?;
        check_dim("U columns", r, u.ncols())?;
        check_dim("V columns", r, v.ncols())?;
        for (name, f) in [("U", &u), ("V", &v)] {
            let err = (f.transpose() * f - DMatrix::identity(r, r)).amax();
            if err > 1e-10 {
                return Err(Error::invalid(format!("{name} is not orthonormal (error {err:e})")));
            }
        }
        check_rank(&s)?;
        Ok(FixedRankPoint { u, s, v })
    }

    /// Best rank-`r` approximation of a dense matrix.
    pub fn from_dense(m: &DMatrix<f64>, r: usize) -> Result<Self> {
        if r == 0 || r > m.nrows().min(m.ncols()) {
            return Err(Error::invalid(format!("rank {r} for a {}x{} matrix", m.nrows(), m.ncols())));
        }
        let svd = svd_sorted(m)?;
        let s = DMatrix::from_diagonal(&svd.singular_values.rows(0, r).into_owned());
        check_rank(&s)?;
        Ok(FixedRankPoint { u: svd.u.columns(0, r).into_owned(), s, v: svd.v.columns(0, r).into_owned() })
    }

    pub fn u(&self) -> &DMatrix<f64> {
        &self.u
    }

    pub fn core(&self) -> &DMatrix<f64> {
        &self.s
    }

    pub fn v(&self) -> &DMatrix<f64> {
        &self.v
    }

    pub fn rank(&self) -> usize {
        self.s.nrows()
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.u.nrows(), self.v.nrows())
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        &self.u * &self.s * self.v.transpose()
    }

    /// `U S` and `V`, so that `M_ij = (US)_i . V_j`.
    pub fn left_right(&self) -> (DMatrix<f64>, &DMatrix<f64>) {
        (&self.u * &self.s, &self.v)
    }

    /// The same matrix written as `(U Q_U, Q_U^T S Q_V, V Q_V)`.
    pub fn regauge(&self, q_u: &DMatrix<f64>, q_v: &DMatrix<f64>) -> Result<Self> {
        FixedRankPoint::new(&self.u * q_u, q_u.transpose() * &self.s * q_v, &self.v * q_v)
    }
}

fn check_rank(s: &DMatrix<f64>) -> Result<()> {
    let sv = s.singular_values();
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(smin > RANK_FLOOR * smax) {
        return Err(Error::RankCollapse { sigma_min: smin, sigma_max: smax });
    }
    Ok(())
}

/// Tangent vector `U M V^T + Up V^T + U Vp^T` at some base point, with
/// `U^T Up = 0` and `V^T Vp = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    pub m: DMatrix<f64>,
    pub up: DMatrix<f64>,
    pub vp: DMatrix<f64>,
}

impl TangentVector {
    pub fn zero(x: &FixedRankPoint) -> Self {
        let (p, q) = x.shape();
        let r = x.rank();
        TangentVector { m: DMatrix::zeros(r, r), up: DMatrix::zeros(p, r), vp: DMatrix::zeros(q, r) }
    }

    /// Euclidean inner product of the represented ambient matrices.
    pub fn inner(&self, other: &TangentVector) -> f64 {
        self.m.dot(&other.m) + self.up.dot(&other.up) + self.vp.dot(&other.vp)
    }

    pub fn norm(&self) -> f64 {
        self.inner(self).sqrt()
    }

    pub fn scale(&self, a: f64) -> Self {
        TangentVector { m: &self.m * a, up: &self.up * a, vp: &self.vp * a }
    }

    /// `a * self + b * other`
    pub fn lincomb(&self, a: f64, other: &TangentVector, b: f64) -> Self {
        TangentVector {
            m: &self.m * a + &other.m * b,
            up: &self.up * a + &other.up * b,
            vp: &self.vp * a + &other.vp * b,
        }
    }

    /// The ambient matrix as a product of `p x 2r` and `q x 2r` factors.
    pub fn to_ambient(&self, x: &FixedRankPoint) -> AmbientMatrix {
        let r = x.rank();
        let (p, q) = x.shape();
        let mut left = DMatrix::zeros(p, 2 * r);
        left.columns_mut(0, r).copy_from(&(&x.u * &self.m + &self.up));
        left.columns_mut(r, r).copy_from(&x.u);
        let mut right = DMatrix::zeros(q, 2 * r);
        right.columns_mut(0, r).copy_from(&x.v);
        right.columns_mut(r, r).copy_from(&self.vp);
        AmbientMatrix::Factored { left, right }
    }

    /// Largest violation of the gauge conditions at `x`.
    pub fn tangency_error(&self, x: &FixedRankPoint) -> f64 {
        (x.u.transpose() * &self.up).amax().max((x.v.transpose() * &self.vp).amax())
    }
}

/// A `p x q` matrix in whichever form is cheapest to multiply by thin factors.
#[derive(Debug, Clone, PartialEq)]
pub enum AmbientMatrix {
    Dense(DMatrix<f64>),
    /// Entries `(i, j, value)`; duplicates add up.
    Sparse { rows: usize, cols: usize, entries: Vec<(usize, usize, f64)> },
    /// `left * right^T`
    Factored { left: DMatrix<f64>, right: DMatrix<f64> },
}

impl AmbientMatrix {
    pub fn shape(&self) -> (usize, usize) {
        match self {
            AmbientMatrix::Dense(m) => m.shape(),
            AmbientMatrix::Sparse { rows, cols, .. } => (*rows, *cols),
            AmbientMatrix::Factored { left, right } => (left.nrows(), right.nrows()),
        }
    }

    /// `Z B`
    pub fn mul(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        match self {
            AmbientMatrix::Dense(m) => m * b,
            AmbientMatrix::Sparse { rows, entries, .. } => {
                let mut out = DMatrix::zeros(*rows, b.ncols());
                for &(i, j, v) in entries {
                    for c in 0..b.ncols() {
                        out[(i, c)] += v * b[(j, c)];
                    }
                }
                out
            }
            AmbientMatrix::Factored { left, right } => left * (right.transpose() * b),
        }
    }

    /// `Z^T B`
    pub fn tr_mul(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        match self {
            AmbientMatrix::Dense(m) => m.transpose() * b,
            AmbientMatrix::Sparse { cols, entries, .. } => {
                let mut out = DMatrix::zeros(*cols, b.ncols());
                for &(i, j, v) in entries {
                    for c in 0..b.ncols() {
                        out[(j, c)] += v * b[(i, c)];
                    }
                }
                out
            }
            AmbientMatrix::Factored { left, right } => right * (left.transpose() * b),
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        match self {
            AmbientMatrix::Dense(m) => m.clone(),
            AmbientMatrix::Sparse { rows, cols, entries } => {
                let mut out = DMatrix::zeros(*rows, *cols);
                for &(i, j, v) in entries {
                    out[(i, j)] += v;
                }
                out
            }
            AmbientMatrix::Factored { left, right } => left * right.transpose(),
        }
    }
}

/// Orthogonal projection of `z` onto the tangent space at `x`.
pub fn project_tangent(x: &FixedRankPoint, z: &AmbientMatrix) -> Result<TangentVector> {
    let (p, q) = x.shape();
    let (zp, zq) = z.shape();
    check_dim("ambient rows", p, zp)?;
    check_dim("ambient columns", q, zq)?;
    let zv = z.mul(&x.v);
    let ztu = z.tr_mul(&x.u);
    let m = x.u.transpose() * &zv;
    let up = zv - &x.u * &m;
    let vp = ztu - &x.v * m.transpose();
    Ok(TangentVector { m, up, vp })
}

/// Best rank-`r` approximation of `X + alpha xi`, computed from `2r`-column
/// factors.
pub fn retract(x: &FixedRankPoint, xi: &TangentVector, alpha: f64) -> Result<FixedRankPoint> {
    let r = x.rank();
    let (p, q) = x.shape();
    check_dim("tangent Up rows", p, xi.up.nrows())?;
    check_dim("tangent Vp rows", q, xi.vp.nrows())?;
    let mut a = DMatrix::zeros(p, 2 * r);
    a.columns_mut(0, r).copy_from(&x.u);
    a.columns_mut(r, r).copy_from(&xi.up);
    let mut b = DMatrix::zeros(q, 2 * r);
    b.columns_mut(0, r).copy_from(&x.v);
    b.columns_mut(r, r).copy_from(&xi.vp);
    let mut core = DMatrix::zeros(2 * r, 2 * r);
    core.view_mut((0, 0), (r, r)).copy_from(&(&x.s + &xi.m * alpha));
    core.view_mut((0, r), (r, r)).fill_with_identity();
    core.view_mut((r, 0), (r, r)).fill_with_identity();
    core.view_mut((0, r), (r, r)).scale_mut(alpha);
    core.view_mut((r, 0), (r, r)).scale_mut(alpha);

    let qa = a.qr();
    let qb = b.qr();
    let small = qa.r() * core * qb.r().transpose();
    let svd = svd_sorted(&small)?;
    if svd.singular_values.len() < r {
        return Err(Error::RankCollapse { sigma_min: 0.0, sigma_max: svd.singular_values.max() });
    }
    let sigma = svd.singular_values.rows(0, r).into_owned();
    let smax = sigma[0];
    let smin = sigma[r - 1];
    if !(smin > RANK_FLOOR * smax) {
        return Err(Error::RankCollapse { sigma_min: smin, sigma_max: smax });
    }
    Ok(FixedRankPoint {
        u: qa.q() * svd.u.columns(0, r),
        s: DMatrix::from_diagonal(&sigma),
        v: qb.q() * svd.v.columns(0, r),
    })
}

/// Vector transport by projection: re-express `xi` (based at `from`) in the
/// tangent space at `to`.
pub fn transport(from: &FixedRankPoint, to: &FixedRankPoint, xi: &TangentVector) -> Result<TangentVector> {
    if from.shape() != to.shape() || from.rank() != to.rank() {
        return Err(Error::invalid("transport between points of different shape or rank"));
    }
    project_tangent(to, &xi.to_ambient(from))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{gaussian_matrix, seeded};

    pub(crate) fn random_point(seed: u64, p: usize, q: usize, r: usize) -> FixedRankPoint {
        let mut rng = seeded(seed);
        let a = gaussian_matrix(&mut rng, p, r) * gaussian_matrix(&mut rng, r, q);
        FixedRankPoint::from_dense(&a, r).unwrap()
    }

    fn random_tangent(x: &FixedRankPoint, seed: u64) -> TangentVector {
        let (p, q) = x.shape();
        let z = gaussian_matrix(&mut seeded(seed), p, q);
        project_tangent(x, &AmbientMatrix::Dense(z)).unwrap()
    }

    #[test]
    fn projection_is_idempotent_and_pythagorean() {
        let x = random_point(1, 7, 5, 2);
        let z = gaussian_matrix(&mut seeded(2), 7, 5);
        let pz = project_tangent(&x, &AmbientMatrix::Dense(z.clone())).unwrap();
        assert!(pz.tangency_error(&x) < 1e-12);
        let again = project_tangent(&x, &pz.to_ambient(&x)).unwrap();
        assert!(again.lincomb(1.0, &pz, -1.0).norm() < 1e-10);
        let dense = pz.to_ambient(&x).to_dense();
        let lhs = (&z - &dense).norm_squared() + pz.norm().powi(2);
        assert!((lhs - z.norm_squared()).abs() < 1e-8 * z.norm_squared());
        assert!((dense.norm() - pz.norm()).abs() < 1e-10);
    }

    #[test]
    fn normal_space_projects_to_zero() {
        let x = random_point(3, 6, 6, 2);
        let full_u = x.u().clone().qr().q();
        assert_eq!(full_u.ncols(), 2);
        let perp = |m: &DMatrix<f64>| {
            let n = m.nrows();
            DMatrix::identity(n, n) - m * m.transpose()
        };
        let a = gaussian_matrix(&mut seeded(4), 6, 6);
        let z = perp(x.u()) * a * perp(x.v());
        let pz = project_tangent(&x, &AmbientMatrix::Dense(z)).unwrap();
        assert!(pz.norm() < 1e-10);
    }

    #[test]
    fn sparse_and_factored_agree_with_dense() {
        let x = random_point(5, 5, 4, 2);
        let entries = vec![(0, 1, 2.0), (3, 3, -1.0), (4, 0, 0.5), (0, 1, 1.0)];
        let sparse = AmbientMatrix::Sparse { rows: 5, cols: 4, entries };
        let dense = AmbientMatrix::Dense(sparse.to_dense());
        let a = project_tangent(&x, &sparse).unwrap();
        let b = project_tangent(&x, &dense).unwrap();
        assert!(a.lincomb(1.0, &b, -1.0).norm() < 1e-12);
        assert!(project_tangent(&x, &AmbientMatrix::Dense(DMatrix::zeros(4, 4))).is_err());
    }

    #[test]
    fn retraction_matches_dense_truncated_svd() {
        let x = random_point(6, 8, 6, 3);
        let xi = random_tangent(&x, 7);
        for alpha in [0.0, 0.3, 2.0] {
            let y = retract(&x, &xi, alpha).unwrap();
            let dense = x.to_dense() + xi.to_ambient(&x).to_dense() * alpha;
            let oracle = FixedRankPoint::from_dense(&dense, 3).unwrap().to_dense();
            assert!((y.to_dense() - oracle).norm() < 1e-8, "alpha {alpha}");
            assert!((y.u().transpose() * y.u() - DMatrix::identity(3, 3)).amax() < 1e-10);
        }
        let same = retract(&x, &TangentVector::zero(&x), 1.0).unwrap();
        assert!((same.to_dense() - x.to_dense()).norm() < 1e-12);
    }

    #[test]
    fn retraction_is_second_order() {
        let x = random_point(8, 9, 7, 2);
        let xi = random_tangent(&x, 9);
        let amb = xi.to_ambient(&x).to_dense();
        let err = |t: f64| (retract(&x, &xi, t).unwrap().to_dense() - (x.to_dense() + &amb * t)).norm();
        let (t1, t2) = (1e-2, 1e-3);
        let slope = (err(t1).ln() - err(t2).ln()) / (t1.ln() - t2.ln());
        assert!(slope >= 1.9, "{slope}");
    }

    #[test]
    fn transport_properties() {
        let x = random_point(10, 6, 5, 2);
        let xi = random_tangent(&x, 11);
        let same = transport(&x, &x, &xi).unwrap();
        assert!(same.lincomb(1.0, &xi, -1.0).norm() < 1e-10);
        let y = retract(&x, &random_tangent(&x, 12), 0.5).unwrap();
        let moved = transport(&x, &y, &xi).unwrap();
        assert!(moved.tangency_error(&y) < 1e-10);
        assert!(moved.norm() <= xi.norm() * (1.0 + 1e-10));
    }

    #[test]
    fn constructor_checks() {
        let x = random_point(13, 4, 4, 2);
        assert!(FixedRankPoint::new(x.u() * 2.0, x.core().clone(), x.v().clone()).is_err());
        let singular = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        assert!(matches!(
            FixedRankPoint::new(x.u().clone(), singular, x.v().clone()),
            Err(Error::RankCollapse { .. })
        ));
        assert!(FixedRankPoint::from_dense(&DMatrix::zeros(3, 3), 0).is_err());
    }

    #[test]
    fn gauge_changes_keep_the_matrix() {
        let x = random_point(14, 5, 6, 2);
        let qu = gaussian_matrix(&mut seeded(15), 2, 2).qr().q();
        let qv = gaussian_matrix(&mut seeded(16), 2, 2).qr().q();
        let y = x.regauge(&qu, &qv).unwrap();
        assert!((y.to_dense() - x.to_dense()).norm() < 1e-12);
    }
}
