//! Optimization over the manifold of `p x q` matrices of fixed rank `r`.
//!
//! Points are stored in factored form `U S V^T` and never expanded to
//! `p x q` unless a cost asks for it. The geometry is the embedded one:
//! tangent vectors are projected Euclidean matrices and the retraction is the
//! metric projection (truncated SVD), evaluated on `2r x 2r` cores.
//!
//! ```
//! use nalgebra::DMatrix;
//! use sparse_lowrank::manifold::{rcg_solve, FixedRankPoint, QuadraticCost, SolverOptions};
//!
//! let target = DMatrix::from_fn(6, 5, |i, j| ((i + 1) * (j + 2)) as f64);
//! let start = FixedRankPoint::from_dense(&DMatrix::from_fn(6, 5, |i, j| (i + j) as f64 + 1.0), 1)?;
//! let trace = rcg_solve(&QuadraticCost { target }, &start, &SolverOptions::default())?;
//! assert!(trace.final_objective() < 1e-12);
//! # Ok::<(), sparse_lowrank::Error>(())
//! ```

mod altmin;
mod cost;
mod geometry;
mod init;
mod rcg;
mod rtr;
mod trace;

pub use altmin::{altmin_solve, point_from_factors};
pub use cost::{riemannian_gradient, riemannian_hessian, HessianOperator, LinearCost, MaskedLeastSquares, QuadraticCost, SmoothCost};
pub use geometry::{project_tangent, retract, transport, AmbientMatrix, FixedRankPoint, TangentVector, RANK_FLOOR};
pub use init::masked_svd_init;
pub use rcg::rcg_solve;
pub use rtr::rtr_solve;
pub use trace::{IterRecord, LineSearchOptions, SolveTrace, SolverOptions, StallRule, Termination, TrustRegionOptions};
