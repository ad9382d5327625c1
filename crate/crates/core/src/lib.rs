//! Structured sparse and generalized low-rank optimization for dense wireless
//! networks.
//!
//! The crate is organized bottom-up:
//!
//! * [`conic`] is a standard-form cone programming kernel (zero, nonnegative
//!   and second-order cones) with matrix-stuffing templates and an ADMM solver
//!   on the homogeneous self-dual embedding, which returns infeasibility
//!   certificates.
//! * [`beamforming`] solves network-power minimization in cloud radio access
//!   networks with group sparse beamforming, and user admission through an
//!   `l1` surrogate.
//! * [`activity`] estimates the active devices of a massive-access uplink by
//!   column-group-sparse recovery (group lasso and group basis pursuit).
//! * [`manifold`] implements Riemannian optimization on the manifold of
//!   fixed-rank matrices: geometry, conjugate gradient, trust regions, and an
//!   alternating-minimization baseline.
//! * [`tim`] turns network topology and cache contents into a side-information
//!   mask and finds low-rank completions, i.e. linear transmission schemes for
//!   topological interference management.
//!
//! See the guide in `book/` for a narrative walk-through.

pub mod activity;
pub mod beamforming;
pub mod conic;
mod error;
pub mod linalg;
pub mod manifold;
pub mod rng;
pub mod tim;

pub use error::{Error, Result};
pub use nalgebra::Complex;

pub type C64 = nalgebra::Complex<f64>;
