//! Joint activity detection and channel estimation for grant-free massive
//! access.
//!
//! A base station with `M` antennas observes `Y = Theta Q + W`, where `Q` is
//! the `N x L` pilot matrix of all `N` devices and column `n` of the `M x N`
//! matrix `Theta` is the channel of device `n` if it is active and zero
//! otherwise. Detecting activity amounts to finding the nonzero columns.

mod basis_pursuit;
mod instance;
mod lasso;
mod support;

pub use basis_pursuit::{basis_pursuit_group, BasisPursuitOptions};
pub use instance::{generate_instance, DetectionInstance, DetectionParams};
pub use lasso::{
    group_lasso_continuation, group_lasso_solve, kkt_residuals, lambda_max, noise_lambda,
    GroupLassoEstimate, GroupLassoOptions, KktResiduals,
};
pub use support::{column_norms, detect_support, nmse, relative_error, SupportRule};

/// Complex dense matrix used throughout this module.
pub type CMatrix = nalgebra::DMatrix<crate::C64>;
