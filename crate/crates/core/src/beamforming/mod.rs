//! Network adaptation in cloud radio access networks.
//!
//! A CRAN with `L` remote radio heads (RRHs) and `K` single-antenna users is
//! described by a [`CranInstance`]. The beamformer of user `k` stacks the
//! per-RRH blocks `z_lk`; switching RRH `l` off means zeroing the whole group
//! `z~_l = [z_l1, ..., z_lK]`.
//!
//! * [`socp_power_min`] minimizes transmit power over a fixed active set under
//!   second-order-cone SINR constraints.
//! * [`group_sparse_beamforming`] picks the active set by a mixed `l1/l2`
//!   relaxation, a group-norm ordering, and a greedy feasibility scan.
//! * [`user_admission`] finds a large set of jointly feasible users through
//!   the `l1` norm of constraint violations.

mod admission;
mod gsbf;
mod instance;
mod power_min;
mod qos;

pub use admission::{user_admission, AdmissionInstance, AdmissionResult, SparseObjectiveSpec};
pub use gsbf::{
    exhaustive_active_set_search, group_sparse_beamforming, group_weights, ExhaustiveResult,
    GsbfResult,
};
pub use instance::{CranGenerator, CranInstance};
pub use power_min::{
    network_power, power_min_params, power_min_template, socp_power_min, socp_power_min_served,
    BeamformingSettings, BeamformingSolution, BeamformingStatus,
};
