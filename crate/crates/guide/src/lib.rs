//! The chapters of the guide in `book/src` and the README, included here so
//! that `cargo test` compiles and runs every code example in them.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/conic.md")]
pub mod conic {}

#[doc = include_str!("../../../book/src/beamforming.md")]
pub mod beamforming {}

#[doc = include_str!("../../../book/src/activity.md")]
pub mod activity {}

#[doc = include_str!("../../../book/src/manifold.md")]
pub mod manifold {}

#[doc = include_str!("../../../book/src/tim.md")]
pub mod tim {}

#[doc = include_str!("../../../book/src/experiments.md")]
pub mod experiments {}

#[doc = include_str!("../../../README.md")]
pub mod readme {}
