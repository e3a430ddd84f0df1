//! H2 disturbance-rejection performance of secondary frequency controllers
//! for power networks.
//!
//! The crate assembles closed-loop state-space models of the swing
//! dynamics under three secondary controllers (gather-and-broadcast
//! averaging, primal-dual saddle-point dynamics with optional frequency
//! feedback, and distributed averaging PI), computes their squared H2 norms
//! from the observability Gramian, evaluates the matching closed-form
//! expressions, and cross-checks both against stochastic simulation.

// Validation is written as `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod cli;
pub mod error;
pub mod graph;
pub mod h2;
pub mod models;
pub mod sim;

pub use error::{Error, Result};
pub use graph::NetworkGraph;
pub use h2::{h2_norm, H2Method, H2Result};
pub use models::{Controller, ControllerTag, GridParameters, StateSpaceModel};
