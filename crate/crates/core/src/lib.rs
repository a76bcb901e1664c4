//! Photon emission by shaped free-electron wavepackets interacting with
//! Fock, vacuum and coherent light.
//!
//! [`emission`] holds the closed forms, [`oracle`] an independent momentum
//! quadrature used to check them, and [`kinematics`] the map from
//! laboratory parameters to the dimensionless inputs both consume.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` also rejects NaN

pub mod cli;
pub mod emission;
pub mod error;
pub mod kinematics;
pub mod oracle;
pub mod specfun;

pub use error::{Error, Result};
