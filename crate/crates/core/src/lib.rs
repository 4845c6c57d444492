//! Lorentzian/Euclidean regime accounting for a free particle under
//! projective measurement, with a classicalized MERA hologram supplying the
//! Euclidean-side entropy.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod euclidean;
pub mod holotn;
pub mod lorentzian;
pub mod measurement;
pub mod qstate;
pub mod stats;
pub mod superselection;

pub use error::{Error, Result};
