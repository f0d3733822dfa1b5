//! Phase-noise fidelity bounds for single-photon cross-phase-modulation
//! gates with group-velocity walk-off.

// Negated float comparisons are used deliberately so that NaN fails them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod fidelity;
pub mod phasenoise;
pub mod pulse;
pub mod quad;
pub mod response;
pub mod sweep;
