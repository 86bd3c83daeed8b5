//! Deterministic co-simulation of a vehicular 5G RAN and a near-RT RIC with
//! predictive-handover xApps.

// validation uses `!(x > 0.0)` on purpose so NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod e2;
pub mod radio;
pub mod sim;
pub mod nn;
pub mod ric;
pub mod xapps;
pub mod traffic;
pub mod stats;
pub mod cli;
