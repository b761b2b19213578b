//! Cross-operator timeslot sharing for video delivery over shared radio
//! infrastructure, driven by a drift-plus-penalty control policy.

pub mod arrivals;
pub mod config;
pub mod decision;
pub mod error;
pub mod harness;
pub mod matrix;
pub mod metrics;
pub mod optimizer;
pub mod parallel;
pub mod policy;
pub mod quality;
pub mod queueing;
pub mod sim;
