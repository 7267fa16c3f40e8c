//! Exact network-calculus toolkit for TSN egress ports.
//!
//! The crate computes service models and worst-case delay bounds for queues
//! served by strict priority (SP), a credit-based shaper (CBS), and a CBS whose
//! credit is frozen while higher-priority traffic transmits. Four analytic
//! routes are provided: the min-plus bound `H(α, β)`, the max-plus bound
//! `V(g1, g2)`, the mapped bound `V(α↓(·+l^m), β↑)`, and the integrated bound
//! `V(α↓, g)` for `g^x`-servers.
//!
//! Every claim the bounds rest on is checkable against an exact-arithmetic
//! packet-level simulator ([`sim`]) through the trace-conformance checkers in
//! [`conformance`]. All arithmetic is on arbitrary-precision rationals; there
//! is no floating point outside of display helpers.

pub mod bounds;
pub mod conformance;
pub mod curve;
pub mod error;
pub mod models;
pub mod rational;
pub mod sim;
pub mod tsn;

pub use bounds::{
    bound_integrated, bound_mapped, bound_max_plus, bound_min_plus, compare_table, BoundReport,
};
pub use conformance::{DelayStats, PacketTrace, Violation};
pub use curve::{Curve, Side};
pub use error::{Error, Result};
pub use models::{FlowSpec, GxServer, ServerModel, TrafficModel};
pub use rational::{q, Extended, Rational};
pub use sim::{SimResult, TrafficPattern};
pub use tsn::{AnalyzerResult, PortConfig, QueueConfig, QueueContext, Selection};
