//! Task allocation and charging-rendezvous toolkit for heterogeneous
//! air-ground (UAV/UGV) fleets in mobile crowdsensing.
//!
//! The crate is organized around two allocation regimes plus their shared
//! machinery:
//!
//! - [`famt`] — few agents, many tasks: each agent takes a bundle of `q`
//!   tasks. Solved over a layered flow network ([`mcmf`]) whose edge costs
//!   are shortest visiting paths ([`tour`]).
//! - [`maft`] — many agents, few tasks: region-level integer assignment
//!   minimizing a weighted blend of travel time and distance, solved by
//!   branch-and-bound over an exact LP relaxation.
//! - [`charging`] — discrete-time UAV/UGV recharging rendezvous simulation.
//! - [`scenario`] — seeded scenario generation and geo-coordinate ingestion.
//! - [`model`] — the shared domain types.

pub mod charging;
pub mod famt;
pub mod maft;
pub mod mcmf;
pub mod model;
pub mod scenario;
pub mod tour;

pub use model::{Agent, AgentKind, CapabilityVector, FamtScenario, Position, Task};
