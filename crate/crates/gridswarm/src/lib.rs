//! Deterministic grid simulator for swarm task allocation.
//!
//! A rectangular grid hosts a fixed swarm of agents and a set of task
//! vertices, each demanding some number of agents. Rounds are synchronous:
//! every agent proposes a transition from the previous round's snapshot,
//! conflicting task claims are settled (a task with residual demand `rd`
//! admits at most `rd` of its simultaneous claimants), then all moves apply
//! at once. A trial runs until total residual demand reaches zero.
//!
//! Three allocation policies are implemented:
//!
//! - **RW** ([`policy::RwParams`]): levy-walk foraging; agents claim any
//!   open task they sense.
//! - **HHTA** ([`hhta`]): house-hunting style recruitment through a home
//!   nest, with Home/Exploring/Recruiting/Committed agents.
//! - **PROP** ([`prop`]): a lattice of stationary propagators gossips task
//!   demands outward; mobile followers chase the propagated information.
//!
//! Everything is reproducible. A trial's master seed derives every random
//! draw through structurally keyed streams ([`rng::RngStream`]), so traces
//! are bit-identical across runs and independent of iteration order.
//!
//! All arithmetic is generic over the scalar type via [`Real`] (f32 or
//! f64); the `*64` aliases below pin the common choice.

mod error;
pub mod grid;
pub mod hhta;
pub mod levy;
pub mod num;
pub mod policy;
pub mod prop;
pub mod rng;
pub mod scenario;
pub mod special;
pub mod stats;
pub mod task;
pub mod testkit;

pub use error::ConfigError;
pub use num::Real;

pub type GridWorld64 = grid::GridWorld<f64>;
pub type Policy64 = policy::Policy<f64>;
pub type Scenario64 = scenario::Scenario<f64>;
pub type GridWorld32 = grid::GridWorld<f32>;
pub type Policy32 = policy::Policy<f32>;
