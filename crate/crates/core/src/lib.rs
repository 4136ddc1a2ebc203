//! Activation scheduling for battery-bounded monitoring devices on network graphs.
//!
//! A network is an undirected [`graph::NetworkGraph`]. Devices sit on a subset of its
//! nodes and cover every node or edge target within a hop range. Each device may be
//! active in at most `sigma` of `k` time slots; a schedule assigns the slots. The crate
//! turns the network into a bipartite [`coverage::CoverageGraph`], scores schedules as
//! a labeling problem ([`schedule`]) and solves it with a greedy heuristic
//! ([`greedy`]), binary log-linear learning over a potential game ([`game`]) or
//! exhaustive enumeration on tiny inputs ([`oracle`]).
//!
//! [`domination`] covers the complete-coverage special case through dominating sets,
//! and [`randnet`] holds random graph generators plus closed forms for random
//! scheduling.

pub mod coverage;
pub mod domination;
pub mod error;
pub mod game;
pub mod graph;
pub mod greedy;
pub mod oracle;
pub mod randnet;
pub mod rng;
pub mod schedule;
pub mod verify;

pub use error::{Error, Result};
