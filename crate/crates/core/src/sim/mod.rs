//! Tick-driven behavioral simulation of a group of nodes running the
//! broadcast/scan/networking protocol.
//!
//! Every node broadcasts one beacon on each channel in turn and scans a single
//! fixed channel. Beacons occupy one 1 ms tick; two beacons on the same tick
//! and channel destroy each other at every receiver that would have accepted
//! both. Networking occupies the radio without interfering with beacons.

mod config;
mod engine;
mod metrics;
mod node;

pub use config::{
    distance, Behavior, Horizon, Imperfections, SimConfig, SimError, TbJitter, Track, Waypoint, TICK_MS,
};
pub use engine::{replica_seed, run, run_replicas, Simulator, TickOutcome, Transmission};
pub use metrics::{LossCounters, Reception, SimMetrics};
pub use node::{apply_tb_jitter, draw_state, processing_stretch, NodeState};
