//! Position broadcasting for small UAVs over Wi-Fi beacons: the closed-form
//! protocol model, the SSID codec, the path-loss link model, a tick-based
//! simulator and the statistics that turn its output into throughput,
//! collision and inter-arrival figures.

// `!(x > 0.0)` rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod codec;
pub mod link;
pub mod model;
pub mod sim;
pub mod stats;

pub use codec::{decode, encode, BeaconPayload, DecodeError, EncodeError, PositionReport};
pub use link::{fit_path_loss, is_received, rssi, LinkError, LinkParams, PathLossFit, RssiSample};
pub use model::{
    beacon_probability, collision_probability, expected_events, expected_successes, interarrival_rate,
    selection_probs, steady_state_shares, success_probability, ModelError, ProtocolParams, SelectionProbs, State,
    StateShares, WindowSpec,
};
pub use sim::{run, Behavior, Horizon, Imperfections, SimConfig, SimError, SimMetrics, TbJitter, Track};
pub use stats::{ExpFit, Histogram, SaturationPoint, StatsError, SweepPoint, SweepResult};
