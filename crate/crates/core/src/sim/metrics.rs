use serde::{Deserialize, Serialize};

use crate::model::State;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Reception {
    pub time_ms: u64,
    pub receiver: usize,
    pub sender: usize,
    pub channel: u32,
    /// `None` on an ideal radio.
    pub rssi_dbm: Option<f64>,
}

/// Why a (beacon, other node) pair did not end in a reception. Every pair
/// lands in exactly one bucket or in `rx_count`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct LossCounters {
    /// Receiver was broadcasting or networking.
    pub state_mismatch: u64,
    /// Receiver was scanning but inside its processing blackout.
    pub blind: u64,
    /// Receiver was listening on another channel.
    pub channel_mismatch: u64,
    /// Link model rejected the signal.
    pub out_of_range: u64,
    /// Another accepted beacon hit the receiver on the same tick and channel.
    pub collision: u64,
}

impl LossCounters {
    pub fn total(&self) -> u64 {
        self.state_mismatch + self.blind + self.channel_mismatch + self.out_of_range + self.collision
    }

    fn add(&mut self, o: &LossCounters) {
        self.state_mismatch += o.state_mismatch;
        self.blind += o.blind;
        self.channel_mismatch += o.channel_mismatch;
        self.out_of_range += o.out_of_range;
        self.collision += o.collision;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimMetrics {
    pub n_nodes: usize,
    pub n_channels: u32,
    pub duration_ms: u64,
    pub window_ms: u64,
    /// Empty unless receptions were recorded.
    pub receptions: Vec<Reception>,
    pub rx_count: u64,
    pub tx_count: u64,
    /// Beacons that never left a full transmit buffer.
    pub tx_dropped: u64,
    pub network_event_count: u64,
    /// Listener-side losses to overlapping beacons; equals `losses.collision`.
    pub collisions_observed: u64,
    /// Beacons that shared their tick and channel with at least one other
    /// beacon, regardless of who was listening.
    pub beacon_overlaps: u64,
    pub losses: LossCounters,
    pub tx_per_channel: Vec<u64>,
    /// Per node, ticks spent in broadcast, scan and networking.
    pub state_ticks: Vec<[u64; 3]>,
    /// Per node, ticks of broadcast time spent on the air.
    pub airtime_ticks: Vec<u64>,
    /// Completed transitions, `[from][to]`, summed over nodes.
    pub transitions: [[u64; 3]; 3],
    /// Per receiver, receptions in each complete window.
    pub per_window_throughput: Vec<Vec<u32>>,
    pub rx_per_node: Vec<u64>,
    /// Per receiver gaps between consecutive receptions, ms. Empty unless
    /// receptions were recorded.
    pub interarrival_ms: Vec<Vec<u64>>,
    pub rssi_sum: f64,
    pub rssi_count: u64,
}

impl SimMetrics {
    pub(crate) fn new(n_nodes: usize, n_channels: u32, duration_ms: u64, window_ms: u64) -> Self {
        let windows = (duration_ms / window_ms) as usize;
        SimMetrics {
            n_nodes,
            n_channels,
            duration_ms,
            window_ms,
            receptions: Vec::new(),
            rx_count: 0,
            tx_count: 0,
            tx_dropped: 0,
            network_event_count: 0,
            collisions_observed: 0,
            beacon_overlaps: 0,
            losses: LossCounters::default(),
            tx_per_channel: vec![0; n_channels as usize],
            state_ticks: vec![[0; 3]; n_nodes],
            airtime_ticks: vec![0; n_nodes],
            transitions: [[0; 3]; 3],
            per_window_throughput: vec![vec![0; windows]; n_nodes],
            rx_per_node: vec![0; n_nodes],
            interarrival_ms: vec![Vec::new(); n_nodes],
            rssi_sum: 0.0,
            rssi_count: 0,
        }
    }

    /// (beacon, other node) pairs: every transmitted beacon could have been
    /// heard by each of the other nodes.
    pub fn potential_pairs(&self) -> u64 {
        self.tx_count * (self.n_nodes as u64).saturating_sub(1)
    }

    pub fn window_count(&self) -> usize {
        self.per_window_throughput.first().map_or(0, Vec::len)
    }

    /// Mean receptions per window per receiver.
    pub fn mean_throughput(&self) -> f64 {
        let windows = self.window_count();
        if windows == 0 || self.n_nodes == 0 {
            return 0.0;
        }
        let total: u64 = self.per_window_throughput.iter().flatten().map(|&c| u64::from(c)).sum();
        total as f64 / (windows * self.n_nodes) as f64
    }

    /// Mean receptions per window from one sender at one receiver.
    pub fn mean_link_throughput(&self) -> f64 {
        if self.n_nodes < 2 {
            return 0.0;
        }
        self.mean_throughput() / (self.n_nodes - 1) as f64
    }

    /// Time shares over all nodes.
    pub fn state_shares(&self) -> [f64; 3] {
        let mut t = [0u64; 3];
        for s in &self.state_ticks {
            for i in 0..3 {
                t[i] += s[i];
            }
        }
        let total: u64 = t.iter().sum();
        if total == 0 {
            return [0.0; 3];
        }
        t.map(|x| x as f64 / total as f64)
    }

    pub fn ticks_in(&self, state: State) -> u64 {
        self.state_ticks.iter().map(|s| s[state.index()]).sum()
    }

    /// Fraction of beacons that overlapped another beacon on their channel.
    pub fn overlap_fraction(&self) -> f64 {
        if self.tx_count == 0 {
            0.0
        } else {
            self.beacon_overlaps as f64 / self.tx_count as f64
        }
    }

    /// Networking events started per node per second.
    pub fn networking_rate(&self) -> f64 {
        if self.duration_ms == 0 || self.n_nodes == 0 {
            return 0.0;
        }
        self.network_event_count as f64 * 1000.0 / (self.duration_ms as f64 * self.n_nodes as f64)
    }

    pub fn mean_rssi(&self) -> Option<f64> {
        (self.rssi_count > 0).then(|| self.rssi_sum / self.rssi_count as f64)
    }

    /// Pools counters of runs of the same scenario. Reception logs are
    /// concatenated without shifting their timestamps. `None` when `runs` is
    /// empty or the runs differ in node or channel count.
    pub fn merge(runs: &[SimMetrics]) -> Option<SimMetrics> {
        let first = runs.first()?;
        if runs.iter().any(|r| r.n_nodes != first.n_nodes || r.n_channels != first.n_channels) {
            return None;
        }
        let mut m = first.clone();
        for r in &runs[1..] {
            m.duration_ms += r.duration_ms;
            m.receptions.extend_from_slice(&r.receptions);
            m.rx_count += r.rx_count;
            m.tx_count += r.tx_count;
            m.tx_dropped += r.tx_dropped;
            m.network_event_count += r.network_event_count;
            m.collisions_observed += r.collisions_observed;
            m.beacon_overlaps += r.beacon_overlaps;
            m.losses.add(&r.losses);
            m.rssi_sum += r.rssi_sum;
            m.rssi_count += r.rssi_count;
            for i in 0..3 {
                for j in 0..3 {
                    m.transitions[i][j] += r.transitions[i][j];
                }
            }
            for (a, b) in m.tx_per_channel.iter_mut().zip(&r.tx_per_channel) {
                *a += b;
            }
            for (node, (a, b)) in m.state_ticks.iter_mut().zip(&r.state_ticks).enumerate() {
                for i in 0..3 {
                    a[i] += b[i];
                }
                m.airtime_ticks[node] += r.airtime_ticks[node];
                m.rx_per_node[node] += r.rx_per_node[node];
                m.per_window_throughput[node].extend_from_slice(&r.per_window_throughput[node]);
                m.interarrival_ms[node].extend_from_slice(&r.interarrival_ms[node]);
            }
        }
        Some(m)
    }
}
