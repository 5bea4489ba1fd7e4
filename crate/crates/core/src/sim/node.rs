use rand::Rng;

use super::config::TbJitter;
use crate::model::{SelectionProbs, State};

/// Whole ticks for a duration in ms, never less than `min`.
pub(crate) fn to_ticks(ms: f64, min: u64) -> u64 {
    (ms.round() as u64).max(min)
}

/// Broadcast length for one event: a uniform draw when jitter is on.
pub fn apply_tb_jitter<R: Rng + ?Sized>(base_tb: f64, jitter: &TbJitter, rng: &mut R) -> f64 {
    match *jitter {
        TbJitter::Off => base_tb,
        TbJitter::Uniform { min_ms, max_ms } if min_ms == max_ms => min_ms,
        TbJitter::Uniform { min_ms, max_ms } => rng.gen_range(min_ms..=max_ms),
    }
}

/// Processing time of a scan that received `msgs` messages. All of it is
/// blind time after the listening period.
pub fn processing_stretch(base_t_comp: f64, msgs: u32, proc_cost_per_msg: f64) -> f64 {
    base_t_comp + proc_cost_per_msg * f64::from(msgs)
}

/// Next state, drawn independently of the current one.
pub fn draw_state<R: Rng + ?Sized>(rho: &SelectionProbs, rng: &mut R) -> State {
    let u: f64 = rng.gen();
    if u < rho.rho_b {
        State::Broadcast
    } else if u < rho.rho_b + rho.rho_s || rho.rho_n == 0.0 {
        State::Scan
    } else {
        State::Networking
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeState {
    pub state: State,
    /// Ticks already spent in the current event.
    pub elapsed: u64,
    /// Total ticks of the current event. For a scan this is only known once
    /// listening ends and the processing time is fixed.
    pub duration: Option<u64>,
    /// Spacing of beacon starts in the current broadcast, ms.
    pub slot_ms: f64,
    /// Next channel index (0-based) to transmit on.
    pub cursor: u32,
    /// Elapsed tick of the next beacon, `u64::MAX` when none is left.
    pub next_beacon: u64,
    /// Listening ticks of the current scan; blind from here on.
    pub listen_ticks: u64,
    pub pending_rx: u32,
    /// 1-based.
    pub scan_channel: u32,
}

impl NodeState {
    pub(crate) fn new(scan_channel: u32) -> Self {
        NodeState {
            state: State::Scan,
            elapsed: 0,
            duration: None,
            slot_ms: 0.0,
            cursor: 0,
            next_beacon: u64::MAX,
            listen_ticks: 0,
            pending_rx: 0,
            scan_channel,
        }
    }

    pub fn is_listening(&self) -> bool {
        self.state == State::Scan && self.elapsed < self.listen_ticks
    }

    /// Tick offset of channel index `c` within the current broadcast.
    pub fn beacon_offset(&self, c: u32) -> u64 {
        (f64::from(c) * self.slot_ms + 1e-9).floor() as u64
    }

    /// Points the cursor at the first beacon not before the current tick.
    pub(crate) fn seek_beacon(&mut self, n_channels: u32) {
        while self.cursor < n_channels && self.beacon_offset(self.cursor) < self.elapsed {
            self.cursor += 1;
        }
        self.next_beacon = if self.state == State::Broadcast && self.cursor < n_channels {
            self.beacon_offset(self.cursor)
        } else {
            u64::MAX
        };
    }

    /// Channel index transmitted this tick, advancing the cursor.
    pub(crate) fn take_beacon(&mut self, n_channels: u32) -> Option<u32> {
        if self.elapsed != self.next_beacon {
            return None;
        }
        let c = self.cursor;
        self.cursor += 1;
        self.next_beacon = if self.cursor < n_channels { self.beacon_offset(self.cursor) } else { u64::MAX };
        Some(c)
    }

    /// Ticks from now during which this node neither transmits nor changes
    /// phase.
    pub(crate) fn quiet_ticks(&self) -> u64 {
        let mut until = self.next_beacon;
        if let Some(d) = self.duration {
            until = until.min(d - 1);
        } else if self.state == State::Scan {
            until = until.min(self.listen_ticks - 1);
        }
        until.saturating_sub(self.elapsed)
    }

    pub fn is_done(&self) -> bool {
        self.duration.is_some_and(|d| self.elapsed >= d)
    }
}
