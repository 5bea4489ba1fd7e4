use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::link::LinkParams;
use crate::model::{selection_probs, ModelError, ProtocolParams, SelectionProbs, State, StateShares, WindowSpec};

/// Simulation time resolution.
pub const TICK_MS: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Link(#[from] crate::link::LinkError),
}

fn invalid<T>(msg: impl Into<String>) -> Result<T, SimError> {
    Err(SimError::InvalidConfig(msg.into()))
}

/// How a node picks its next state: either directly by selection
/// probabilities or by the time shares it should end up with.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Behavior {
    Selection(SelectionProbs),
    Shares(StateShares),
}

impl Behavior {
    pub fn selection(&self, p: &ProtocolParams) -> Result<SelectionProbs, ModelError> {
        match self {
            Behavior::Selection(s) => {
                s.validate()?;
                Ok(*s)
            }
            Behavior::Shares(sh) => selection_probs(sh, p),
        }
    }
}

impl From<StateShares> for Behavior {
    fn from(s: StateShares) -> Self {
        Behavior::Shares(s)
    }
}

impl From<SelectionProbs> for Behavior {
    fn from(s: SelectionProbs) -> Self {
        Behavior::Selection(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TbJitter {
    #[default]
    Off,
    Uniform { min_ms: f64, max_ms: f64 },
}

impl TbJitter {
    /// Range measured on the reference hardware.
    pub fn measured() -> Self {
        TbJitter::Uniform { min_ms: 24.0, max_ms: 39.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Imperfections {
    pub tb_jitter: TbJitter,
    /// Blind time appended to a scan per message received in it, ms.
    pub proc_cost_per_msg: f64,
    /// Frames the radio can hold per broadcast event; later channels are
    /// dropped when it is full.
    pub tx_buffer_frames: Option<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Waypoint {
    pub t_ms: f64,
    pub pos: [f64; 3],
}

/// Node position over time, meters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Track {
    Static([f64; 3]),
    /// Piecewise-linear; held constant before the first and after the last point.
    Waypoints(Vec<Waypoint>),
}

impl Default for Track {
    fn default() -> Self {
        Track::Static([0.0; 3])
    }
}

impl Track {
    pub fn position_at(&self, t_ms: f64) -> [f64; 3] {
        match self {
            Track::Static(p) => *p,
            Track::Waypoints(w) => {
                let i = w.partition_point(|p| p.t_ms <= t_ms);
                if i == 0 {
                    return w[0].pos;
                }
                if i == w.len() {
                    return w[w.len() - 1].pos;
                }
                let (a, b) = (&w[i - 1], &w[i]);
                let f = (t_ms - a.t_ms) / (b.t_ms - a.t_ms);
                [0, 1, 2].map(|j| a.pos[j] + f * (b.pos[j] - a.pos[j]))
            }
        }
    }

    fn validate(&self) -> Result<(), SimError> {
        if let Track::Waypoints(w) = self {
            if w.is_empty() {
                return invalid("waypoint track is empty");
            }
            if w.windows(2).any(|p| !(p[1].t_ms > p[0].t_ms)) {
                return invalid("waypoint times must be strictly increasing");
            }
        }
        Ok(())
    }
}

pub fn distance(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Horizon {
    /// Mean number of state transitions per node. Converted to a duration from
    /// the slowest node's mean event length.
    Transitions(u64),
    DurationMs(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub protocol: ProtocolParams,
    pub behavior: Behavior,
    /// Per-node behaviors that replace `behavior`, keyed by node index.
    pub overrides: Vec<(usize, Behavior)>,
    pub n_nodes: usize,
    /// 1-based scan channel per node; empty puts everyone on channel 1.
    pub scan_channels: Vec<u32>,
    /// One track per node; empty puts everyone at the origin.
    pub tracks: Vec<Track>,
    /// `None` is an ideal radio: every node hears every other node.
    pub link: Option<LinkParams>,
    pub horizon: Horizon,
    pub seed: u64,
    pub imperfections: Imperfections,
    pub window: WindowSpec,
    /// Keep the reception log and inter-arrival gaps. Large sweeps turn this
    /// off and rely on the counters.
    pub record_receptions: bool,
}

impl SimConfig {
    pub fn new(protocol: ProtocolParams, behavior: impl Into<Behavior>, n_nodes: usize) -> Self {
        SimConfig {
            protocol,
            behavior: behavior.into(),
            overrides: Vec::new(),
            n_nodes,
            scan_channels: Vec::new(),
            tracks: Vec::new(),
            link: None,
            horizon: Horizon::Transitions(1_000_000),
            seed: 0,
            imperfections: Imperfections::default(),
            window: WindowSpec::default(),
            record_receptions: true,
        }
    }

    /// Two nodes with the reference timings, equal broadcast and scan shares
    /// and an ideal radio.
    pub fn baseline() -> Self {
        SimConfig::new(
            ProtocolParams::reference(),
            StateShares::new(0.5, 0.5, 0.0).expect("valid shares"),
            2,
        )
    }

    pub fn with_horizon(mut self, horizon: Horizon) -> Self {
        self.horizon = horizon;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn behavior_of(&self, node: usize) -> Behavior {
        self.overrides
            .iter()
            .rev()
            .find(|(i, _)| *i == node)
            .map(|(_, b)| *b)
            .unwrap_or(self.behavior)
    }

    pub fn scan_channel(&self, node: usize) -> u32 {
        self.scan_channels.get(node).copied().unwrap_or(1)
    }

    pub fn track(&self, node: usize) -> Track {
        self.tracks.get(node).cloned().unwrap_or_default()
    }

    /// Selection probabilities for every node.
    pub fn selections(&self) -> Result<Vec<SelectionProbs>, SimError> {
        (0..self.n_nodes)
            .map(|i| self.behavior_of(i).selection(&self.protocol).map_err(SimError::from))
            .collect()
    }

    /// Expected broadcast event length in ms, after jitter.
    pub fn mean_tb(&self) -> f64 {
        match self.imperfections.tb_jitter {
            TbJitter::Off => self.protocol.t_b,
            TbJitter::Uniform { min_ms, max_ms } => 0.5 * (min_ms + max_ms),
        }
    }

    /// Simulated duration in ticks.
    pub fn horizon_ticks(&self) -> Result<u64, SimError> {
        let ms = match self.horizon {
            Horizon::DurationMs(d) => d,
            Horizon::Transitions(n) => {
                let mut longest: f64 = 0.0;
                for rho in self.selections()? {
                    let mean = rho.rho_b * self.mean_tb()
                        + rho.rho_s * self.protocol.t_s
                        + rho.rho_n * self.protocol.t_n;
                    longest = longest.max(mean);
                }
                n as f64 * longest
            }
        };
        Ok((ms / TICK_MS).ceil() as u64)
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let p = &self.protocol;
        p.validate()?;
        if self.n_nodes == 0 {
            return invalid("n_nodes must be at least 1");
        }
        if p.t_beacon > TICK_MS {
            return invalid(format!("t_beacon {} ms exceeds the {TICK_MS} ms tick", p.t_beacon));
        }
        let min_tb = match self.imperfections.tb_jitter {
            TbJitter::Off => p.t_b,
            TbJitter::Uniform { min_ms, max_ms } => {
                if !(min_ms.is_finite() && max_ms.is_finite() && min_ms > 0.0 && min_ms <= max_ms) {
                    return invalid(format!("jitter bounds [{min_ms}, {max_ms}] must be positive and ordered"));
                }
                min_ms
            }
        };
        if min_tb / f64::from(p.n_channels) < TICK_MS {
            return invalid(format!(
                "broadcast of {min_tb} ms cannot place {} beacons in distinct ticks",
                p.n_channels
            ));
        }
        let imp = &self.imperfections;
        if !(imp.proc_cost_per_msg.is_finite() && imp.proc_cost_per_msg >= 0.0) {
            return invalid("proc_cost_per_msg must be >= 0");
        }
        if imp.tx_buffer_frames == Some(0) {
            return invalid("tx_buffer_frames must be positive");
        }
        for (i, _) in &self.overrides {
            if *i >= self.n_nodes {
                return invalid(format!("override for node {i} but only {} nodes", self.n_nodes));
            }
        }
        let selections = self.selections()?;
        for (i, rho) in selections.iter().enumerate() {
            if rho.get(State::Networking) > 0.0 && p.t_n <= 0.0 {
                return invalid(format!("node {i} selects networking with zero t_n"));
            }
        }
        if !self.scan_channels.is_empty() {
            if self.scan_channels.len() != self.n_nodes {
                return invalid(format!(
                    "{} scan channels given for {} nodes",
                    self.scan_channels.len(),
                    self.n_nodes
                ));
            }
            if let Some(c) = self.scan_channels.iter().find(|c| **c == 0 || **c > p.n_channels) {
                return invalid(format!("scan channel {c} outside 1..={}", p.n_channels));
            }
        }
        if !self.tracks.is_empty() && self.tracks.len() != self.n_nodes {
            return invalid(format!("{} tracks given for {} nodes", self.tracks.len(), self.n_nodes));
        }
        for t in &self.tracks {
            t.validate()?;
        }
        if let Some(link) = &self.link {
            link.validate()?;
        }
        match self.horizon {
            Horizon::Transitions(0) => return invalid("horizon must be positive"),
            Horizon::DurationMs(d) if !(d.is_finite() && d >= TICK_MS) => {
                return invalid("horizon duration must be at least one tick")
            }
            _ => {}
        }
        if self.window.t_w < TICK_MS {
            return invalid("window must be at least one tick");
        }
        Ok(())
    }
}
