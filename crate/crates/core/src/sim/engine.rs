use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::config::{distance, SimConfig, SimError, Track, TICK_MS};
use super::metrics::{Reception, SimMetrics};
use super::node::{apply_tb_jitter, draw_state, processing_stretch, to_ticks, NodeState};
use crate::link::{is_received, rssi, LinkParams};
use crate::model::{SelectionProbs, State};

/// Stream reserved for link shadowing; node `i` uses stream `i + 1`.
const LINK_STREAM: u64 = 0;

/// Seed of replica `r` of a run seeded with `seed`.
pub fn replica_seed(seed: u64, r: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = seed ^ r.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transmission {
    pub sender: usize,
    /// 1-based.
    pub channel: u32,
}

/// What happened during one tick.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TickOutcome {
    pub transmissions: Vec<Transmission>,
    pub receptions: Vec<Reception>,
}

/// Lockstep simulation of every node, one tick at a time.
pub struct Simulator {
    config: SimConfig,
    selections: Vec<SelectionProbs>,
    tracks: Vec<Track>,
    nodes: Vec<NodeState>,
    node_rngs: Vec<ChaCha8Rng>,
    link_rng: ChaCha8Rng,
    t: u64,
    end: u64,
    window_ticks: u64,
    last_rx: Vec<Option<u64>>,
    metrics: SimMetrics,
    // per-tick scratch, indexed by 0-based channel
    by_channel: Vec<Vec<usize>>,
    listeners: Vec<Vec<usize>>,
    touched: Vec<usize>,
}

impl Simulator {
    pub fn new(config: SimConfig) -> Result<Self, SimError> {
        config.validate()?;
        let selections = config.selections()?;
        let n = config.n_nodes;
        let n_ch = config.protocol.n_channels;
        let end = config.horizon_ticks()?;
        let window_ticks = to_ticks(config.window.t_w / TICK_MS, 1);
        let mut node_rngs = Vec::with_capacity(n);
        for i in 0..n {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(i as u64 + 1);
            node_rngs.push(rng);
        }
        let mut link_rng = ChaCha8Rng::seed_from_u64(config.seed);
        link_rng.set_stream(LINK_STREAM);

        let mut sim = Simulator {
            tracks: (0..n).map(|i| config.track(i)).collect(),
            nodes: (0..n).map(|i| NodeState::new(config.scan_channel(i))).collect(),
            metrics: SimMetrics::new(n, n_ch, end, window_ticks),
            selections,
            node_rngs,
            link_rng,
            t: 0,
            end,
            window_ticks,
            last_rx: vec![None; n],
            by_channel: vec![Vec::new(); n_ch as usize],
            listeners: vec![Vec::new(); n_ch as usize],
            touched: Vec::new(),
            config,
        };
        for i in 0..n {
            sim.start_stationary(i);
        }
        Ok(sim)
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn nodes(&self) -> &[NodeState] {
        &self.nodes
    }

    pub fn time(&self) -> u64 {
        self.t
    }

    pub fn is_finished(&self) -> bool {
        self.t >= self.end
    }

    pub fn metrics(&self) -> &SimMetrics {
        &self.metrics
    }

    pub fn into_metrics(self) -> SimMetrics {
        self.metrics
    }

    /// Puts a node at the start of an event in `state`, bypassing the draw.
    pub fn force_state(&mut self, node: usize, state: State) {
        self.enter(node, state);
    }

    fn event_ticks(&self, state: State) -> u64 {
        let p = &self.config.protocol;
        match state {
            State::Broadcast => to_ticks(self.config.mean_tb(), 1),
            State::Scan => to_ticks(p.t_rx, 1) + to_ticks(p.t_comp_base, 0),
            State::Networking => to_ticks(p.t_n, 1),
        }
    }

    /// Starts a node somewhere inside an event, with the state picked in
    /// proportion to its time share and the age uniform over the event, so
    /// the run begins in steady state and nodes are out of phase.
    fn start_stationary(&mut self, i: usize) {
        let rho = self.selections[i];
        let weights = State::ALL.map(|s| rho.get(s) * self.event_ticks(s) as f64);
        let total: f64 = weights.iter().sum();
        let u = self.node_rngs[i].gen::<f64>() * total;
        let state = if u < weights[0] {
            State::Broadcast
        } else if u < weights[0] + weights[1] || weights[2] == 0.0 {
            State::Scan
        } else {
            State::Networking
        };
        self.enter(i, state);
        let p = self.config.protocol;
        let node_len = match state {
            State::Scan => to_ticks(p.t_rx, 1) + to_ticks(p.t_comp_base, 0),
            _ => self.nodes[i].duration.expect("set on entry"),
        };
        let age = self.node_rngs[i].gen_range(0..node_len);
        let node = &mut self.nodes[i];
        node.elapsed = age;
        match state {
            State::Broadcast => node.seek_beacon(p.n_channels),
            State::Scan if age >= node.listen_ticks => {
                node.duration = Some(node_len);
            }
            _ => {}
        }
    }

    fn enter(&mut self, i: usize, state: State) {
        let p = self.config.protocol;
        let rng = &mut self.node_rngs[i];
        let node = &mut self.nodes[i];
        node.state = state;
        node.elapsed = 0;
        node.cursor = 0;
        node.pending_rx = 0;
        match state {
            State::Broadcast => {
                let tb = apply_tb_jitter(p.t_b, &self.config.imperfections.tb_jitter, rng);
                node.duration = Some(to_ticks(tb / TICK_MS, 1));
                node.slot_ms = tb / f64::from(p.n_channels);
            }
            State::Scan => {
                node.listen_ticks = to_ticks(p.t_rx / TICK_MS, 1);
                node.duration = None;
            }
            State::Networking => {
                node.duration = Some(to_ticks(p.t_n / TICK_MS, 1));
                self.metrics.network_event_count += 1;
            }
        }
        node.seek_beacon(p.n_channels);
    }

    fn position(&self, i: usize) -> [f64; 3] {
        self.tracks[i].position_at(self.t as f64 * TICK_MS)
    }

    /// Signal strength of `sender` at `receiver`, drawing shadowing if enabled.
    fn link_rssi(&mut self, link: &LinkParams, sender: usize, receiver: usize) -> f64 {
        let d = distance(self.position(sender), self.position(receiver)).max(link.d0);
        let draw = (link.shadowing_sigma > 0.0).then(|| self.link_rng.sample::<f64, _>(StandardNormal));
        rssi(link, d, draw).expect("distance clamped to d0")
    }

    /// Advances every node by one tick.
    pub fn step(&mut self) -> TickOutcome {
        let mut out = TickOutcome::default();
        self.tick(Some(&mut out));
        out
    }

    fn tick(&mut self, mut out: Option<&mut TickOutcome>) {
        let t = self.t;
        let n_ch = self.config.protocol.n_channels;
        let buffer = self.config.imperfections.tx_buffer_frames;

        for &c in &self.touched {
            self.by_channel[c].clear();
            self.listeners[c].clear();
        }
        self.touched.clear();
        let (mut not_scanning, mut blind, mut listening) = (0u64, 0u64, 0u64);
        let mut tx_this_tick = 0u64;
        for (i, node) in self.nodes.iter_mut().enumerate() {
            self.metrics.state_ticks[i][node.state.index()] += 1;
            match node.state {
                State::Scan if node.is_listening() => listening += 1,
                State::Scan => blind += 1,
                _ => not_scanning += 1,
            }
            if let Some(c) = node.take_beacon(n_ch) {
                if buffer.is_some_and(|cap| c >= cap) {
                    self.metrics.tx_dropped += 1;
                    continue;
                }
                if self.by_channel[c as usize].is_empty() {
                    self.touched.push(c as usize);
                }
                self.by_channel[c as usize].push(i);
                self.metrics.tx_per_channel[c as usize] += 1;
                self.metrics.airtime_ticks[i] += 1;
                tx_this_tick += 1;
                if let Some(o) = out.as_deref_mut() {
                    o.transmissions.push(Transmission { sender: i, channel: c + 1 });
                }
            }
        }
        self.metrics.tx_count += tx_this_tick;

        if tx_this_tick > 0 {
            for (i, node) in self.nodes.iter().enumerate() {
                if node.is_listening() {
                    let c = node.scan_channel as usize - 1;
                    if !self.by_channel[c].is_empty() {
                        self.listeners[c].push(i);
                    }
                }
            }
            let link = self.config.link;
            let losses = &mut self.metrics.losses;
            // Senders are broadcasting, so they count among `not_scanning`.
            losses.state_mismatch += tx_this_tick * (not_scanning - 1);
            losses.blind += tx_this_tick * blind;
            for ti in 0..self.touched.len() {
                let c = self.touched[ti];
                let e = self.by_channel[c].len() as u64;
                if e >= 2 {
                    self.metrics.beacon_overlaps += e;
                }
                let here = self.listeners[c].len() as u64;
                self.metrics.losses.channel_mismatch += e * (listening - here);
                for li in 0..self.listeners[c].len() {
                    let r = self.listeners[c][li];
                    let mut accepted: Option<(usize, Option<f64>)> = None;
                    let mut n_accepted = 0u64;
                    for si in 0..self.by_channel[c].len() {
                        let s = self.by_channel[c][si];
                        let level = match &link {
                            None => None,
                            Some(l) => {
                                let v = self.link_rssi(l, s, r);
                                if !is_received(l, v) {
                                    self.metrics.losses.out_of_range += 1;
                                    continue;
                                }
                                Some(v)
                            }
                        };
                        n_accepted += 1;
                        accepted = Some((s, level));
                    }
                    match (n_accepted, accepted) {
                        (1, Some((s, level))) => {
                            let rec = Reception {
                                time_ms: t,
                                receiver: r,
                                sender: s,
                                channel: c as u32 + 1,
                                rssi_dbm: level,
                            };
                            self.deliver(rec);
                            if let Some(o) = out.as_deref_mut() {
                                o.receptions.push(rec);
                            }
                        }
                        (0, _) => {}
                        (n, _) => {
                            self.metrics.losses.collision += n;
                            self.metrics.collisions_observed += n;
                        }
                    }
                }
            }
        }

        self.advance();
        self.t += 1;
    }

    fn deliver(&mut self, rec: Reception) {
        let r = rec.receiver;
        debug_assert!(self.nodes[r].is_listening(), "reception outside a listening period");
        self.nodes[r].pending_rx += 1;
        let m = &mut self.metrics;
        m.rx_count += 1;
        m.rx_per_node[r] += 1;
        let w = (rec.time_ms / self.window_ticks) as usize;
        if let Some(slot) = m.per_window_throughput[r].get_mut(w) {
            *slot += 1;
        }
        if let Some(v) = rec.rssi_dbm {
            m.rssi_sum += v;
            m.rssi_count += 1;
        }
        if self.config.record_receptions {
            if let Some(prev) = self.last_rx[r] {
                m.interarrival_ms[r].push(rec.time_ms - prev);
            }
            m.receptions.push(rec);
        }
        self.last_rx[r] = Some(rec.time_ms);
    }

    fn advance(&mut self) {
        let p = self.config.protocol;
        let cost = self.config.imperfections.proc_cost_per_msg;
        for i in 0..self.nodes.len() {
            let node = &mut self.nodes[i];
            node.elapsed += 1;
            if node.state == State::Scan && node.duration.is_none() && node.elapsed >= node.listen_ticks {
                let blind = processing_stretch(p.t_comp_base, node.pending_rx, cost);
                node.duration = Some(node.listen_ticks + to_ticks(blind / TICK_MS, 0));
            }
            if node.is_done() {
                let from = node.state;
                let next = draw_state(&self.selections[i], &mut self.node_rngs[i]);
                self.metrics.transitions[from.index()][next.index()] += 1;
                self.enter(i, next);
            }
        }
    }

    /// Runs to the horizon. Stretches of ticks in which no node transmits or
    /// changes phase are accounted in bulk; the result is identical to calling
    /// [`Simulator::step`] until [`Simulator::is_finished`].
    pub fn run_to_end(mut self) -> SimMetrics {
        while self.t < self.end {
            let quiet = self.nodes.iter().map(NodeState::quiet_ticks).min().unwrap_or(0);
            let quiet = quiet.min(self.end - self.t);
            if quiet > 0 {
                self.skip(quiet);
            } else {
                self.tick(None);
            }
        }
        self.metrics
    }

    fn skip(&mut self, ticks: u64) {
        for (i, node) in self.nodes.iter_mut().enumerate() {
            self.metrics.state_ticks[i][node.state.index()] += ticks;
            node.elapsed += ticks;
        }
        self.t += ticks;
    }
}

/// Runs a whole simulation.
pub fn run(config: &SimConfig) -> Result<SimMetrics, SimError> {
    Ok(Simulator::new(config.clone())?.run_to_end())
}

/// Independent replicas of a scenario, differing only in seed. Replica 0 is
/// the plain run; later ones are seeded with [`replica_seed`]. Phases between
/// nodes lock once a run starts, so ensemble statistics over node phase need
/// several replicas.
pub fn run_replicas(config: &SimConfig, replicas: u64) -> Result<Vec<SimMetrics>, SimError> {
    use rayon::prelude::*;
    config.validate()?;
    (0..replicas.max(1))
        .into_par_iter()
        .map(|r| {
            let mut c = config.clone();
            if r > 0 {
                c.seed = replica_seed(config.seed, r);
            }
            run(&c)
        })
        .collect()
}
