//! Plot-ready summaries of simulation runs: throughput histograms,
//! exponential inter-arrival fits, collision surfaces and parameter sweeps.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::link::{rssi, LinkParams};
use crate::model::{beacon_probability, collision_probability, ProtocolParams, SelectionProbs, StateShares, WindowSpec};
use crate::sim::{run_replicas, Behavior, Horizon, SimConfig, SimError, SimMetrics};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("no data to analyze")]
    EmptyData,
    #[error("insufficient data: need at least {needed} samples, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// Minimum inter-arrival samples for a fit.
pub const MIN_FIT_SAMPLES: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    /// `counts.len() + 1` strictly increasing edges; bin `i` is `[edges[i], edges[i+1])`.
    pub bin_edges: Vec<f64>,
    pub counts: Vec<u64>,
}

impl Histogram {
    /// Unit-width bins `[0,1), [1,2), ...` up to the largest value.
    pub fn integer<I: IntoIterator<Item = u64>>(values: I) -> Self {
        let mut counts: Vec<u64> = Vec::new();
        for v in values {
            let v = v as usize;
            if v >= counts.len() {
                counts.resize(v + 1, 0);
            }
            counts[v] += 1;
        }
        let bin_edges = (0..=counts.len()).map(|e| e as f64).collect();
        Histogram { bin_edges, counts }
    }

    /// Fixed-width bins starting at zero covering every value.
    pub fn uniform(values: &[f64], width: f64) -> Self {
        assert!(width > 0.0, "bin width must be positive");
        let max = values.iter().copied().fold(0.0, f64::max);
        let bins = ((max / width).floor() as usize) + 1;
        let mut counts = vec![0u64; bins];
        for &v in values {
            counts[((v / width).floor() as usize).min(bins - 1)] += 1;
        }
        let bin_edges = (0..=bins).map(|e| e as f64 * width).collect();
        Histogram { bin_edges, counts }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Density per bin; integrates to one over the edges.
    pub fn pdf(&self) -> Vec<f64> {
        let total = self.total() as f64;
        self.counts
            .iter()
            .zip(self.bin_edges.windows(2))
            .map(|(&c, e)| if total > 0.0 { c as f64 / (total * (e[1] - e[0])) } else { 0.0 })
            .collect()
    }

    /// Left edge of the most populated bin.
    pub fn mode(&self) -> Option<f64> {
        let (i, _) = self
            .counts
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))?;
        Some(self.bin_edges[i])
    }
}

/// Reception counts per receiver per window. When `w` matches the window the
/// run was recorded with the counters are used directly; otherwise they are
/// rebuilt from the reception log.
pub fn window_counts(metrics: &SimMetrics, w: &WindowSpec) -> Result<Vec<u64>, StatsError> {
    let width = w.t_w.round() as u64;
    if width == 0 {
        return Err(StatsError::InvalidInput("window shorter than a tick".into()));
    }
    if width == metrics.window_ms {
        let out: Vec<u64> = metrics.per_window_throughput.iter().flatten().map(|&c| u64::from(c)).collect();
        return if out.is_empty() { Err(StatsError::EmptyData) } else { Ok(out) };
    }
    if metrics.rx_count > 0 && metrics.receptions.is_empty() {
        return Err(StatsError::InvalidInput(format!(
            "run was windowed at {} ms without a reception log; cannot rewindow at {width} ms",
            metrics.window_ms
        )));
    }
    let windows = (metrics.duration_ms / width) as usize;
    if windows == 0 {
        return Err(StatsError::EmptyData);
    }
    let mut counts = vec![vec![0u64; windows]; metrics.n_nodes];
    for r in &metrics.receptions {
        if let Some(c) = counts[r.receiver].get_mut((r.time_ms / width) as usize) {
            *c += 1;
        }
    }
    Ok(counts.into_iter().flatten().collect())
}

/// Distribution of receptions per window across receivers.
pub fn throughput_pdf(metrics: &SimMetrics, w: &WindowSpec) -> Result<Histogram, StatsError> {
    Ok(Histogram::integer(window_counts(metrics, w)?))
}

fn mean_var(values: &[u64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().map(|&v| v as f64).sum::<f64>() / n;
    let var = values.iter().map(|&v| (v as f64 - mean).powi(2)).sum::<f64>() / n;
    (mean, var)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpFit {
    /// Maximum-likelihood rate, 1/ms.
    pub lambda: f64,
    /// Standard error of `lambda`.
    pub lambda_se: f64,
    pub ks_statistic: f64,
    /// Kolmogorov-Smirnov critical value at the 5% level for `n` samples.
    pub ks_critical_5pct: f64,
    pub n: usize,
}

impl ExpFit {
    pub fn ks_passes(&self) -> bool {
        self.ks_statistic < self.ks_critical_5pct
    }
}

/// 5% critical value of the one-sample KS statistic (Stephens' approximation).
pub fn ks_critical_5pct(n: usize) -> f64 {
    let s = (n as f64).sqrt();
    1.358 / (s + 0.12 + 0.11 / s)
}

/// Two-sided KS distance between the sample and an exponential CDF.
pub fn ks_exponential(samples: &[f64], lambda: f64) -> f64 {
    let mut x = samples.to_vec();
    x.sort_by(f64::total_cmp);
    let n = x.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &v) in x.iter().enumerate() {
        let f = 1.0 - (-lambda * v).exp();
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    d
}

/// Exponential fit of raw gaps.
pub fn fit_exponential(samples: &[f64]) -> Result<ExpFit, StatsError> {
    if samples.len() < MIN_FIT_SAMPLES {
        return Err(StatsError::InsufficientData { needed: MIN_FIT_SAMPLES, got: samples.len() });
    }
    let n = samples.len();
    let mean = samples.iter().sum::<f64>() / n as f64;
    if !(mean > 0.0) {
        return Err(StatsError::InvalidInput("gaps must have a positive mean".into()));
    }
    let lambda = 1.0 / mean;
    Ok(ExpFit {
        lambda,
        lambda_se: lambda / (n as f64).sqrt(),
        ks_statistic: ks_exponential(samples, lambda),
        ks_critical_5pct: ks_critical_5pct(n),
        n,
    })
}

/// Exponential fit of every receiver's inter-arrival gaps.
pub fn interarrival_fit(metrics: &SimMetrics) -> Result<ExpFit, StatsError> {
    let gaps: Vec<f64> = metrics.interarrival_ms.iter().flatten().map(|&g| g as f64).collect();
    fit_exponential(&gaps)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollisionGrid {
    pub k_values: Vec<u32>,
    pub p_b_values: Vec<f64>,
    /// `[k][p_b]`
    pub analytic: Vec<Vec<f64>>,
    /// `[k][p_b]`, fraction of beacons overlapping another on their channel.
    pub simulated: Vec<Vec<f64>>,
}

impl CollisionGrid {
    pub fn max_abs_diff(&self) -> f64 {
        self.analytic
            .iter()
            .flatten()
            .zip(self.simulated.iter().flatten())
            .map(|(a, s)| (a - s).abs())
            .fold(0.0, f64::max)
    }
}

/// Transitions per node in each replica of a collision grid point.
pub const GRID_REPLICA_TRANSITIONS: u64 = 50;

/// Analytic and simulated collision probability over a `(k, P_B)` grid; the
/// remaining share goes to scanning. Each point spends about `sim_budget`
/// state transitions, split into independent short runs of `k` nodes: node
/// phases are fixed within a run, so the estimate needs many phase draws.
pub fn collision_cdf_grid(
    k_values: &[u32],
    p_b_values: &[f64],
    p: &ProtocolParams,
    sim_budget: u64,
    seed: u64,
) -> Result<CollisionGrid, StatsError> {
    if k_values.is_empty() || p_b_values.is_empty() {
        return Err(StatsError::InvalidInput("grid axes must be non-empty".into()));
    }
    if k_values.contains(&0) {
        return Err(StatsError::InvalidInput("k must be at least 1".into()));
    }
    let mut shares = Vec::with_capacity(p_b_values.len());
    for &pb in p_b_values {
        if !(0.0..=1.0).contains(&pb) {
            return Err(StatsError::InvalidInput(format!("P_B {pb} outside [0, 1]")));
        }
        shares.push(StateShares { p_b: pb, p_s: 1.0 - pb, p_n: 0.0 });
    }
    let mut analytic = Vec::with_capacity(k_values.len());
    for &k in k_values {
        let mut row = Vec::with_capacity(shares.len());
        for s in &shares {
            row.push(collision_probability(beacon_probability(s, p), k).map_err(SimError::from)?);
        }
        analytic.push(row);
    }
    let points: Vec<(usize, usize)> =
        (0..k_values.len()).flat_map(|i| (0..shares.len()).map(move |j| (i, j))).collect();
    let values: Vec<f64> = points
        .par_iter()
        .map(|&(i, j)| {
            let k = k_values[i];
            let replicas = (sim_budget / (GRID_REPLICA_TRANSITIONS * u64::from(k))).max(1);
            let mut c = SimConfig::new(*p, shares[j], k as usize)
                .with_horizon(Horizon::Transitions(GRID_REPLICA_TRANSITIONS))
                .with_seed(seed ^ ((i as u64) << 32 | j as u64));
            c.record_receptions = false;
            let runs = run_replicas(&c, replicas)?;
            let tx: u64 = runs.iter().map(|m| m.tx_count).sum();
            let overlaps: u64 = runs.iter().map(|m| m.beacon_overlaps).sum();
            Ok(if tx == 0 { 0.0 } else { overlaps as f64 / tx as f64 })
        })
        .collect::<Result<_, StatsError>>()?;
    let simulated = values.chunks(shares.len()).map(<[f64]>::to_vec).collect();
    Ok(CollisionGrid { k_values: k_values.to_vec(), p_b_values: p_b_values.to_vec(), analytic, simulated })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub value: f64,
    /// Mean receptions per receiver per window.
    pub mean: f64,
    pub variance: f64,
    /// Mean receptions per window from one sender at one receiver.
    pub mean_link: f64,
    /// Probability that a receiver gets nothing in a window.
    pub p_zero: f64,
    /// Networking events per node per second.
    pub networking_rate: f64,
    pub mean_rssi_dbm: Option<f64>,
    pub histogram: Histogram,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub parameter: String,
    pub points: Vec<SweepPoint>,
}

/// Summary of one sweep value from its runs (replicas are pooled).
pub fn summarize(value: f64, runs: &[SimMetrics], w: &WindowSpec) -> Result<SweepPoint, StatsError> {
    let mut counts = Vec::new();
    for m in runs {
        counts.extend(window_counts(m, w)?);
    }
    if counts.is_empty() {
        return Err(StatsError::EmptyData);
    }
    let (mean, variance) = mean_var(&counts);
    let zeros = counts.iter().filter(|&&c| c == 0).count();
    let nodes = runs[0].n_nodes;
    let net_events: u64 = runs.iter().map(|m| m.network_event_count).sum();
    let duration: u64 = runs.iter().map(|m| m.duration_ms).sum();
    let (rssi_sum, rssi_n) = runs.iter().fold((0.0, 0u64), |(s, n), m| (s + m.rssi_sum, n + m.rssi_count));
    Ok(SweepPoint {
        value,
        mean,
        variance,
        mean_link: if nodes > 1 { mean / (nodes - 1) as f64 } else { 0.0 },
        p_zero: zeros as f64 / counts.len() as f64,
        networking_rate: net_events as f64 * 1000.0 / (duration as f64 * nodes as f64),
        mean_rssi_dbm: (rssi_n > 0).then(|| rssi_sum / rssi_n as f64),
        histogram: Histogram::integer(counts),
    })
}

/// Beacon throughput against networking rate for configs that differ only in
/// their state behavior. Sweep values are the networking share of the
/// default behavior. Each point pools `replicas` independent runs.
pub fn networking_tradeoff(configs: &[SimConfig], replicas: u64) -> Result<SweepResult, StatsError> {
    let first = configs.first().ok_or(StatsError::EmptyData)?;
    for c in configs {
        let mut probe = c.clone();
        probe.behavior = first.behavior;
        probe.overrides = first.overrides.clone();
        if probe != *first {
            return Err(StatsError::InvalidInput("configs differ in more than the state behavior".into()));
        }
    }
    let points = configs
        .par_iter()
        .map(|c| {
            let p_n = match c.behavior {
                Behavior::Shares(s) => s.p_n,
                Behavior::Selection(r) => {
                    crate::model::steady_state_shares(&r, &c.protocol).map_err(SimError::from)?.p_n
                }
            };
            let runs = run_replicas(c, replicas)?;
            summarize(p_n, &runs, &c.window)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SweepResult { parameter: "p_n".into(), points })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistanceRow {
    pub distance_m: f64,
    /// Mean receptions per receiver per window.
    pub mean_throughput: f64,
    /// Mean RSSI of accepted beacons; `None` when nothing was received.
    pub mean_rssi_dbm: Option<f64>,
    /// Noiseless model RSSI at this distance.
    pub model_rssi_dbm: f64,
}

/// Throughput and RSSI per separation distance, one run per distance.
pub fn throughput_vs_distance(runs: &[(f64, SimMetrics)], link: &LinkParams) -> Result<Vec<DistanceRow>, StatsError> {
    runs.iter()
        .map(|(d, m)| {
            Ok(DistanceRow {
                distance_m: *d,
                mean_throughput: m.mean_throughput(),
                mean_rssi_dbm: m.mean_rssi(),
                model_rssi_dbm: rssi(link, d.max(link.d0), None)
                    .map_err(|e| StatsError::InvalidInput(e.to_string()))?,
            })
        })
        .collect()
}

/// Broadcast and filler-event length of the saturation sender, ms. Sets the
/// top of the offered-load range at one beacon per 5 ms.
pub const SATURATION_SLOT_MS: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SaturationPoint {
    /// Requested offered load, msg/s.
    pub offered: f64,
    /// Beacons actually sent, msg/s.
    pub sent: f64,
    /// Beacons accepted by the receiver, msg/s.
    pub received: f64,
}

/// Received rate against offered load for one always-broadcasting-or-idle
/// sender and one always-scanning receiver on a single channel.
///
/// The sender alternates broadcast and networking events of equal length
/// with `rho_B = offered / max_rate`, which randomizes beacon times. A strictly
/// periodic sender phase-locks with the receiver's scan cycle.
pub fn saturation_sweep(
    offered: &[f64],
    t_rx: f64,
    proc_cost_per_msg: f64,
    duration_ms: f64,
    seed: u64,
) -> Result<Vec<SaturationPoint>, StatsError> {
    let max_rate = 1000.0 / SATURATION_SLOT_MS;
    if offered.is_empty() {
        return Err(StatsError::EmptyData);
    }
    if let Some(r) = offered.iter().find(|r| !(**r > 0.0 && **r <= max_rate)) {
        return Err(StatsError::InvalidInput(format!("offered load {r} outside (0, {max_rate}] msg/s")));
    }
    let p = ProtocolParams::new(1.0, 1, SATURATION_SLOT_MS, t_rx, 0.0, SATURATION_SLOT_MS).map_err(SimError::from)?;
    let scan_only = SelectionProbs::new(0.0, 1.0, 0.0).map_err(SimError::from)?;
    offered
        .par_iter()
        .enumerate()
        .map(|(i, &rate)| {
            let q = rate / max_rate;
            let sender = SelectionProbs::new(q, 0.0, 1.0 - q).map_err(SimError::from)?;
            let mut c = SimConfig::new(p, scan_only, 2)
                .with_horizon(Horizon::DurationMs(duration_ms))
                .with_seed(seed.wrapping_add(i as u64));
            c.overrides = vec![(0, Behavior::Selection(sender))];
            c.imperfections.proc_cost_per_msg = proc_cost_per_msg;
            c.record_receptions = false;
            let m = crate::sim::run(&c)?;
            let secs = m.duration_ms as f64 / 1000.0;
            Ok(SaturationPoint { offered: rate, sent: m.tx_count as f64 / secs, received: m.rx_per_node[1] as f64 / secs })
        })
        .collect()
}
