use std::io::Write;

use serde::{Deserialize, Serialize};
use uavbeacon_core::model::{expected_successes, steady_state_shares};
use uavbeacon_core::sim::{run, LossCounters, SimConfig};
use uavbeacon_core::stats::{interarrival_fit, summarize};
use uavbeacon_core::{ExpFit, Histogram, SimMetrics, StateShares};

use super::{emit, list_written};
use crate::config::{ExperimentConfig, Kind};
use crate::error::CliError;
use crate::output::OutputDir;
use crate::RunArgs;

/// Width of the inter-arrival histogram bins, ms.
pub const GAP_BIN_MS: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistRow {
    pub bin_start: f64,
    pub bin_end: f64,
    pub count: u64,
    pub pdf: f64,
}

pub fn hist_rows(h: &Histogram) -> Vec<HistRow> {
    h.pdf()
        .into_iter()
        .zip(&h.counts)
        .zip(h.bin_edges.windows(2))
        .map(|((pdf, &count), e)| HistRow { bin_start: e[0], bin_end: e[1], count, pdf })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimSummary {
    pub seed: u64,
    pub n_nodes: usize,
    pub duration_ms: u64,
    pub window_ms: u64,
    pub windows: usize,
    pub tx_count: u64,
    pub tx_dropped: u64,
    pub rx_count: u64,
    pub network_event_count: u64,
    pub collisions_observed: u64,
    pub beacon_overlaps: u64,
    pub overlap_fraction: f64,
    pub losses: LossCounters,
    /// Receptions per receiver per window.
    pub mean_throughput: f64,
    pub throughput_variance: f64,
    /// Share of (receiver, window) pairs with no reception.
    pub p_zero: f64,
    /// Receptions per window on one sender/receiver link.
    pub mean_link_throughput: f64,
    /// Closed-form counterpart of `mean_link_throughput`; absent when nodes
    /// behave differently.
    pub model_link_throughput: Option<f64>,
    /// Measured broadcast, scan and networking time shares.
    pub state_shares: [f64; 3],
    pub target_shares: Option<StateShares>,
    /// Networking events per node per second.
    pub networking_rate: f64,
    pub mean_rssi_dbm: Option<f64>,
    pub interarrival: Option<ExpFit>,
    pub tx_per_channel: Vec<u64>,
}

pub fn summary(c: &SimConfig, m: &SimMetrics) -> Result<SimSummary, CliError> {
    let point = summarize(0.0, std::slice::from_ref(m), &c.window)?;
    let target = if c.overrides.is_empty() {
        Some(steady_state_shares(&c.behavior.selection(&c.protocol)?, &c.protocol)?)
    } else {
        None
    };
    let model_link = match target {
        Some(s) if c.n_nodes >= 2 => Some(expected_successes(&s, &c.protocol, &c.window, c.n_nodes as u32)?),
        _ => None,
    };
    Ok(SimSummary {
        seed: c.seed,
        n_nodes: m.n_nodes,
        duration_ms: m.duration_ms,
        window_ms: m.window_ms,
        windows: m.window_count(),
        tx_count: m.tx_count,
        tx_dropped: m.tx_dropped,
        rx_count: m.rx_count,
        network_event_count: m.network_event_count,
        collisions_observed: m.collisions_observed,
        beacon_overlaps: m.beacon_overlaps,
        overlap_fraction: m.overlap_fraction(),
        losses: m.losses,
        mean_throughput: point.mean,
        throughput_variance: point.variance,
        p_zero: point.p_zero,
        mean_link_throughput: point.mean_link,
        model_link_throughput: model_link,
        state_shares: m.state_shares(),
        target_shares: target,
        networking_rate: m.networking_rate(),
        mean_rssi_dbm: m.mean_rssi(),
        interarrival: interarrival_fit(m).ok(),
        tx_per_channel: m.tx_per_channel.clone(),
    })
}

pub fn simulate(args: &RunArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let cfg = ExperimentConfig::for_command(args.config.as_deref(), Kind::Simulate)?;
    let ov = args.overrides();
    let c = cfg.sim_config(&ov)?;
    let m = run(&c)?;
    let s = summary(&c, &m)?;

    emit(out, &format!("nodes {} for {} ms, seed {}", s.n_nodes, s.duration_ms, s.seed))?;
    emit(out, &format!("tx {} rx {} collisions {}", s.tx_count, s.rx_count, s.collisions_observed))?;
    emit(
        out,
        &format!(
            "throughput {:.4} msg/window (variance {:.4}, P(0) {:.4}), per link {:.4}",
            s.mean_throughput, s.throughput_variance, s.p_zero, s.mean_link_throughput
        ),
    )?;
    if let Some(f) = &s.interarrival {
        emit(
            out,
            &format!("inter-arrival rate {:.6} /ms, KS {:.4} (5% critical {:.4}, n {})", f.lambda, f.ks_statistic, f.ks_critical_5pct, f.n),
        )?;
    }

    let mut dir = OutputDir::create(cfg.out_dir(&ov), cfg.format(&ov))?;
    dir.write_json("summary.json", &s)?;
    if c.record_receptions {
        dir.write_table("receptions", &m.receptions)?;
    }
    let point = summarize(0.0, std::slice::from_ref(&m), &c.window)?;
    dir.write_table("throughput_hist", &hist_rows(&point.histogram))?;
    let gaps: Vec<f64> = m.interarrival_ms.iter().flatten().map(|&g| g as f64).collect();
    if !gaps.is_empty() {
        dir.write_table("interarrival_hist", &hist_rows(&Histogram::uniform(&gaps, GAP_BIN_MS)))?;
    }
    list_written(out, &dir)
}
