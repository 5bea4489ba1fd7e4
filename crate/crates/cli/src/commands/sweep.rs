use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use uavbeacon_core::link::rssi;
use uavbeacon_core::sim::{run_replicas, Horizon, SimConfig};
use uavbeacon_core::stats::{networking_tradeoff, saturation_sweep, summarize};
use uavbeacon_core::{LinkParams, SaturationPoint, StateShares, SweepResult};

use super::{emit, list_written, with_jobs};
use crate::config::{Axis, ExperimentConfig, Kind, Overrides, DEFAULT_PROC_COST_MS};
use crate::error::CliError;
use crate::output::OutputDir;
use crate::SweepArgs;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub parameter: String,
    pub value: f64,
    pub mean: f64,
    pub variance: f64,
    pub mean_link: f64,
    pub p_zero: f64,
    pub networking_rate: f64,
    pub mean_rssi_dbm: Option<f64>,
    /// Noiseless model RSSI at the swept distance.
    pub model_rssi_dbm: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepHistRow {
    pub value: f64,
    pub messages: u64,
    pub count: u64,
    pub pdf: f64,
}

/// One simulation config per swept value, everything else taken from `cfg`.
pub fn point_configs(
    cfg: &ExperimentConfig,
    ov: &Overrides,
    axis: Axis,
    values: &[f64],
) -> Result<Vec<SimConfig>, CliError> {
    values
        .iter()
        .map(|&v| {
            let mut c = cfg.clone();
            let mut o = ov.clone();
            match axis {
                Axis::TS => c.protocol.t_rx = v - c.protocol.t_comp_base,
                Axis::TB => c.protocol.t_b = v,
                Axis::PN => {
                    c.shares = Some(StateShares::balanced(v)?);
                    c.selection = None;
                }
                Axis::NNodes => {
                    if !(v >= 1.0 && v.fract() == 0.0) {
                        return Err(CliError::Input(format!("n_nodes value {v} is not a positive integer")));
                    }
                    o.nodes = Some(v as usize);
                }
                Axis::Distance => {
                    if !(v.is_finite() && v >= 0.0) {
                        return Err(CliError::Input(format!("distance {v} must be >= 0")));
                    }
                    c.sim.spacing_m = Some(v);
                    c.sim.positions.clear();
                    c.link.get_or_insert_with(LinkParams::default);
                }
                Axis::OfferedLoad => unreachable!("offered load does not build node configs"),
            }
            c.sim_config(&o)
        })
        .collect()
}

pub fn run_sweep(
    cfg: &ExperimentConfig,
    ov: &Overrides,
    axis: Axis,
    values: &[f64],
    replicas: u64,
) -> Result<SweepResult, CliError> {
    let configs = point_configs(cfg, ov, axis, values)?;
    if axis == Axis::PN {
        let mut r = networking_tradeoff(&configs, replicas)?;
        r.parameter = axis.name().into();
        return Ok(r);
    }
    let points = configs
        .par_iter()
        .zip(values)
        .map(|(c, &v)| {
            let runs = run_replicas(c, replicas)?;
            Ok(summarize(v, &runs, &c.window)?)
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(SweepResult { parameter: axis.name().into(), points })
}

pub fn run_saturation(cfg: &ExperimentConfig, ov: &Overrides, values: &[f64]) -> Result<Vec<SaturationPoint>, CliError> {
    let p = cfg.protocol.params()?;
    let duration = match cfg.horizon(ov)? {
        Horizon::DurationMs(d) => d,
        // the receiver only scans, so a transition is one scan
        Horizon::Transitions(n) => n as f64 * p.t_s,
    };
    let cost = cfg.imperfections.proc_cost_per_msg.unwrap_or(DEFAULT_PROC_COST_MS);
    Ok(saturation_sweep(values, p.t_rx, cost, duration, cfg.seed(ov))?)
}

fn rows(r: &SweepResult, link: Option<&LinkParams>) -> Result<(Vec<SweepRow>, Vec<SweepHistRow>), CliError> {
    let mut out = Vec::with_capacity(r.points.len());
    let mut hist = Vec::new();
    for p in &r.points {
        let model_rssi_dbm = match link {
            Some(l) => Some(rssi(l, p.value.max(l.d0), None)?),
            None => None,
        };
        out.push(SweepRow {
            parameter: r.parameter.clone(),
            value: p.value,
            mean: p.mean,
            variance: p.variance,
            mean_link: p.mean_link,
            p_zero: p.p_zero,
            networking_rate: p.networking_rate,
            mean_rssi_dbm: p.mean_rssi_dbm,
            model_rssi_dbm,
        });
        let pdf = p.histogram.pdf();
        for (m, (&count, pdf)) in p.histogram.counts.iter().zip(pdf).enumerate() {
            hist.push(SweepHistRow { value: p.value, messages: m as u64, count, pdf });
        }
    }
    Ok((out, hist))
}

pub fn sweep(args: &SweepArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let cfg = ExperimentConfig::for_command(args.run.config.as_deref(), Kind::Sweep)?;
    let ov = args.run.overrides();
    let axis = args
        .axis
        .or(cfg.sweep.axis)
        .ok_or_else(|| CliError::Input("no sweep axis: pass --axis or set [sweep] axis".into()))?;
    let values = match (&args.values, &cfg.sweep.values) {
        (v, _) if !v.is_empty() => v.clone(),
        (_, v) if !v.is_empty() => v.clone(),
        _ => axis.default_values(),
    };
    let replicas = args.replicas.unwrap_or(cfg.sweep.replicas);
    if replicas == 0 {
        return Err(CliError::Input("replicas must be at least 1".into()));
    }

    let mut dir = OutputDir::create(cfg.out_dir(&ov), cfg.format(&ov))?;
    if axis == Axis::OfferedLoad {
        let points = with_jobs(args.jobs, || run_saturation(&cfg, &ov, &values))?;
        emit(out, &format!("{:>10} {:>10} {:>10}", "offered", "sent", "received"))?;
        for p in &points {
            emit(out, &format!("{:>10.3} {:>10.3} {:>10.3}", p.offered, p.sent, p.received))?;
        }
        dir.write_table("saturation", &points)?;
        dir.write_json("sweep.json", &serde_json::json!({ "parameter": axis.name(), "points": points }))?;
        return list_written(out, &dir);
    }

    let result = with_jobs(args.jobs, || run_sweep(&cfg, &ov, axis, &values, replicas))?;
    let link = (axis == Axis::Distance).then(|| cfg.link.unwrap_or_default());
    let (table, hist) = rows(&result, link.as_ref())?;
    emit(out, &format!("{:>10} {:>10} {:>10} {:>8} {:>10}", axis.name(), "mean", "variance", "P(0)", "net/s"))?;
    for r in &table {
        emit(
            out,
            &format!("{:>10} {:>10.4} {:>10.4} {:>8.4} {:>10.4}", r.value, r.mean, r.variance, r.p_zero, r.networking_rate),
        )?;
    }
    dir.write_table("sweep", &table)?;
    dir.write_table("sweep_hist", &hist)?;
    dir.write_json("sweep.json", &result)?;
    list_written(out, &dir)
}
