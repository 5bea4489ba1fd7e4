use std::io::Write;

use serde::{Deserialize, Serialize};
use uavbeacon_core::model::{
    beacon_probability, collision_probability, expected_events, expected_successes, interarrival_rate,
    selection_probs, steady_state_shares, success_probability,
};
use uavbeacon_core::{Behavior, ProtocolParams, SelectionProbs, State, StateShares, WindowSpec};

use super::{emit, list_written};
use crate::config::{ExperimentConfig, Kind};
use crate::error::CliError;
use crate::output::OutputDir;
use crate::AnalyzeArgs;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KRow {
    pub k: u32,
    pub p_collision: f64,
    pub p_success: f64,
    /// Successful receptions per window on one sender/receiver link.
    pub expected_successes: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyzeReport {
    pub protocol: ProtocolParams,
    pub shares: StateShares,
    pub selection: SelectionProbs,
    pub window_ms: f64,
    pub p_beacon: f64,
    /// Expected broadcast, scan and networking events per window.
    pub expected_events: [f64; 3],
    /// Exponential inter-arrival rate, 1/ms. Only defined for equal
    /// broadcast and scan shares without networking.
    pub interarrival_rate: Option<f64>,
    pub rows: Vec<KRow>,
}

pub fn report(cfg: &ExperimentConfig, ks: &[u32]) -> Result<AnalyzeReport, CliError> {
    let p = cfg.protocol.params()?;
    let w = WindowSpec::new(cfg.sim.window_ms)?;
    let (shares, selection) = match cfg.behavior()? {
        Behavior::Shares(s) => (s, selection_probs(&s, &p)?),
        Behavior::Selection(r) => (steady_state_shares(&r, &p)?, r),
    };
    if ks.is_empty() {
        return Err(CliError::Input("no drone counts to analyze".into()));
    }
    let rows = ks
        .iter()
        .map(|&k| {
            Ok(KRow {
                k,
                p_collision: collision_probability(beacon_probability(&shares, &p), k)?,
                p_success: success_probability(&shares, &p, k)?,
                expected_successes: expected_successes(&shares, &p, &w, k)?,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let balanced = (shares.p_b - shares.p_s).abs() < 1e-9 && shares.p_n.abs() < 1e-12;
    Ok(AnalyzeReport {
        protocol: p,
        shares,
        selection,
        window_ms: w.t_w,
        p_beacon: beacon_probability(&shares, &p),
        expected_events: State::ALL.map(|s| expected_events(&shares, &p, &w, s)),
        interarrival_rate: balanced.then(|| interarrival_rate(&p)),
        rows,
    })
}

pub fn analyze(args: &AnalyzeArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let cfg = ExperimentConfig::for_command(args.run.config.as_deref(), Kind::Analyze)?;
    let ov = args.run.overrides();
    let ks = if args.k.is_empty() { cfg.analyze.k.clone() } else { args.k.clone() };
    let r = report(&cfg, &ks)?;

    let s = &r.shares;
    let sel = &r.selection;
    emit(out, &format!("shares     P_B={:.6} P_S={:.6} P_N={:.6}", s.p_b, s.p_s, s.p_n))?;
    emit(out, &format!("selection  rho_B={:.6} rho_S={:.6} rho_N={:.6}", sel.rho_b, sel.rho_s, sel.rho_n))?;
    emit(out, &format!("P_beacon   {:.6}", r.p_beacon))?;
    let [b, sc, n] = r.expected_events;
    emit(out, &format!("events per {} ms window: broadcast {b:.4} scan {sc:.4} networking {n:.4}", r.window_ms))?;
    if let Some(l) = r.interarrival_rate {
        emit(out, &format!("inter-arrival rate {l:.6} /ms"))?;
    }
    emit(out, &format!("{:>6} {:>12} {:>12} {:>14}", "k", "P_col", "P_success", "N_success/win"))?;
    for row in &r.rows {
        emit(
            out,
            &format!("{:>6} {:>12.6} {:>12.6} {:>14.4}", row.k, row.p_collision, row.p_success, row.expected_successes),
        )?;
    }

    let mut dir = OutputDir::create(cfg.out_dir(&ov), cfg.format(&ov))?;
    dir.write_json("analyze.json", &r)?;
    dir.write_table("analyze_k", &r.rows)?;
    list_written(out, &dir)
}
