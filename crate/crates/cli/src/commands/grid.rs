use std::io::Write;

use serde::{Deserialize, Serialize};
use uavbeacon_core::stats::collision_cdf_grid;

use super::{emit, list_written, with_jobs};
use crate::config::{ExperimentConfig, Kind};
use crate::error::CliError;
use crate::output::OutputDir;
use crate::GridArgs;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridRow {
    pub k: u32,
    pub p_b: f64,
    pub p_beacon: f64,
    pub analytic: f64,
    pub simulated: f64,
    pub abs_diff: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSummary {
    pub seed: u64,
    pub budget: u64,
    pub points: usize,
    pub max_abs_diff: f64,
}

pub fn grid(args: &GridArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let cfg = ExperimentConfig::for_command(args.run.config.as_deref(), Kind::Grid)?;
    let ov = args.run.overrides();
    let p = cfg.protocol.params()?;
    let ks = if args.k.is_empty() { cfg.grid.k.clone() } else { args.k.clone() };
    let pbs = if args.p_b.is_empty() { cfg.grid.p_b.clone() } else { args.p_b.clone() };
    let budget = args.budget.or(args.run.transitions).unwrap_or(cfg.grid.budget);
    let seed = cfg.seed(&ov);

    let g = with_jobs(args.jobs, || Ok(collision_cdf_grid(&ks, &pbs, &p, budget, seed)?))?;
    let mut rows = Vec::with_capacity(ks.len() * pbs.len());
    for (i, &k) in g.k_values.iter().enumerate() {
        for (j, &p_b) in g.p_b_values.iter().enumerate() {
            let (a, s) = (g.analytic[i][j], g.simulated[i][j]);
            rows.push(GridRow { k, p_b, p_beacon: p_b * p.t_beacon / p.t_b, analytic: a, simulated: s, abs_diff: (a - s).abs() });
        }
    }
    let summary = GridSummary { seed, budget, points: rows.len(), max_abs_diff: g.max_abs_diff() };
    emit(out, &format!("{} points, {} transitions each, max |analytic - simulated| = {:.5}", summary.points, budget, summary.max_abs_diff))?;

    let mut dir = OutputDir::create(cfg.out_dir(&ov), cfg.format(&ov))?;
    dir.write_table("collision_grid", &rows)?;
    dir.write_json("grid_summary.json", &summary)?;
    list_written(out, &dir)
}
