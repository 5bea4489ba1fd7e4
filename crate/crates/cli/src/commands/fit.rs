use std::io::Write;

use serde::{Deserialize, Serialize};
use uavbeacon_core::link::{fit_path_loss, rssi};
use uavbeacon_core::{LinkParams, RssiSample};

use super::{emit, list_written};
use crate::config::{ExperimentConfig, Kind};
use crate::error::CliError;
use crate::output::{read_csv, OutputDir};
use crate::FitArgs;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub gamma: f64,
    pub rmse: f64,
    pub samples: usize,
    pub p_t: f64,
    pub k_loss: f64,
    pub d0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualRow {
    pub distance_m: f64,
    pub rssi_dbm: f64,
    pub fitted_dbm: f64,
    pub residual_db: f64,
}

pub fn read_samples(path: &std::path::Path) -> Result<Vec<RssiSample>, CliError> {
    read_csv(path, &["distance_m", "rssi_dbm"])
}

pub fn fit_pathloss(args: &FitArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let cfg = ExperimentConfig::for_command(args.config.as_deref(), Kind::FitPathloss)?;
    let base = cfg.link.unwrap_or_default();
    let link = LinkParams {
        p_t: args.p_t.unwrap_or(base.p_t),
        k_loss: args.k_loss.unwrap_or(base.k_loss),
        d0: args.d0.unwrap_or(base.d0),
        ..base
    };
    let samples = read_samples(&args.csv)?;
    if samples.is_empty() {
        return Err(CliError::Input(format!("{}: insufficient data, no samples", args.csv.display())));
    }
    let fit = fit_path_loss(&samples, link.p_t, link.k_loss, link.d0)?;
    let fitted = LinkParams { gamma: fit.gamma, shadowing_sigma: 0.0, ..link };
    let residuals = samples
        .iter()
        .zip(&fit.residuals)
        .map(|(s, &r)| {
            Ok(ResidualRow {
                distance_m: s.distance_m,
                rssi_dbm: s.rssi_dbm,
                fitted_dbm: rssi(&fitted, s.distance_m, None)?,
                residual_db: r,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let report =
        FitReport { gamma: fit.gamma, rmse: fit.rmse, samples: samples.len(), p_t: link.p_t, k_loss: link.k_loss, d0: link.d0 };
    emit(out, &format!("gamma {:.6}  rmse {:.4} dB  over {} samples", report.gamma, report.rmse, report.samples))?;

    let ov = crate::Overrides { format: args.format, out: args.out.clone(), ..Default::default() };
    let mut dir = OutputDir::create(cfg.out_dir(&ov), cfg.format(&ov))?;
    dir.write_json("fit.json", &report)?;
    dir.write_table("residuals", &residuals)?;
    list_written(out, &dir)
}
