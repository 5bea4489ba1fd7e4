//! Log-distance path loss: `P_r = P_t - K - 10 * gamma * log10(d / d0)`,
//! optionally perturbed by log-normal shadowing, and a hard sensitivity
//! threshold for reception.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinkError {
    #[error("invalid link parameters: {0}")]
    InvalidParameters(String),
    #[error("distance {distance} m is inside the reference distance {d0} m")]
    Domain { distance: f64, d0: f64 },
    #[error("need at least two distinct distances to fit, got {0}")]
    RankDeficient(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LinkParams {
    /// Transmit power, dBm.
    pub p_t: f64,
    /// Path-loss constant, dB. Subtracted.
    pub k_loss: f64,
    /// Far-field reference distance, meters.
    pub d0: f64,
    /// Path-loss exponent.
    pub gamma: f64,
    /// Shadowing standard deviation, dB. Zero disables shadowing.
    pub shadowing_sigma: f64,
    /// Reception threshold, dBm.
    pub sensitivity: f64,
}

impl Default for LinkParams {
    /// Constants fitted on the field campaign with the reference modules.
    fn default() -> Self {
        LinkParams {
            p_t: 19.5,
            k_loss: 3.55,
            d0: 0.0147,
            gamma: 2.118,
            shadowing_sigma: 0.0,
            sensitivity: -90.0,
        }
    }
}

impl LinkParams {
    pub fn validate(&self) -> Result<(), LinkError> {
        let bad = |m: String| Err(LinkError::InvalidParameters(m));
        if !(self.d0.is_finite() && self.d0 > 0.0) {
            return bad(format!("d0 must be positive, got {}", self.d0));
        }
        if !(self.gamma.is_finite() && self.gamma > 0.0) {
            return bad(format!("gamma must be positive, got {}", self.gamma));
        }
        if !(self.shadowing_sigma.is_finite() && self.shadowing_sigma >= 0.0) {
            return bad(format!("shadowing_sigma must be >= 0, got {}", self.shadowing_sigma));
        }
        if !self.p_t.is_finite() || !self.k_loss.is_finite() || !self.sensitivity.is_finite() {
            return bad("p_t, k_loss and sensitivity must be finite".into());
        }
        Ok(())
    }

    /// Distance at which the noiseless RSSI equals the sensitivity.
    pub fn max_range(&self) -> f64 {
        self.d0 * 10f64.powf((self.p_t - self.k_loss - self.sensitivity) / (10.0 * self.gamma))
    }
}

/// Received power in dBm at `distance` meters. `noise_draw` is a unit-normal
/// sample scaled by the shadowing sigma.
pub fn rssi(params: &LinkParams, distance: f64, noise_draw: Option<f64>) -> Result<f64, LinkError> {
    if !(distance >= params.d0) {
        return Err(LinkError::Domain { distance, d0: params.d0 });
    }
    let mean = params.p_t - params.k_loss - 10.0 * params.gamma * (distance / params.d0).log10();
    Ok(mean + params.shadowing_sigma * noise_draw.unwrap_or(0.0))
}

pub fn is_received(params: &LinkParams, rssi_value: f64) -> bool {
    rssi_value >= params.sensitivity
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RssiSample {
    pub distance_m: f64,
    pub rssi_dbm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathLossFit {
    pub gamma: f64,
    pub rmse: f64,
    /// Measured minus fitted RSSI, in input order.
    pub residuals: Vec<f64>,
}

/// Least-squares estimate of the path-loss exponent with `P_t`, `K` and `d0`
/// held fixed. The model is linear through the origin in
/// `x = 10 * log10(d / d0)`, `y = P_t - K - rssi`.
pub fn fit_path_loss(samples: &[RssiSample], p_t: f64, k_loss: f64, d0: f64) -> Result<PathLossFit, LinkError> {
    if !(d0.is_finite() && d0 > 0.0) {
        return Err(LinkError::InvalidParameters(format!("d0 must be positive, got {d0}")));
    }
    let mut distinct: Vec<f64> = samples.iter().map(|s| s.distance_m).collect();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 2 {
        return Err(LinkError::RankDeficient(distinct.len()));
    }
    if let Some(s) = samples.iter().find(|s| !(s.distance_m >= d0)) {
        return Err(LinkError::Domain { distance: s.distance_m, d0 });
    }
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for s in samples {
        let x = 10.0 * (s.distance_m / d0).log10();
        let y = p_t - k_loss - s.rssi_dbm;
        sxy += x * y;
        sxx += x * x;
    }
    if sxx == 0.0 {
        return Err(LinkError::RankDeficient(distinct.len()));
    }
    let gamma = sxy / sxx;
    let residuals: Vec<f64> = samples
        .iter()
        .map(|s| s.rssi_dbm - (p_t - k_loss - 10.0 * gamma * (s.distance_m / d0).log10()))
        .collect();
    let rmse = (residuals.iter().map(|r| r * r).sum::<f64>() / residuals.len() as f64).sqrt();
    Ok(PathLossFit { gamma, rmse, residuals })
}

/// Model-generated samples at the given distances, shadowed with `params.shadowing_sigma`.
pub fn synthesize_samples<R: Rng + ?Sized>(
    params: &LinkParams,
    distances: &[f64],
    rng: &mut R,
) -> Result<Vec<RssiSample>, LinkError> {
    distances
        .iter()
        .map(|&d| {
            let draw: f64 = rng.sample(StandardNormal);
            Ok(RssiSample { distance_m: d, rssi_dbm: rssi(params, d, Some(draw))? })
        })
        .collect()
}
