//! Sensor model: turns simulated contact forces into load-cell-like raw
//! readings and binary contact signals, and estimates noise thresholds from
//! no-contact samples.
//!
//! A raw reading is the contact force scaled into sensor units plus zero-mean
//! Gaussian noise:
//!
//! ```text
//! f_raw = f_contact * scale + eps,   eps ~ N(0, sigma)
//! ```
//!
//! The binary signal is 1 exactly when `f_raw` strictly exceeds the
//! per-sensor threshold. Raw readings are deliberately not clamped at zero:
//! noise excursions below zero are what a real load cell reports, and the
//! strict threshold maps them to "no contact" anyway.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum TactileError {
    #[error("calibration needs at least 2 samples, got {0}")]
    NotEnoughSamples(usize),
    #[error("invalid sensor model: {0}")]
    InvalidModel(String),
}

/// Threshold = this multiple of the estimated noise standard deviation.
/// Three sigma keeps the per-sample false-contact rate near 0.1%.
pub const THRESHOLD_SIGMA_MULTIPLIER: f64 = 3.0;

/// Default noise standard deviation in sensor units.
pub const DEFAULT_SIGMA: f64 = 0.0077;

/// Parameters of the simulated force sensors, `[RIGHT, LEFT]` thresholds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SensorModel {
    /// Contact-force-to-sensor-units scale.
    pub scale: f64,
    /// Noise standard deviation (sensor units).
    pub sigma: f64,
    /// Per-sensor contact thresholds (sensor units).
    pub f_thresh: [f64; 2],
    pub noise_enabled: bool,
}

impl Default for SensorModel {
    fn default() -> Self {
        let thresh = THRESHOLD_SIGMA_MULTIPLIER * DEFAULT_SIGMA;
        Self { scale: 100.0, sigma: DEFAULT_SIGMA, f_thresh: [thresh, thresh], noise_enabled: true }
    }
}

impl SensorModel {
    pub fn validate(&self) -> Result<(), TactileError> {
        if !(self.scale > 0.0) {
            return Err(TactileError::InvalidModel("scale must be > 0".into()));
        }
        if !(self.sigma >= 0.0) {
            return Err(TactileError::InvalidModel("sigma must be >= 0".into()));
        }
        if self.f_thresh.iter().any(|&t| !(t >= 0.0)) {
            return Err(TactileError::InvalidModel("thresholds must be >= 0".into()));
        }
        Ok(())
    }

    /// The same model with noise turned off.
    pub fn without_noise(&self) -> Self {
        Self { noise_enabled: false, ..self.clone() }
    }
}

/// One tactile sample: contact forces, raw readings, binary signals,
/// all `[RIGHT, LEFT]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForceReading {
    /// Simulator-level contact force (N).
    pub f_contact: [f64; 2],
    /// Scaled, noisy sensor reading (sensor units).
    pub f_raw: [f64; 2],
    /// Thresholded contact indicator, 0.0 or 1.0.
    pub f_binary: [f64; 2],
}

/// Scale contact forces into sensor units and add per-finger Gaussian noise.
///
/// With noise disabled (or sigma = 0) no random numbers are consumed and the
/// result is exactly `f_contact * scale`. Noise draws are ordered right then
/// left.
pub fn raw_force<R: Rng>(f_contact: [f64; 2], model: &SensorModel, rng: &mut R) -> [f64; 2] {
    let mut raw = [f_contact[0] * model.scale, f_contact[1] * model.scale];
    if model.noise_enabled && model.sigma > 0.0 {
        let normal = Normal::new(0.0, model.sigma).expect("validated sigma");
        raw[0] += normal.sample(rng);
        raw[1] += normal.sample(rng);
    }
    raw
}

/// Strict-threshold contact indicator: 1.0 iff `f_raw > f_thresh`.
pub fn binary_force(f_raw: [f64; 2], model: &SensorModel) -> [f64; 2] {
    [
        if f_raw[0] > model.f_thresh[0] { 1.0 } else { 0.0 },
        if f_raw[1] > model.f_thresh[1] { 1.0 } else { 0.0 },
    ]
}

/// One full sensor read: raw then binary.
pub fn read_sensors<R: Rng>(
    f_contact: [f64; 2],
    model: &SensorModel,
    rng: &mut R,
) -> ForceReading {
    let f_raw = raw_force(f_contact, model, rng);
    let f_binary = binary_force(f_raw, model);
    ForceReading { f_contact, f_raw, f_binary }
}

/// Result of threshold calibration from no-contact samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Calibration {
    /// Sample standard deviation (n-1 denominator).
    pub sigma_est: f64,
    /// `THRESHOLD_SIGMA_MULTIPLIER * sigma_est`.
    pub f_thresh: f64,
}

/// Estimate the sensor noise level from a sequence of no-contact raw readings.
pub fn calibrate_threshold(samples: &[f64]) -> Result<Calibration, TactileError> {
    let n = samples.len();
    if n < 2 {
        return Err(TactileError::NotEnoughSamples(n));
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    let ss = samples.iter().map(|&x| (x - mean) * (x - mean)).sum::<f64>();
    let sigma_est = (ss / (n - 1) as f64).sqrt();
    Ok(Calibration { sigma_est, f_thresh: THRESHOLD_SIGMA_MULTIPLIER * sigma_est })
}
