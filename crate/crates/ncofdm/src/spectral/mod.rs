//! Welch-averaged and analytic power spectral densities, and tail slopes.

mod analytic;
mod slope;
mod welch;

use serde::{Deserialize, Serialize};

use crate::waveform::SystemConfig;

pub use analytic::{analytic_psd_case0, analytic_psd_case1, analytic_psd_case_n, AnalyticPsd, CoefficientTable};
pub use slope::fit_slope;
pub use welch::{welch_psd, WelchSpec};

/// PSD on a frequency grid. `values_db` is relative to the in-band mean;
/// `linear` keeps the unnormalized values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PsdEstimate {
    pub freqs_hz: Vec<f64>,
    pub values_db: Vec<f64>,
    pub linear: Vec<f64>,
    pub band_edge_hz: f64,
    pub meta: String,
}

impl PsdEstimate {
    pub(crate) fn from_linear(freqs_hz: Vec<f64>, linear: Vec<f64>, reference: f64, band_edge_hz: f64, meta: String) -> Self {
        let values_db = linear.iter().map(|v| 10.0 * (v / reference).log10()).collect();
        Self {
            freqs_hz,
            values_db,
            linear,
            band_edge_hz,
            meta,
        }
    }

    /// Value at the grid point nearest to `f_hz`.
    pub fn nearest_db(&self, f_hz: f64) -> f64 {
        let i = self.freqs_hz.partition_point(|&f| f < f_hz);
        let pick = match i {
            0 => 0,
            i if i == self.freqs_hz.len() => i - 1,
            i if (self.freqs_hz[i] - f_hz).abs() < (f_hz - self.freqs_hz[i - 1]).abs() => i,
            i => i - 1,
        };
        self.values_db[pick]
    }
}

/// Realizations and symbols per realization for the finite-`U` expectation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MonteCarloSpec {
    pub realizations: usize,
    pub symbols: usize,
    pub seed: u64,
}

impl Default for MonteCarloSpec {
    fn default() -> Self {
        Self {
            realizations: 256,
            symbols: 64,
            seed: 0,
        }
    }
}

/// 2048 points spanning three one-sided bandwidths either side of DC.
/// The point count is even so DC itself is never sampled.
pub fn default_grid(cfg: &SystemConfig) -> Vec<f64> {
    uniform_grid(cfg, 3.0 * cfg.band_edge(), 2048)
}

/// `points` uniform frequencies on `[-half_width, half_width]` subcarriers, in Hz.
pub fn uniform_grid(cfg: &SystemConfig, half_width: f64, points: usize) -> Vec<f64> {
    let step = 2.0 * half_width / (points - 1) as f64;
    (0..points)
        .map(|i| (-half_width + i as f64 * step) * cfg.subcarrier_spacing_hz)
        .collect()
}

/// Log-spaced offsets beyond the upper band edge, `d_lo..d_hi` subcarriers.
pub fn edge_offset_grid(cfg: &SystemConfig, d_lo: f64, d_hi: f64, points: usize) -> Vec<f64> {
    let (a, b) = (d_lo.log10(), d_hi.log10());
    (0..points)
        .map(|i| {
            let d = 10f64.powf(a + (b - a) * i as f64 / (points - 1) as f64);
            (cfg.band_edge() + d) * cfg.subcarrier_spacing_hz
        })
        .collect()
}
