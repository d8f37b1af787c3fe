//! Transmitter: QAM mapping, CP-OFDM modulation, the basis signals and
//! smoother matrices, and assembly of the N-continuous stream.

mod baseline;
mod qam;
mod smoother;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::WindowKind;

pub use baseline::{baseline_least_norm_precoder, precode_generic, LeastNormPrecoder};
pub use qam::{qam_demap, qam_map, random_bits, random_symbols, QamConstellation};
pub use smoother::{
    assemble_stream, basis_signal, build_smoother, build_smoother_with, coefficients_generic, ofdm_modulate, smooth_signal,
    synthesize_smooth_generic, BoundaryModel, OfdmModulator, SmootherContext,
};

/// Waveform dimensions. Time is in samples.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SystemConfig {
    /// Active subcarrier indices `k_r`.
    pub subcarriers: Vec<i64>,
    /// DFT size, samples per useful symbol.
    pub m: usize,
    /// CP length in samples.
    pub mcp: usize,
    /// Smooth-signal support in samples.
    pub l: usize,
    /// Highest derivative order forced continuous.
    pub n: usize,
    /// Square QAM order.
    pub qam_order: usize,
    /// Integration points per sample for basis-product integrals.
    pub oversample: usize,
    pub window: WindowKind,
    /// Symbols per generated burst.
    pub symbols: usize,
    pub subcarrier_spacing_hz: f64,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self {
            subcarriers: Self::centered_subcarriers(256),
            m: 2048,
            mcp: 144,
            l: 144,
            n: 0,
            qam_order: 16,
            oversample: 8,
            window: WindowKind::Blackman,
            symbols: 64,
            subcarrier_spacing_hz: 15e3,
        }
    }
}

impl SystemConfig {
    /// Default dimensions with the given HDO and smooth-signal length.
    pub fn new(n: usize, l: usize) -> Self {
        Self { n, l, ..Self::default() }
    }

    /// `k` indices split evenly around DC, DC excluded.
    pub fn centered_subcarriers(k: usize) -> Vec<i64> {
        let half = (k / 2) as i64;
        let lower = k as i64 - half;
        (-lower..0).chain(1..=half).collect()
    }

    pub fn k(&self) -> usize {
        self.subcarriers.len()
    }

    /// CP phase step `φ = −2π·Mcp/M`.
    pub fn phi(&self) -> f64 {
        -2.0 * PI * self.mcp as f64 / self.m as f64
    }

    /// Samples per CP-OFDM symbol, `M + Mcp`.
    pub fn symbol_len(&self) -> usize {
        self.m + self.mcp
    }

    /// Window half-length `T_L = L − 1` in samples.
    pub fn t_l(&self) -> f64 {
        self.l as f64 - 1.0
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.qam_order.trailing_zeros() as usize
    }

    pub fn sample_period_s(&self) -> f64 {
        1.0 / (self.m as f64 * self.subcarrier_spacing_hz)
    }

    /// Band edge in subcarrier units (midway past the outermost active index).
    pub fn band_edge(&self) -> f64 {
        self.subcarriers.iter().map(|k| k.abs()).max().unwrap_or(0) as f64 + 0.5
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.k();
        if k == 0 || k > self.m {
            return Err(Error::Config(format!("need 0 < K <= M, got K={k}, M={}", self.m)));
        }
        if self.l < 2 || self.l > self.m + self.mcp {
            return Err(Error::Config(format!(
                "need 2 <= L <= M+Mcp = {}, got L={}",
                self.m + self.mcp,
                self.l
            )));
        }
        let half = self.m as i64 / 2;
        let mut seen = std::collections::HashSet::new();
        for &kr in &self.subcarriers {
            if kr.abs() >= half {
                return Err(Error::Config(format!("subcarrier {kr} violates |k| < M/2 = {half}")));
            }
            if !seen.insert(kr) {
                return Err(Error::Config(format!("subcarrier {kr} listed twice")));
            }
        }
        QamConstellation::new(self.qam_order)?;
        if self.oversample == 0 {
            return Err(Error::Config("oversample must be >= 1".into()));
        }
        if self.symbols == 0 {
            return Err(Error::Config("symbols must be >= 1".into()));
        }
        if !(self.subcarrier_spacing_hz > 0.0) {
            return Err(Error::Config("subcarrier spacing must be positive".into()));
        }
        Ok(())
    }
}
