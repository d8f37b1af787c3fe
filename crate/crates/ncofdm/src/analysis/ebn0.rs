//! Per-bit SNR of the smoothed transmit signal relative to plain CP-OFDM.

use serde::{Deserialize, Serialize};

use super::imperfect::Integrator;
use crate::error::{Error, Result};
use crate::exec::trial_rng;
use crate::waveform::{random_symbols, LeastNormPrecoder, QamConstellation, SmootherContext, SystemConfig};

/// `∫ E|w(t)|² dt` over one symbol for unit-power data, on the
/// `cfg.oversample` midpoint grid.
pub fn smooth_energy(ctx: &SmootherContext, cfg: &SystemConfig) -> Result<f64> {
    cfg.validate()?;
    let int = Integrator::new(ctx, cfg)?;
    Ok(int.gram(-(cfg.mcp as f64), cfg.m as f64, 0.0))
}

/// `10log10(K·J̄/log2 J)`: per-bit SNR in dB with unit noise and no smoothing.
pub fn ebn0_scale_db(cfg: &SystemConfig) -> f64 {
    10.0 * (cfg.k() as f64 * cfg.oversample as f64 / cfg.bits_per_symbol() as f64).log10()
}

/// Per-bit SNR in dB when the smooth signal's power `E_w/T` adds to the
/// per-sample noise variance.
pub fn ebn0_relation(noise_var: f64, ctx: &SmootherContext, cfg: &SystemConfig) -> Result<f64> {
    let e_w = smooth_energy(ctx, cfg)?;
    ebn0_with_distortion(noise_var, e_w / cfg.symbol_len() as f64, cfg)
}

/// Same relation for any scheme whose added distortion has per-sample power
/// `distortion`.
pub fn ebn0_with_distortion(noise_var: f64, distortion: f64, cfg: &SystemConfig) -> Result<f64> {
    if !(noise_var >= 0.0) || !(distortion >= 0.0) || noise_var + distortion == 0.0 {
        return Err(Error::Config(format!(
            "noise {noise_var} and distortion {distortion} must be non-negative and not both zero"
        )));
    }
    Ok(ebn0_scale_db(cfg) - 10.0 * (noise_var + distortion).log10())
}

/// Mean `‖x̄ − x‖²` per symbol of the least-norm projection baseline, which is
/// also its per-sample distortion power. Runs one chain of `symbols` symbols.
pub fn baseline_distortion_power(cfg: &SystemConfig, symbols: usize, seed: u64) -> Result<f64> {
    if symbols == 0 {
        return Err(Error::Config("need at least one symbol".into()));
    }
    let precoder = LeastNormPrecoder::new(cfg)?;
    let constellation = QamConstellation::new(cfg.qam_order)?;
    let mut rng = trial_rng(seed, 0);
    let mut prev = random_symbols(&constellation, cfg.k(), &mut rng);
    let mut total = 0.0;
    for _ in 0..symbols {
        let x = random_symbols(&constellation, cfg.k(), &mut rng);
        let xbar = precoder.precode(&prev, &x)?;
        total += xbar.iter().zip(&x).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>();
        prev = xbar;
    }
    Ok(total / symbols as f64)
}

/// Per-bit SNR drop from the noise-only reference for both transmitters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ebn0Loss {
    pub reference_db: f64,
    pub low_interference_db: f64,
    /// Least-norm projection baseline.
    pub baseline_db: f64,
}

impl Ebn0Loss {
    pub fn low_interference_loss(&self) -> f64 {
        self.reference_db - self.low_interference_db
    }

    pub fn baseline_loss(&self) -> f64 {
        self.reference_db - self.baseline_db
    }
}

pub fn ebn0_losses(noise_var: f64, ctx: &SmootherContext, cfg: &SystemConfig, baseline_symbols: usize, seed: u64) -> Result<Ebn0Loss> {
    let distortion = baseline_distortion_power(cfg, baseline_symbols, seed)?;
    Ok(Ebn0Loss {
        reference_db: ebn0_with_distortion(noise_var, 0.0, cfg)?,
        low_interference_db: ebn0_relation(noise_var, ctx, cfg)?,
        baseline_db: ebn0_with_distortion(noise_var, distortion, cfg)?,
    })
}
