//! Smooth-signal leakage into the DFT window under perfect synchronization,
//! the resulting per-bin SINR and its fading average.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::{apply_channel, apply_impairments, frequency_response, realize, ChannelProfile, Fading, Impairments};
use crate::error::{Error, Result};
use crate::exec::{par_map, trial_rng};
use crate::numerics::{exp_integral_e1_scaled, CMatrix};
use crate::receiver::{measure_ber, measure_sinr, Demodulator, SinrTrial};
use crate::waveform::{assemble_stream, qam_demap, random_symbols, QamConstellation, SmootherContext, SystemConfig};

/// Per-bin smooth-signal interference statistics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InterferenceModel {
    /// `σ²_{w,k}`; the leaked power on bin `k` is `2σ²_{w,k}`.
    pub sigma_w_sq: Vec<f64>,
    /// Samples of each tap's delayed smooth tail inside the DFT window,
    /// `round(τ/T_samp) + L − Mcp` clipped to `[0, L]`. These fix the
    /// selection matrix that moves the tail to the window start.
    pub theta: Vec<usize>,
    pub tap_powers: Vec<f64>,
}

impl InterferenceModel {
    pub fn mean_sigma_w_sq(&self) -> f64 {
        self.sigma_w_sq.iter().sum::<f64>() / self.sigma_w_sq.len() as f64
    }
}

/// `AAᴴ + BBᴴ`, the covariance of the smoother coefficients for unit-variance data.
pub fn coefficient_covariance(ctx: &SmootherContext) -> Result<CMatrix> {
    ctx.a.matmul(&ctx.a.adjoint())?.add(&ctx.b.matmul(&ctx.b.adjoint())?)
}

/// `θ` for every tap of `profile`.
pub fn tail_offsets(profile: &ChannelProfile, cfg: &SystemConfig) -> Vec<usize> {
    profile
        .sample_delays(cfg.sample_period_s())
        .into_iter()
        .map(|d| (d as i64 + cfg.l as i64 - cfg.mcp as i64).clamp(0, cfg.l as i64) as usize)
        .collect()
}

/// Leakage of the delayed smooth tails into each active bin, summed over
/// taps weighted by their powers.
pub fn smooth_interference_power(ctx: &SmootherContext, profile: &ChannelProfile, cfg: &SystemConfig) -> Result<InterferenceModel> {
    profile.validate()?;
    let cov = coefficient_covariance(ctx)?;
    let n1 = ctx.n + 1;
    let theta = tail_offsets(profile, cfg);
    let powers = profile.powers();
    let l = cfg.l;
    let m = cfg.m as f64;
    let per_bin: Vec<f64> = par_map(cfg.k(), |r| {
        let k = cfg.subcarriers[r] as f64;
        let mut total = 0.0;
        for (&th, &p) in theta.iter().zip(&powers) {
            if th == 0 || p == 0.0 {
                continue;
            }
            let mut g = vec![Complex64::new(0.0, 0.0); n1];
            for j in 0..th {
                let e = Complex64::from_polar(1.0 / m, -2.0 * PI * k * j as f64 / m);
                for (n, gn) in g.iter_mut().enumerate() {
                    *gn += e * ctx.qf[(l - th + j, n)];
                }
            }
            let mut quad = Complex64::new(0.0, 0.0);
            for a in 0..n1 {
                for b in 0..n1 {
                    quad += g[a] * cov[(a, b)] * g[b].conj();
                }
            }
            total += p * quad.re;
        }
        total / 2.0
    });
    Ok(InterferenceModel {
        sigma_w_sq: per_bin,
        theta,
        tap_powers: powers,
    })
}

/// `γ = |H|² / (2σ_w²|H|² + σ_n²/M)`.
pub fn instantaneous_sinr(h: Complex64, sigma_w_sq: f64, noise_var: f64, m: usize) -> Result<f64> {
    if sigma_w_sq <= 0.0 && noise_var <= 0.0 {
        return Err(Error::Degenerate("SINR needs noise or interference".into()));
    }
    let a = h.norm_sqr();
    Ok(a / (2.0 * sigma_w_sq * a + noise_var / m as f64))
}

/// `E{γ}` for `|H|²` exponential with mean `mean_alpha`.
pub fn average_sinr_bin(sigma_w_sq: f64, noise_var: f64, m: usize, mean_alpha: f64) -> Result<f64> {
    let s = 2.0 * sigma_w_sq;
    let n = noise_var / m as f64;
    if s <= 0.0 && n <= 0.0 {
        return Err(Error::Degenerate("SINR needs noise or interference".into()));
    }
    if s <= 0.0 {
        return Ok(mean_alpha / n);
    }
    if n <= 0.0 {
        return Ok(1.0 / s);
    }
    let z = n / (s * mean_alpha);
    // 1 − z·e^z·E1(z); the asymptotic series avoids cancellation for large z.
    let tail = if z > 1e3 {
        1.0 / z - 2.0 / (z * z) + 6.0 / z.powi(3) - 24.0 / z.powi(4)
    } else {
        1.0 - z * exp_integral_e1_scaled(z)?
    };
    Ok(tail / s)
}

/// Average of [`average_sinr_bin`] over the active bins, in dB.
pub fn average_sinr_db(model: &InterferenceModel, noise_var: f64, cfg: &SystemConfig) -> Result<f64> {
    let mean_alpha: f64 = model.tap_powers.iter().sum();
    let mut sum = 0.0;
    for &s in &model.sigma_w_sq {
        sum += average_sinr_bin(s, noise_var, cfg.m, mean_alpha)?;
    }
    Ok(10.0 * (sum / model.sigma_w_sq.len() as f64).log10())
}

/// Density of `γ`; positive on `[0, 1/(2σ_w²))`.
pub fn sinr_pdf(gamma: f64, sigma_w_sq: f64, noise_var: f64, m: usize, mean_alpha: f64) -> Result<f64> {
    let s = 2.0 * sigma_w_sq;
    let n = noise_var / m as f64;
    if n <= 0.0 {
        return Err(Error::Degenerate("density needs a positive noise term".into()));
    }
    if gamma < 0.0 || (s > 0.0 && gamma * s >= 1.0) {
        return Ok(0.0);
    }
    let den = 1.0 - s * gamma;
    let alpha = gamma * n / den;
    Ok((-alpha / mean_alpha).exp() / mean_alpha * n / (den * den))
}

/// Monte-Carlo settings for link simulations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LinkMonteCarlo {
    /// Independent channel draws.
    pub realizations: usize,
    /// Symbols sent through each draw.
    pub symbols: usize,
    pub seed: u64,
}

impl Default for LinkMonteCarlo {
    fn default() -> Self {
        Self {
            realizations: 1000,
            symbols: 10,
            seed: 0,
        }
    }
}

/// Block-fading pass of `mc.symbols` smoothed symbols through one channel
/// draw, with AWGN and perfect synchronization. Returns the true response,
/// the data and the demodulated bins.
pub(crate) fn simulate_block(
    cfg: &SystemConfig,
    ctx: &SmootherContext,
    profile: &ChannelProfile,
    noise_var: f64,
    symbols: usize,
    rng: &mut rand_chacha::ChaCha12Rng,
) -> Result<SinrTrial> {
    let constellation = QamConstellation::new(cfg.qam_order)?;
    let chan = realize(profile, symbols + 1, Fading::Block, rng)?;
    let data: Vec<Vec<Complex64>> = (0..symbols).map(|_| random_symbols(&constellation, cfg.k(), rng)).collect();
    let stream = assemble_stream(&data, ctx, cfg)?;
    let faded = apply_channel(&stream, &chan, profile, cfg)?;
    let imp = Impairments {
        noise_var,
        ..Impairments::default()
    };
    let rx = apply_impairments(&faded, &imp, cfg, rng)?;
    let demod = Demodulator::new(cfg)?;
    let delays = profile.sample_delays(cfg.sample_period_s());
    let response = frequency_response(&chan.gains[0], &delays, cfg);
    let bins = (0..symbols)
        .map(|i| demod.demodulate(&rx, i).map(|s| s.bins))
        .collect::<Result<Vec<_>>>()?;
    Ok(SinrTrial {
        response,
        tx: data,
        rx: bins,
    })
}

/// Empirical average SINR (dB) of the full chain under perfect sync.
pub fn simulate_perfect_sync_sinr(
    cfg: &SystemConfig,
    ctx: &SmootherContext,
    profile: &ChannelProfile,
    noise_var: f64,
    mc: &LinkMonteCarlo,
) -> Result<f64> {
    let trials: Vec<Result<SinrTrial>> = par_map(mc.realizations, |i| {
        let mut rng = trial_rng(mc.seed, i as u64);
        simulate_block(cfg, ctx, profile, noise_var, mc.symbols, &mut rng)
    });
    let trials = trials.into_iter().collect::<Result<Vec<_>>>()?;
    measure_sinr(&trials)
}

/// Empirical BER of the same chain with zero-forcing on the true response.
pub fn simulate_perfect_sync_ber(
    cfg: &SystemConfig,
    ctx: &SmootherContext,
    profile: &ChannelProfile,
    noise_var: f64,
    mc: &LinkMonteCarlo,
) -> Result<f64> {
    let per: Vec<Result<f64>> = par_map(mc.realizations, |i| {
        let mut rng = trial_rng(mc.seed, i as u64);
        let trial = simulate_block(cfg, ctx, profile, noise_var, mc.symbols, &mut rng)?;
        let mut errors = 0.0;
        for (tx, rx) in trial.tx.iter().zip(&trial.rx) {
            let eq: Vec<Complex64> = rx.iter().zip(&trial.response).map(|(r, h)| r / h).collect();
            errors += measure_ber(&qam_demap(tx, cfg.qam_order)?, &qam_demap(&eq, cfg.qam_order)?)?;
        }
        Ok(errors / mc.symbols as f64)
    });
    let per = per.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(per.iter().sum::<f64>() / per.len().max(1) as f64)
}

/// Per-sample noise variance giving per-bin SNR `snr_db` at unit channel gain.
pub fn noise_var_for_bin_snr(snr_db: f64, cfg: &SystemConfig) -> f64 {
    cfg.m as f64 * 10f64.powf(-snr_db / 10.0)
}
