//! Correlation structure of the smoothed CP and timing-offset estimation.
//!
//! Times are in samples relative to the start of the symbol body, so the CP
//! covers `[-Mcp, 0)` and the body `[0, M)`.

use std::f64::consts::PI;
use std::ops::RangeInclusive;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::{apply_channel, apply_impairments, eva_profile, realize, ChannelProfile, Fading, Impairments};
use crate::error::{Error, Result};
use crate::exec::{par_map, trial_rng};
use crate::waveform::{assemble_stream, random_symbols, OfdmModulator, QamConstellation, SmootherContext, SystemConfig};

/// Offsets and channel seen by the correlator.
#[derive(Clone, Debug)]
pub struct CorrelationInputs<'a> {
    pub ctx: &'a SmootherContext,
    pub cfg: &'a SystemConfig,
    pub profile: &'a ChannelProfile,
    pub sto_samples: f64,
    /// CFO in subcarrier spacings.
    pub cfo_normalized: f64,
}

/// `R(t, Δ)` sampled on a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationSurface {
    pub t: Vec<f64>,
    pub delta: Vec<f64>,
    /// Row per `t`, column per `Δ`.
    pub values: Vec<Vec<Complex64>>,
}

/// `R(t, Δ) = E{r(t)·r*(t+Δ)}/K` for `t` in the symbol and `t + Δ` in the
/// body past the smoothed head, with unit-power data. A tap whose delayed copy at
/// `t` still carries the previous symbol contributes nothing.
pub fn analytic_correlation(t: f64, delta: f64, inputs: &CorrelationInputs) -> Result<Complex64> {
    let cfg = inputs.cfg;
    let ctx = inputs.ctx;
    let (m, mcp) = (cfg.m as f64, cfg.mcp as f64);
    let head_end = -mcp + ctx.t_l();
    if t < -mcp || delta <= 0.0 || t + delta < head_end || t + delta > m {
        return Err(Error::Domain(format!(
            "correlation needs t >= {} and t+Δ in [{head_end}, {m}], got t={t}, Δ={delta}",
            -mcp
        )));
    }
    let k = ctx.k() as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for (tap, p) in inputs
        .profile
        .sample_delays(cfg.sample_period_s())
        .into_iter()
        .zip(inputs.profile.powers())
    {
        let u = t - tap as f64 + inputs.sto_samples;
        if u < -mcp {
            continue;
        }
        let taus = [u + mcp];
        let basis = ctx.basis_matrix(&taus, ctx.n + 1);
        for (r, &kr) in ctx.subcarriers().iter().enumerate() {
            let mut smooth = Complex64::new(0.0, 0.0);
            for n in 0..=ctx.n {
                smooth += ctx.b[(n, r)] * basis[(0, n)];
            }
            let body = Complex64::from_polar(1.0, -2.0 * PI * kr * delta / m);
            let head = smooth * Complex64::from_polar(1.0, -2.0 * PI * kr * (t + delta - tap as f64 + inputs.sto_samples) / m);
            acc += p * (body - head);
        }
    }
    Ok(Complex64::from_polar(1.0, -2.0 * PI * inputs.cfo_normalized * delta / m) * acc / k)
}

/// `R(t, T_s)`, defined for `t` in `[-Mcp, 0]`.
pub fn analytic_correlation_ts(t: f64, inputs: &CorrelationInputs) -> Result<Complex64> {
    analytic_correlation(t, inputs.cfg.m as f64, inputs)
}

pub fn correlation_surface(t: &[f64], delta: &[f64], inputs: &CorrelationInputs) -> Result<CorrelationSurface> {
    let strictly_increasing = |v: &[f64]| v.windows(2).all(|w| w[0] < w[1]);
    if !strictly_increasing(t) || !strictly_increasing(delta) {
        return Err(Error::Config("surface grids must be strictly increasing".into()));
    }
    let rows: Vec<Result<Vec<Complex64>>> = par_map(t.len(), |i| delta.iter().map(|&d| analytic_correlation(t[i], d, inputs)).collect());
    Ok(CorrelationSurface {
        t: t.to_vec(),
        delta: delta.to_vec(),
        values: rows.into_iter().collect::<Result<_>>()?,
    })
}

/// Sample average of `r(t)·r*(t+Δ)/K` over independent data and channel
/// draws. `t` and `Δ` are integer sample positions here.
pub fn empirical_correlation(t: &[i64], delta: i64, inputs: &CorrelationInputs, realizations: usize, seed: u64) -> Result<Vec<Complex64>> {
    let cfg = inputs.cfg;
    if realizations == 0 {
        return Err(Error::Config("need at least one realization".into()));
    }
    let sym = cfg.symbol_len() as i64;
    let mcp = cfg.mcp as i64;
    let base = sym + mcp;
    for &ti in t {
        let hi = base + ti + delta;
        if base + ti < 0 || hi >= 3 * sym {
            return Err(Error::Domain(format!("lag pair ({ti}, {delta}) leaves the simulated burst")));
        }
    }
    let constellation = QamConstellation::new(cfg.qam_order)?;
    let sto = inputs.sto_samples.round() as i64;
    let parts: Vec<Result<Vec<Complex64>>> = par_map(realizations, |i| {
        let mut rng = trial_rng(seed, i as u64);
        let data: Vec<Vec<Complex64>> = (0..3).map(|_| random_symbols(&constellation, cfg.k(), &mut rng)).collect();
        let stream = assemble_stream(&data, inputs.ctx, cfg)?;
        let chan = realize(inputs.profile, 4, Fading::Block, &mut rng)?;
        let faded = apply_channel(&stream, &chan, inputs.profile, cfg)?;
        let imp = Impairments::from_normalized(sto, inputs.cfo_normalized, 0.0, cfg);
        let rx = apply_impairments(&faded, &imp, cfg, &mut rng)?;
        Ok(t.iter()
            .map(|&ti| {
                let a = (base + ti) as usize;
                rx[a] * rx[a + delta as usize].conj()
            })
            .collect())
    });
    let mut acc = vec![Complex64::new(0.0, 0.0); t.len()];
    for part in parts {
        for (a, v) in acc.iter_mut().zip(part?) {
            *a += v;
        }
    }
    let scale = 1.0 / (realizations as f64 * cfg.k() as f64);
    Ok(acc.into_iter().map(|v| v * scale).collect())
}

/// CP timing estimate: the candidate start `d` maximising the normalised
/// lag-`M` correlation `|Σ r[d+m]·r*[d+m+M]| / √(E_d·E_{d+M})` over a
/// CP-length window. Returns the CP start index.
pub fn cp_sto_estimate(rx: &[Complex64], candidates: RangeInclusive<usize>, cfg: &SystemConfig) -> Result<usize> {
    let (m, mcp) = (cfg.m, cfg.mcp);
    if rx.len() < 2 * cfg.symbol_len() {
        return Err(Error::Dimension("CP estimation needs at least two symbols".into()));
    }
    let (&lo, &hi) = (candidates.start(), candidates.end());
    if lo > hi || hi + m + mcp > rx.len() {
        return Err(Error::Dimension(format!(
            "candidate range {lo}..={hi} overruns the {}-sample buffer",
            rx.len()
        )));
    }
    let mut best = (lo, f64::NEG_INFINITY);
    for d in lo..=hi {
        let (mut corr, mut e0, mut e1) = (Complex64::new(0.0, 0.0), 0.0, 0.0);
        for i in d..d + mcp {
            corr += rx[i] * rx[i + m].conj();
            e0 += rx[i].norm_sqr();
            e1 += rx[i + m].norm_sqr();
        }
        let score = if e0 * e1 > 0.0 { corr.norm() / (e0 * e1).sqrt() } else { 0.0 };
        if score > best.1 {
            best = (d, score);
        }
    }
    Ok(best.0)
}

/// Training timing estimate: the `d` maximising the normalised
/// cross-correlation `|Σ r[d+m]·s*[m]| / √(Σ|r[d+m]|²)` with the known
/// waveform `s`.
pub fn training_sto_estimate(rx: &[Complex64], training: &[Complex64], candidates: RangeInclusive<usize>) -> Result<usize> {
    let (&lo, &hi) = (candidates.start(), candidates.end());
    if training.is_empty() || lo > hi || hi + training.len() > rx.len() {
        return Err(Error::Dimension("training window overruns the received buffer".into()));
    }
    let mut best = (lo, f64::NEG_INFINITY);
    for d in lo..=hi {
        let window = &rx[d..d + training.len()];
        let energy: f64 = window.iter().map(|v| v.norm_sqr()).sum();
        if energy == 0.0 {
            continue;
        }
        let corr: Complex64 = window.iter().zip(training).map(|(r, s)| r * s.conj()).sum();
        let score = corr.norm() / energy.sqrt();
        if score > best.1 {
            best = (d, score);
        }
    }
    Ok(best.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    Cp,
    Training,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SyncChannel {
    Awgn,
    Eva,
}

/// Error-variance sweep settings. `smoothed = false` sends plain CP-OFDM.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StoExperiment {
    pub estimator: Estimator,
    pub channel: SyncChannel,
    pub smoothed: bool,
    pub sto_samples: i64,
    pub cfo_hz: f64,
    /// Per-bit SNR points in dB.
    pub snr_db: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    /// Half-width of the search around the nominal symbol start.
    pub search_half_width: usize,
}

impl Default for StoExperiment {
    fn default() -> Self {
        Self {
            estimator: Estimator::Cp,
            channel: SyncChannel::Eva,
            smoothed: true,
            sto_samples: 30,
            cfo_hz: 111.11,
            snr_db: vec![0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0],
            trials: 1000,
            seed: 0,
            search_half_width: 144,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MseRow {
    pub snr_db: f64,
    pub mse_samples_sq: f64,
}

/// Mean squared timing error per SNR point. Each trial sends three symbols,
/// the middle one carrying the training data, and estimates where that
/// symbol's CP starts in the received buffer. Trial `i` reuses the same data,
/// channel and unit noise at every SNR point and for every waveform, so
/// rows and experiments sharing a seed are paired.
pub fn sto_error_variance(exp: &StoExperiment, ctx: &SmootherContext, cfg: &SystemConfig) -> Result<Vec<MseRow>> {
    cfg.validate()?;
    if exp.trials == 0 {
        return Err(Error::Config("need at least one trial".into()));
    }
    let sym = cfg.symbol_len();
    if exp.sto_samples.unsigned_abs() as usize + exp.search_half_width >= sym {
        return Err(Error::Config("offset plus search width must stay below one symbol".into()));
    }
    let profile = match exp.channel {
        SyncChannel::Awgn => ChannelProfile::flat(),
        SyncChannel::Eva => eva_profile(),
    };
    let constellation = QamConstellation::new(cfg.qam_order)?;
    let modulator = OfdmModulator::new(cfg)?;
    // Fixed known training symbol.
    let training_data = random_symbols(&constellation, cfg.k(), &mut trial_rng(exp.seed ^ 0x5eed, 0));
    let training = modulator.modulate(&training_data)?;
    let truth = (sym as i64 - exp.sto_samples) as usize;
    let candidates = sym - exp.search_half_width..=sym + exp.search_half_width;
    exp.snr_db
        .iter()
        .map(|&snr| {
            let noise_var = crate::analysis::noise_var_for_ebn0(snr, cfg);
            let errs: Vec<Result<f64>> = par_map(exp.trials, |i| {
                let mut rng = trial_rng(exp.seed, i as u64);
                let data = [
                    random_symbols(&constellation, cfg.k(), &mut rng),
                    training_data.clone(),
                    random_symbols(&constellation, cfg.k(), &mut rng),
                ];
                let stream = if exp.smoothed {
                    assemble_stream(&data, ctx, cfg)?
                } else {
                    let mut s = Vec::with_capacity(3 * sym);
                    for x in &data {
                        s.extend(modulator.modulate(x)?);
                    }
                    s
                };
                let chan = realize(&profile, 4, Fading::Block, &mut rng)?;
                let faded = apply_channel(&stream, &chan, &profile, cfg)?;
                let imp = Impairments {
                    cfo_hz: exp.cfo_hz,
                    noise_var,
                    ..Impairments::from_normalized(exp.sto_samples, 0.0, 0.0, cfg)
                };
                let rx = apply_impairments(&faded, &imp, cfg, &mut rng)?;
                let est = match exp.estimator {
                    Estimator::Cp => cp_sto_estimate(&rx, candidates.clone(), cfg)?,
                    Estimator::Training => training_sto_estimate(&rx, &training, candidates.clone())?,
                };
                Ok((est as f64 - truth as f64).powi(2))
            });
            let total: f64 = errs.into_iter().sum::<Result<f64>>()?;
            Ok(MseRow {
                snr_db: snr,
                mse_samples_sq: total / exp.trials as f64,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::waveform::build_smoother;

    fn inputs<'a>(ctx: &'a SmootherContext, cfg: &'a SystemConfig, p: &'a ChannelProfile) -> CorrelationInputs<'a> {
        CorrelationInputs {
            ctx,
            cfg,
            profile: p,
            sto_samples: 0.0,
            cfo_normalized: 0.0,
        }
    }

    #[test]
    fn unit_modulus_without_smoothing() {
        let cfg = SystemConfig::new(0, 8);
        let mut ctx = build_smoother(&cfg).unwrap();
        ctx.b = crate::numerics::CMatrix::zeros(1, cfg.k());
        let flat = ChannelProfile::flat();
        let mut i = inputs(&ctx, &cfg, &flat);
        i.cfo_normalized = 0.1;
        let r = analytic_correlation_ts(-20.0, &i).unwrap();
        assert!((r.norm() - 1.0).abs() < 1e-12);
        assert!((r.arg() + 2.0 * PI * 0.1).abs() < 1e-12);
    }

    #[test]
    fn domain_is_enforced() {
        let cfg = SystemConfig::new(4, 1000);
        let ctx = build_smoother(&cfg).unwrap();
        let p = eva_profile();
        let i = inputs(&ctx, &cfg, &p);
        assert!(matches!(analytic_correlation_ts(106.0, &i), Err(Error::Domain(_))));
        assert!(matches!(analytic_correlation_ts(-145.0, &i), Err(Error::Domain(_))));
        assert!(analytic_correlation_ts(0.0, &i).is_ok());
    }

    #[test]
    fn clean_cp_estimate_is_exact() {
        let cfg = SystemConfig::new(0, 8);
        let c = QamConstellation::new(16).unwrap();
        let modulator = OfdmModulator::new(&cfg).unwrap();
        let mut rng = trial_rng(1, 0);
        let mut s = Vec::new();
        let mut training = Vec::new();
        for i in 0..3 {
            let y = modulator.modulate(&random_symbols(&c, cfg.k(), &mut rng)).unwrap();
            if i == 1 {
                training = y.clone();
            }
            s.extend(y);
        }
        let imp = Impairments::from_normalized(30, 0.0, 0.0, &cfg);
        let rx = apply_impairments(&s, &imp, &cfg, &mut rng).unwrap();
        let sym = cfg.symbol_len();
        let truth = sym - 30;
        assert_eq!(cp_sto_estimate(&rx, sym - 100..=sym + 100, &cfg).unwrap(), truth);
        assert_eq!(training_sto_estimate(&rx, &training, sym - 100..=sym + 100).unwrap(), truth);
    }

    #[test]
    fn noiseless_mse_is_zero() {
        let cfg = SystemConfig::new(0, 8);
        let ctx = build_smoother(&cfg).unwrap();
        for estimator in [Estimator::Cp, Estimator::Training] {
            let exp = StoExperiment {
                estimator,
                channel: SyncChannel::Awgn,
                smoothed: false,
                cfo_hz: 0.0,
                snr_db: vec![300.0],
                trials: 4,
                ..StoExperiment::default()
            };
            assert_eq!(sto_error_variance(&exp, &ctx, &cfg).unwrap()[0].mse_samples_sq, 0.0);
        }
    }
}
