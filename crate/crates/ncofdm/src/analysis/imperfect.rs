//! SINR with timing and frequency offsets for the three window positions:
//! late start (I), early start inside the clean CP margin (II), and early
//! start reaching the previous symbol's delayed tail (III).
//!
//! Energies are integrals over the DFT window in sample units. The
//! basis-product integrals use midpoint sums with `cfg.oversample` points
//! per sample.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::interference::coefficient_covariance;
use crate::channel::{apply_channel, apply_impairments, realize, ChannelProfile, Fading, Impairments};
use crate::error::{Error, Result};
use crate::exec::{par_map, trial_rng};
use crate::numerics::CMatrix;
use crate::waveform::{assemble_stream, random_symbols, OfdmModulator, QamConstellation, SmootherContext, SystemConfig};

/// Window position relative to the true body start.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SyncCase {
    /// Late by `δ1`.
    Late,
    /// Early by `δ1`, every delayed copy still inside the CP.
    EarlyClean,
    /// Early by `δ1`, the longest taps reach into the previous symbol.
    EarlyOverlap,
}

/// Offsets and environment for one SINR evaluation.
#[derive(Clone, Debug)]
pub struct SinrCaseInputs<'a> {
    /// Magnitude of the timing offset in samples; the case fixes its sign.
    pub sto_samples: f64,
    /// CFO in subcarrier spacings.
    pub cfo_normalized: f64,
    pub profile: &'a ChannelProfile,
    pub ctx: &'a SmootherContext,
    pub cfg: &'a SystemConfig,
    /// Per-sample noise variance.
    pub noise_var: f64,
}

impl SinrCaseInputs<'_> {
    fn delays(&self) -> Vec<f64> {
        self.profile
            .sample_delays(self.cfg.sample_period_s())
            .into_iter()
            .map(|d| d as f64)
            .collect()
    }

    /// Taps arriving no later than the offset.
    pub fn l1(&self) -> usize {
        self.delays().iter().filter(|&&d| d <= self.sto_samples).count()
    }

    /// Taps whose copy, with an early window, starts inside the previous symbol.
    pub fn l2(&self) -> usize {
        let mcp = self.cfg.mcp as f64;
        self.delays().iter().filter(|&&d| d >= mcp - self.sto_samples).count()
    }

    fn validate(&self) -> Result<()> {
        self.cfg.validate()?;
        self.profile.validate()?;
        if !(self.sto_samples >= 0.0) || self.sto_samples >= self.cfg.m as f64 {
            return Err(Error::Config(format!("timing offset {} must lie in [0, M)", self.sto_samples)));
        }
        if !(self.noise_var >= 0.0) {
            return Err(Error::Config("noise variance must be non-negative".into()));
        }
        Ok(())
    }
}

pub(super) struct Integrator<'a> {
    ctx: &'a SmootherContext,
    cov: CMatrix,
    per_sample: usize,
    mcp: f64,
}

impl<'a> Integrator<'a> {
    pub(super) fn new(ctx: &'a SmootherContext, cfg: &SystemConfig) -> Result<Self> {
        if cfg.oversample == 0 {
            return Err(Error::Config("oversample must be at least 1".into()));
        }
        Ok(Self {
            ctx,
            cov: coefficient_covariance(ctx)?,
            per_sample: cfg.oversample,
            mcp: cfg.mcp as f64,
        })
    }

    /// Midpoints of `[lo, hi)` restricted to where `u + shift` falls on the
    /// smoother support. Returns body-relative times `u` and the step.
    fn support_grid(&self, lo: f64, hi: f64, shift: f64) -> (Vec<f64>, f64) {
        let n = ((hi - lo) * self.per_sample as f64).round();
        if n <= 0.0 {
            return (Vec::new(), 0.0);
        }
        let dt = 1.0 / self.per_sample as f64;
        let t_l = self.ctx.t_l();
        let pts = (0..n as usize)
            .map(|i| lo + (i as f64 + 0.5) * dt + shift)
            .filter(|u| {
                let tau = u + self.mcp;
                (0.0..=t_l).contains(&tau)
            })
            .collect();
        (pts, dt)
    }

    fn basis_rows(&self, u: &[f64]) -> CMatrix {
        let taus: Vec<f64> = u.iter().map(|u| u + self.mcp).collect();
        self.ctx.basis_matrix(&taus, self.ctx.n + 1)
    }

    /// `∫_lo^hi E|w(t + shift)|² dt` for unit-variance data.
    pub(super) fn gram(&self, lo: f64, hi: f64, shift: f64) -> f64 {
        let (u, dt) = self.support_grid(lo, hi, shift);
        if u.is_empty() {
            return 0.0;
        }
        let f = self.basis_rows(&u);
        let n1 = self.ctx.n + 1;
        let mut total = 0.0;
        for row in 0..u.len() {
            let fr = f.row(row);
            for a in 0..n1 {
                for b in 0..n1 {
                    total += (self.cov[(a, b)] * fr[a] * fr[b].conj()).re;
                }
            }
        }
        total * dt
    }
}

fn sinr_from_energy(interference: f64, inputs: &SinrCaseInputs) -> f64 {
    let ts = inputs.cfg.m as f64;
    inputs.cfg.k() as f64 * ts / (interference + inputs.noise_var * ts)
}

/// Interference energy for a late window.
pub fn interference_case1(inputs: &SinrCaseInputs) -> Result<f64> {
    inputs.validate()?;
    let cfg = inputs.cfg;
    let ctx = inputs.ctx;
    let int = Integrator::new(ctx, cfg)?;
    let (ts, t_sym, tcp) = (cfg.m as f64, cfg.symbol_len() as f64, cfg.mcp as f64);
    let d1 = inputs.sto_samples;
    let k = cfg.k() as f64;
    let phase: Vec<Complex64> = ctx
        .subcarriers()
        .iter()
        .map(|&kr| Complex64::from_polar(1.0, -2.0 * PI * (inputs.cfo_normalized * t_sym + kr * tcp) / ts))
        .collect();
    let mut total = 0.0;
    for (tp, p) in inputs.delays().into_iter().zip(inputs.profile.powers()) {
        total += p * int.gram(0.0, ts - d1, d1 - tp);
        if tp <= d1 {
            total += 2.0 * k * p * (d1 - tp);
            let shift = d1 - t_sym - tp;
            total += p * int.gram(ts - d1 + tp, ts, shift);
            let (u, dt) = int.support_grid(ts - d1 + tp, ts, shift);
            if u.is_empty() {
                continue;
            }
            let f = int.basis_rows(&u);
            let mut cross = Complex64::new(0.0, 0.0);
            for (row, &uu) in u.iter().enumerate() {
                let fr = f.row(row);
                for (r, &kr) in ctx.subcarriers().iter().enumerate() {
                    let mut coef = Complex64::new(0.0, 0.0);
                    for (n, fv) in fr.iter().enumerate() {
                        coef += fv * (ctx.a[(n, r)] * phase[r] + ctx.b[(n, r)]);
                    }
                    cross += coef * Complex64::from_polar(1.0, -2.0 * PI * kr * uu / ts);
                }
            }
            total -= 2.0 * p * (cross * dt).re;
        }
    }
    Ok(total)
}

/// Interference energy for an early window inside the clean CP margin.
pub fn interference_case2(inputs: &SinrCaseInputs) -> Result<f64> {
    inputs.validate()?;
    let dmax = inputs.delays().into_iter().fold(0.0, f64::max);
    if inputs.sto_samples + dmax > inputs.cfg.mcp as f64 {
        return Err(Error::CaseMismatch(format!(
            "early offset {} plus delay spread {dmax} exceeds the CP of {} samples",
            inputs.sto_samples, inputs.cfg.mcp
        )));
    }
    let int = Integrator::new(inputs.ctx, inputs.cfg)?;
    let ts = inputs.cfg.m as f64;
    let d1 = inputs.sto_samples;
    Ok(inputs
        .delays()
        .into_iter()
        .zip(inputs.profile.powers())
        .map(|(tp, p)| p * int.gram(0.0, ts - d1, -tp - d1))
        .sum())
}

/// Interference energy for an early window that overlaps the previous symbol.
pub fn interference_case3(inputs: &SinrCaseInputs) -> Result<f64> {
    inputs.validate()?;
    let tcp = inputs.cfg.mcp as f64;
    let dmax = inputs.delays().into_iter().fold(0.0, f64::max);
    if inputs.sto_samples + dmax < tcp {
        return Err(Error::CaseMismatch(format!(
            "early offset {} plus delay spread {dmax} stays inside the CP of {tcp} samples",
            inputs.sto_samples
        )));
    }
    let int = Integrator::new(inputs.ctx, inputs.cfg)?;
    let ts = inputs.cfg.m as f64;
    let k = inputs.cfg.k() as f64;
    let d1 = inputs.sto_samples;
    let mut total = 0.0;
    for (tp, p) in inputs.delays().into_iter().zip(inputs.profile.powers()) {
        if tp >= tcp - d1 {
            total += 2.0 * k * p * (tp - tcp + d1);
        }
        total += p * int.gram((d1 + tp - tcp).max(0.0), ts, -d1 - tp);
    }
    Ok(total)
}

/// `γ_I = K·T_s/(I_1 + σ_n²T_s)`.
pub fn sinr_case1(inputs: &SinrCaseInputs) -> Result<f64> {
    Ok(sinr_from_energy(interference_case1(inputs)?, inputs))
}

/// `γ_II = K·T_s/(I_2 + σ_n²T_s)`.
pub fn sinr_case2(inputs: &SinrCaseInputs) -> Result<f64> {
    Ok(sinr_from_energy(interference_case2(inputs)?, inputs))
}

/// `γ_III = K·T_s/(I_3 + σ_n²T_s)`.
pub fn sinr_case3(inputs: &SinrCaseInputs) -> Result<f64> {
    Ok(sinr_from_energy(interference_case3(inputs)?, inputs))
}

pub fn sinr_case(case: SyncCase, inputs: &SinrCaseInputs) -> Result<f64> {
    match case {
        SyncCase::Late => sinr_case1(inputs),
        SyncCase::EarlyClean => sinr_case2(inputs),
        SyncCase::EarlyOverlap => sinr_case3(inputs),
    }
}

/// Signal and interference-plus-noise energy measured over the DFT window.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CaseMeasurement {
    pub signal: f64,
    pub interference: f64,
}

impl CaseMeasurement {
    pub fn sinr(&self) -> f64 {
        self.signal / self.interference
    }
}

/// Time-domain simulation of one case. Each trial sends three smoothed
/// symbols through one block-faded channel draw with a continuous CFO ramp
/// and AWGN, then opens the DFT window of the middle symbol at the offset.
/// The desired part is the middle symbol's cyclic CP-OFDM waveform through
/// the same channel and ramp; everything else in the window counts as
/// interference.
pub fn simulate_case(case: SyncCase, inputs: &SinrCaseInputs, trials: usize, seed: u64) -> Result<CaseMeasurement> {
    inputs.validate()?;
    if trials == 0 {
        return Err(Error::Config("need at least one trial".into()));
    }
    let cfg = inputs.cfg;
    let d1 = inputs.sto_samples.round() as i64;
    let offset = match case {
        SyncCase::Late => d1,
        SyncCase::EarlyClean | SyncCase::EarlyOverlap => -d1,
    };
    let modulator = OfdmModulator::new(cfg)?;
    let constellation = QamConstellation::new(cfg.qam_order)?;
    let delays = inputs.profile.sample_delays(cfg.sample_period_s());
    let (m, mcp, t_sym) = (cfg.m as i64, cfg.mcp as i64, cfg.symbol_len() as i64);
    let step = 2.0 * PI * inputs.cfo_normalized / cfg.m as f64;
    let per: Vec<Result<CaseMeasurement>> = par_map(trials, |i| {
        let mut rng = trial_rng(seed, i as u64);
        let data: Vec<Vec<Complex64>> = (0..3).map(|_| random_symbols(&constellation, cfg.k(), &mut rng)).collect();
        let chan = realize(inputs.profile, 4, Fading::Block, &mut rng)?;
        let stream = assemble_stream(&data, inputs.ctx, cfg)?;
        let faded = apply_channel(&stream, &chan, inputs.profile, cfg)?;
        let imp = Impairments {
            cfo_hz: inputs.cfo_normalized * cfg.subcarrier_spacing_hz,
            noise_var: inputs.noise_var,
            ..Impairments::default()
        };
        let rx = apply_impairments(&faded, &imp, cfg, &mut rng)?;
        let clean = modulator.modulate(&data[1])?;
        let start = t_sym + mcp + offset;
        let mut out = CaseMeasurement::default();
        for n in start..start + m {
            let mut desired = Complex64::new(0.0, 0.0);
            for (h, &d) in chan.gains[0].iter().zip(&delays) {
                let local = (n - t_sym - mcp - d as i64).rem_euclid(m);
                desired += h * clean[(local + mcp) as usize];
            }
            desired *= Complex64::from_polar(1.0, step * n as f64);
            out.signal += desired.norm_sqr();
            out.interference += (rx[n as usize] - desired).norm_sqr();
        }
        Ok(out)
    });
    let mut acc = CaseMeasurement::default();
    for r in per {
        let r = r?;
        acc.signal += r.signal;
        acc.interference += r.interference;
    }
    acc.signal /= trials as f64;
    acc.interference /= trials as f64;
    Ok(acc)
}

/// Per-sample noise variance for per-bit SNR `ebn0_db` with no smooth signal.
pub fn noise_var_for_ebn0(ebn0_db: f64, cfg: &SystemConfig) -> f64 {
    cfg.k() as f64 * cfg.oversample as f64 / (cfg.bits_per_symbol() as f64 * 10f64.powf(ebn0_db / 10.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::eva_profile;
    use crate::waveform::build_smoother;

    fn inputs<'a>(ctx: &'a SmootherContext, cfg: &'a SystemConfig, p: &'a ChannelProfile, d1: f64, cfo: f64) -> SinrCaseInputs<'a> {
        SinrCaseInputs {
            sto_samples: d1,
            cfo_normalized: cfo,
            profile: p,
            ctx,
            cfg,
            noise_var: 1.0,
        }
    }

    #[test]
    fn interference_free_limit() {
        let cfg = SystemConfig::new(0, 100);
        let ctx = build_smoother(&cfg).unwrap();
        let flat = ChannelProfile::flat();
        let i = inputs(&ctx, &cfg, &flat, 0.0, 0.0);
        // L < Mcp: the smooth head ends before the window opens.
        assert_eq!(interference_case1(&i).unwrap(), 0.0);
        let g = sinr_case1(&i).unwrap();
        assert!((g - cfg.k() as f64).abs() < 1e-9);
    }

    #[test]
    fn late_and_early_meet_at_zero_offset() {
        let cfg = SystemConfig::new(2, 1000);
        let ctx = build_smoother(&cfg).unwrap();
        let p = eva_profile();
        let a = interference_case1(&inputs(&ctx, &cfg, &p, 0.0, 0.0)).unwrap();
        let b = interference_case2(&inputs(&ctx, &cfg, &p, 0.0, 0.0)).unwrap();
        assert!(((a - b) / b).abs() < 1e-12);
    }

    #[test]
    fn early_cases_agree_at_boundary() {
        let cfg = SystemConfig::new(2, 100);
        let ctx = build_smoother(&cfg).unwrap();
        let p = eva_profile();
        let dmax = p.max_delay_samples(cfg.sample_period_s()) as f64;
        let i = inputs(&ctx, &cfg, &p, cfg.mcp as f64 - dmax, 0.0);
        let c2 = interference_case2(&i).unwrap();
        let c3 = interference_case3(&i).unwrap();
        assert!(c2 > 0.0 && ((c2 - c3) / c2).abs() < 1e-12);
        assert!(matches!(
            interference_case2(&inputs(&ctx, &cfg, &p, 97.0, 0.0)),
            Err(Error::CaseMismatch(_))
        ));
        assert!(matches!(
            interference_case3(&inputs(&ctx, &cfg, &p, 10.0, 0.0)),
            Err(Error::CaseMismatch(_))
        ));
    }

    #[test]
    fn energies_non_negative() {
        let p = eva_profile();
        for n in [0, 2, 4] {
            let cfg = SystemConfig::new(n, 1000);
            let ctx = build_smoother(&cfg).unwrap();
            for d1 in [0.0, 10.0, 30.0, 60.0] {
                for cfo in [0.0, 0.074, -0.3] {
                    assert!(interference_case1(&inputs(&ctx, &cfg, &p, d1, cfo)).unwrap() >= 0.0);
                }
            }
        }
    }

    #[test]
    fn lookup_counts() {
        let cfg = SystemConfig::new(0, 144);
        let ctx = build_smoother(&cfg).unwrap();
        let p = eva_profile();
        let i = inputs(&ctx, &cfg, &p, 30.0, 0.0);
        assert_eq!(i.l1(), 6);
        let i = inputs(&ctx, &cfg, &p, 97.0, 0.0);
        assert_eq!(i.l2(), 2);
    }
}
