//! Tapped-delay-line Rayleigh fading, AWGN and timing/frequency offsets.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::waveform::SystemConfig;

const EVA_DELAYS_NS: [f64; 9] = [0.0, 30.0, 150.0, 310.0, 370.0, 710.0, 1090.0, 1730.0, 2510.0];
const EVA_POWERS_DB: [f64; 9] = [0.0, -1.5, -1.4, -3.6, -0.6, -9.1, -7.0, -12.0, -16.9];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tap {
    pub delay_ns: f64,
    pub power_db: f64,
}

/// Static power-delay profile.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelProfile {
    pub taps: Vec<Tap>,
    #[serde(default = "default_true")]
    pub normalize: bool,
}

fn default_true() -> bool {
    true
}

/// 3GPP Extended Vehicular A, normalized to unit total power.
pub fn eva_profile() -> ChannelProfile {
    ChannelProfile {
        taps: EVA_DELAYS_NS
            .iter()
            .zip(EVA_POWERS_DB)
            .map(|(&delay_ns, power_db)| Tap { delay_ns, power_db })
            .collect(),
        normalize: true,
    }
}

impl ChannelProfile {
    /// One tap at zero delay with unit power.
    pub fn flat() -> Self {
        Self {
            taps: vec![Tap {
                delay_ns: 0.0,
                power_db: 0.0,
            }],
            normalize: true,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let p: Self = serde_json::from_str(text).map_err(|e| Error::Config(format!("channel profile: {e}")))?;
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let first = self
            .taps
            .first()
            .ok_or_else(|| Error::Config("channel profile has no taps".into()))?;
        if first.delay_ns != 0.0 {
            return Err(Error::Config("first tap delay must be 0".into()));
        }
        if self.taps.windows(2).any(|w| !(w[1].delay_ns > w[0].delay_ns)) {
            return Err(Error::Config("tap delays must be strictly increasing".into()));
        }
        if self.taps.iter().any(|t| !t.power_db.is_finite() && t.power_db != f64::NEG_INFINITY) {
            return Err(Error::Config("tap powers must be finite dB values".into()));
        }
        Ok(())
    }

    /// Linear tap powers, before any normalization.
    pub fn raw_powers(&self) -> Vec<f64> {
        self.taps.iter().map(|t| 10f64.powf(t.power_db / 10.0)).collect()
    }

    /// Linear tap powers `σ²_l`, normalized to unit sum when requested.
    pub fn powers(&self) -> Vec<f64> {
        let raw = self.raw_powers();
        if self.normalize {
            let total: f64 = raw.iter().sum();
            raw.iter().map(|p| p / total).collect()
        } else {
            raw
        }
    }

    /// `E{α} = Σ σ²_l`.
    pub fn mean_gain(&self) -> f64 {
        self.powers().iter().sum()
    }

    /// Tap delays rounded to whole samples.
    pub fn sample_delays(&self, sample_period_s: f64) -> Vec<usize> {
        self.taps
            .iter()
            .map(|t| (t.delay_ns * 1e-9 / sample_period_s).round() as usize)
            .collect()
    }

    pub fn max_delay_samples(&self, sample_period_s: f64) -> usize {
        self.sample_delays(sample_period_s).into_iter().max().unwrap_or(0)
    }
}

/// How gains evolve across symbols within one realization.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fading {
    /// Independent draw per symbol.
    #[default]
    PerSymbol,
    /// One draw shared by every symbol (adjacent symbols see identical taps).
    Block,
}

/// Complex tap gains, indexed `[symbol][tap]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelRealization {
    pub gains: Vec<Vec<Complex64>>,
}

impl ChannelRealization {
    pub fn symbol_gains(&self, i: usize) -> &[Complex64] {
        &self.gains[i.min(self.gains.len() - 1)]
    }
}

/// Zero-mean circular complex Gaussian sample with variance `var`.
pub fn complex_gaussian<R: Rng + ?Sized>(var: f64, rng: &mut R) -> Complex64 {
    let s = (var / 2.0).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re * s, im * s)
}

pub fn realize<R: Rng + ?Sized>(profile: &ChannelProfile, symbol_count: usize, fading: Fading, rng: &mut R) -> Result<ChannelRealization> {
    if symbol_count == 0 {
        return Err(Error::Config("realization needs at least one symbol".into()));
    }
    let powers = profile.powers();
    let draw = |rng: &mut R| -> Vec<Complex64> { powers.iter().map(|&p| complex_gaussian(p, rng)).collect() };
    let gains = match fading {
        Fading::PerSymbol => (0..symbol_count).map(|_| draw(rng)).collect(),
        Fading::Block => vec![draw(rng); symbol_count],
    };
    Ok(ChannelRealization { gains })
}

/// Frequency response `H_k = Σ_l h_l e^{-j2πk d_l/M}` on the active subcarriers.
pub fn frequency_response(gains: &[Complex64], delays: &[usize], cfg: &SystemConfig) -> Vec<Complex64> {
    cfg.subcarriers
        .iter()
        .map(|&k| {
            gains
                .iter()
                .zip(delays)
                .map(|(h, &d)| h * Complex64::from_polar(1.0, -2.0 * PI * k as f64 * d as f64 / cfg.m as f64))
                .sum()
        })
        .collect()
}

/// Multipath convolution. Sample `s[n]` belongs to symbol `n / (M+Mcp)` and
/// is weighted by that symbol's gains. Output is `max_delay` samples longer.
pub fn apply_channel(
    signal: &[Complex64],
    realization: &ChannelRealization,
    profile: &ChannelProfile,
    cfg: &SystemConfig,
) -> Result<Vec<Complex64>> {
    let delays = profile.sample_delays(cfg.sample_period_s());
    if realization.gains.iter().any(|g| g.len() != delays.len()) {
        return Err(Error::Dimension("realization tap count differs from the profile".into()));
    }
    let max_d = delays.iter().copied().max().unwrap_or(0);
    let t = cfg.symbol_len();
    let mut out = vec![Complex64::new(0.0, 0.0); signal.len() + max_d];
    for (n, &s) in signal.iter().enumerate() {
        let g = realization.symbol_gains(n / t);
        for (h, &d) in g.iter().zip(&delays) {
            out[n + d] += h * s;
        }
    }
    Ok(out)
}

/// Receiver-side offsets and noise.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct Impairments {
    /// STO in seconds; positive means the receiver starts late.
    pub sto_s: f64,
    /// CFO in Hz.
    pub cfo_hz: f64,
    /// Complex noise variance per sample.
    pub noise_var: f64,
}

impl Impairments {
    /// Offsets given in samples and subcarrier spacings.
    pub fn from_normalized(sto_samples: i64, cfo_normalized: f64, noise_var: f64, cfg: &SystemConfig) -> Self {
        Self {
            sto_s: sto_samples as f64 * cfg.sample_period_s(),
            cfo_hz: cfo_normalized * cfg.subcarrier_spacing_hz,
            noise_var,
        }
    }

    pub fn sto_samples(&self, cfg: &SystemConfig) -> Result<i64> {
        let s = self.sto_s / cfg.sample_period_s();
        let r = s.round();
        if (s - r).abs() > 1e-6 {
            return Err(Error::Config(format!(
                "STO of {s:.4} samples is not a whole number at this rate; synthesize with oversampling"
            )));
        }
        Ok(r as i64)
    }

    pub fn cfo_normalized(&self, cfg: &SystemConfig) -> f64 {
        self.cfo_hz / cfg.subcarrier_spacing_hz
    }
}

/// `out[t] = in[t+δ1]·e^{j2π(δ2/Δf)(t+δ1)/M} + n[t]`. The phase ramp runs on
/// absolute stream time so it is continuous across symbols; samples shifted
/// in from outside the input are zero before noise.
pub fn apply_impairments<R: Rng + ?Sized>(
    signal: &[Complex64],
    imp: &Impairments,
    cfg: &SystemConfig,
    rng: &mut R,
) -> Result<Vec<Complex64>> {
    let sto = imp.sto_samples(cfg)?;
    if sto.unsigned_abs() as usize >= cfg.symbol_len() {
        return Err(Error::Config("|STO| must stay below one symbol period".into()));
    }
    let eps = imp.cfo_normalized(cfg);
    let step = 2.0 * PI * eps / cfg.m as f64;
    let len = signal.len() as i64;
    Ok((0..len)
        .map(|t| {
            let src = t + sto;
            let mut v = if (0..len).contains(&src) {
                signal[src as usize] * Complex64::from_polar(1.0, step * src as f64)
            } else {
                Complex64::new(0.0, 0.0)
            };
            if imp.noise_var > 0.0 {
                v += complex_gaussian(imp.noise_var, rng);
            }
            v
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::trial_rng;

    #[test]
    fn eva_layout() {
        let p = eva_profile();
        assert_eq!(p.taps.len(), 9);
        assert_eq!(p.taps[0].delay_ns, 0.0);
        assert_eq!(p.taps[8].delay_ns, 2510.0);
        assert_eq!(p.raw_powers()[0], 1.0);
        assert!((p.powers().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let d = p.sample_delays(SystemConfig::default().sample_period_s());
        assert_eq!(d, vec![0, 1, 5, 10, 11, 22, 33, 53, 77]);
    }

    #[test]
    fn profile_json_round_trip_and_validation() {
        let p = ChannelProfile::from_json(r#"{"taps":[{"delay_ns":0,"power_db":0},{"delay_ns":100,"power_db":-3}],"normalize":false}"#)
            .unwrap();
        assert_eq!(p.taps.len(), 2);
        assert!(!p.normalize);
        assert!(ChannelProfile::from_json(r#"{"taps":[{"delay_ns":5,"power_db":0}]}"#).is_err());
        assert!(ChannelProfile::from_json(r#"{"taps":[{"delay_ns":0,"power_db":0},{"delay_ns":0,"power_db":0}]}"#).is_err());
        assert!(ChannelProfile::from_json(r#"{"taps":[],"extra":1}"#).is_err());
    }

    #[test]
    fn zero_power_tap_gives_zero_gain() {
        let p = ChannelProfile {
            taps: vec![
                Tap {
                    delay_ns: 0.0,
                    power_db: 0.0,
                },
                Tap {
                    delay_ns: 50.0,
                    power_db: f64::NEG_INFINITY,
                },
            ],
            normalize: false,
        };
        let mut rng = trial_rng(1, 0);
        let r = realize(&p, 50, Fading::PerSymbol, &mut rng).unwrap();
        assert!(r.gains.iter().all(|g| g[1].norm() == 0.0));
    }

    #[test]
    fn realization_is_reproducible() {
        let p = eva_profile();
        let a = realize(&p, 4, Fading::PerSymbol, &mut trial_rng(9, 3)).unwrap();
        let b = realize(&p, 4, Fading::PerSymbol, &mut trial_rng(9, 3)).unwrap();
        assert_eq!(a, b);
        let blk = realize(&p, 4, Fading::Block, &mut trial_rng(9, 3)).unwrap();
        assert!(blk.gains.windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn transparent_and_delay_channels() {
        let cfg = SystemConfig::default();
        let sig: Vec<Complex64> = (0..50).map(|i| Complex64::new(i as f64, -(i as f64))).collect();
        let flat = ChannelProfile::flat();
        let one = ChannelRealization {
            gains: vec![vec![Complex64::new(1.0, 0.0)]],
        };
        assert_eq!(apply_channel(&sig, &one, &flat, &cfg).unwrap(), sig);
        let ts = cfg.sample_period_s();
        let delayed = ChannelProfile {
            taps: vec![
                Tap {
                    delay_ns: 0.0,
                    power_db: f64::NEG_INFINITY,
                },
                Tap {
                    delay_ns: 3.0 * ts * 1e9,
                    power_db: 0.0,
                },
            ],
            normalize: false,
        };
        let r = ChannelRealization {
            gains: vec![vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]],
        };
        let out = apply_channel(&sig, &r, &delayed, &cfg).unwrap();
        assert_eq!(out.len(), sig.len() + 3);
        for i in 0..sig.len() {
            assert_eq!(out[i + 3], sig[i]);
        }
    }

    #[test]
    fn identity_impairments() {
        let cfg = SystemConfig::default();
        let sig: Vec<Complex64> = (0..20).map(|i| Complex64::new(1.0, i as f64)).collect();
        let out = apply_impairments(&sig, &Impairments::default(), &cfg, &mut trial_rng(0, 0)).unwrap();
        assert_eq!(out, sig);
        let imp = Impairments::from_normalized(0, 0.37, 0.0, &cfg);
        let out = apply_impairments(&sig, &imp, &cfg, &mut trial_rng(0, 0)).unwrap();
        for (a, b) in out.iter().zip(&sig) {
            assert!((a.norm() - b.norm()).abs() < 1e-12);
        }
    }

    #[test]
    fn fractional_sto_rejected() {
        let cfg = SystemConfig::default();
        let imp = Impairments {
            sto_s: 0.5 * cfg.sample_period_s(),
            ..Impairments::default()
        };
        assert!(matches!(
            apply_impairments(&[Complex64::new(1.0, 0.0)], &imp, &cfg, &mut trial_rng(0, 0)),
            Err(Error::Config(_))
        ));
    }
}
