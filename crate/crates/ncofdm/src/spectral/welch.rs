use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::PsdEstimate;
use crate::error::{Error, Result};
use crate::numerics::DftPlan;
use crate::waveform::SystemConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WelchSpec {
    pub segment: usize,
    pub overlap: usize,
}

impl Default for WelchSpec {
    fn default() -> Self {
        Self {
            segment: 2048,
            overlap: 512,
        }
    }
}

/// Averaged periodogram with a periodic Hann window, normalized by the
/// window energy. Frequencies run from −fs/2 upward; the dB reference is
/// the mean over bins strictly inside the occupied band, DC excluded.
pub fn welch_psd(samples: &[Complex64], cfg: &SystemConfig, spec: &WelchSpec) -> Result<PsdEstimate> {
    let seg = spec.segment;
    if seg == 0 || spec.overlap >= seg {
        return Err(Error::Config("Welch needs segment > overlap".into()));
    }
    if samples.len() < seg {
        return Err(Error::Dimension(format!(
            "{} samples, need at least one {seg}-sample segment",
            samples.len()
        )));
    }
    let window: Vec<f64> = (0..seg).map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / seg as f64).cos()).collect();
    let energy: f64 = window.iter().map(|w| w * w).sum();
    let step = seg - spec.overlap;
    let count = (samples.len() - seg) / step + 1;
    let plan = DftPlan::new(seg);
    let mut acc = vec![0.0; seg];
    let mut buf = vec![Complex64::new(0.0, 0.0); seg];
    for s in 0..count {
        let chunk = &samples[s * step..s * step + seg];
        for ((b, x), w) in buf.iter_mut().zip(chunk).zip(&window) {
            *b = x * w;
        }
        plan.forward_in_place(&mut buf)?;
        for (a, b) in acc.iter_mut().zip(&buf) {
            *a += b.norm_sqr();
        }
    }
    // Forward DFT carries 1/seg; undo it so values are |Σ w x e|²/Σw².
    let scale = (seg * seg) as f64 / (energy * count as f64);
    let fs = cfg.m as f64 * cfg.subcarrier_spacing_hz;
    let half = seg / 2;
    let mut freqs = Vec::with_capacity(seg);
    let mut linear = Vec::with_capacity(seg);
    for i in 0..seg {
        let bin = (i + seg - half) % seg;
        freqs.push((i as f64 - half as f64) * fs / seg as f64);
        linear.push(acc[bin] * scale);
    }
    let edge = cfg.band_edge();
    let inband: Vec<f64> = freqs
        .iter()
        .zip(&linear)
        .filter(|(f, _)| {
            let a = (*f / cfg.subcarrier_spacing_hz).abs();
            (0.5..edge).contains(&a)
        })
        .map(|(_, v)| *v)
        .collect();
    if inband.is_empty() {
        return Err(Error::Degenerate("no Welch bins fall inside the band".into()));
    }
    let reference = inband.iter().sum::<f64>() / inband.len() as f64;
    let meta = format!("welch hann segment={seg} overlap={} segments={count}", spec.overlap);
    Ok(PsdEstimate::from_linear(
        freqs,
        linear,
        reference,
        edge * cfg.subcarrier_spacing_hz,
        meta,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::complex_gaussian;
    use crate::exec::trial_rng;

    #[test]
    fn white_noise_is_flat() {
        let cfg = SystemConfig::default();
        let spec = WelchSpec::default();
        let n = 2048 + 499 * 1536;
        let mut rng = trial_rng(11, 0);
        let x: Vec<Complex64> = (0..n).map(|_| complex_gaussian(1.0, &mut rng)).collect();
        let p = welch_psd(&x, &cfg, &spec).unwrap();
        assert!(p.meta.contains("segments=500"));
        let mean = p.linear.iter().sum::<f64>() / p.linear.len() as f64;
        for block in p.linear.chunks(16) {
            let m = block.iter().sum::<f64>() / 16.0;
            assert!((10.0 * (m / mean).log10()).abs() < 0.5);
        }
    }

    #[test]
    fn tone_peak() {
        let cfg = SystemConfig::default();
        let x: Vec<Complex64> = (0..8192)
            .map(|m| Complex64::from_polar(1.0, 2.0 * PI * 100.0 * m as f64 / 2048.0))
            .collect();
        let p = welch_psd(&x, &cfg, &WelchSpec::default()).unwrap();
        let imax = (0..p.linear.len()).max_by(|&a, &b| p.linear[a].total_cmp(&p.linear[b])).unwrap();
        assert_eq!(p.freqs_hz[imax], 100.0 * cfg.subcarrier_spacing_hz);
    }

    #[test]
    fn too_short() {
        let cfg = SystemConfig::default();
        assert!(welch_psd(&[Complex64::new(0.0, 0.0); 100], &cfg, &WelchSpec::default()).is_err());
    }
}
