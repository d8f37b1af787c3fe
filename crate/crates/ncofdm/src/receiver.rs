//! CP removal, DFT demodulation, LS estimation, ZF equalization and the
//! empirical BER/SINR estimators.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::DftPlan;
use crate::waveform::SystemConfig;

/// Below this magnitude a channel estimate is treated as a null.
pub const ZF_FLOOR: f64 = 1e-12;

/// Active-bin values of one demodulated symbol.
#[derive(Clone, Debug, PartialEq)]
pub struct ReceivedSymbol {
    pub bins: Vec<Complex64>,
    pub channel_estimate: Option<Vec<Complex64>>,
}

impl ReceivedSymbol {
    pub fn with_estimate(mut self, h: Vec<Complex64>) -> Self {
        self.channel_estimate = Some(h);
        self
    }
}

/// CP-stripping DFT front end with a cached plan.
#[derive(Clone, Debug)]
pub struct Demodulator {
    plan: DftPlan,
    bins: Vec<usize>,
    m: usize,
    mcp: usize,
}

impl Demodulator {
    pub fn new(cfg: &SystemConfig) -> Result<Self> {
        cfg.validate()?;
        let m = cfg.m as i64;
        Ok(Self {
            plan: DftPlan::new(cfg.m),
            bins: cfg.subcarriers.iter().map(|&k| k.rem_euclid(m) as usize).collect(),
            m: cfg.m,
            mcp: cfg.mcp,
        })
    }

    /// Demodulate the DFT window starting at `start` (first body sample).
    pub fn demodulate_at(&self, rx: &[Complex64], start: usize) -> Result<ReceivedSymbol> {
        let window = rx
            .get(start..start + self.m)
            .ok_or_else(|| Error::Dimension(format!("DFT window at {start} runs past {} samples", rx.len())))?;
        let spec = self.plan.forward(window)?;
        Ok(ReceivedSymbol {
            bins: self.bins.iter().map(|&b| spec[b]).collect(),
            channel_estimate: None,
        })
    }

    /// Symbol `index` of a stream laid out as consecutive `M+Mcp` blocks.
    pub fn demodulate(&self, rx: &[Complex64], index: usize) -> Result<ReceivedSymbol> {
        let start = index
            .checked_mul(self.m + self.mcp)
            .and_then(|s| s.checked_add(self.mcp))
            .ok_or_else(|| Error::Dimension(format!("symbol index {index} overflows")))?;
        self.demodulate_at(rx, start)
    }
}

pub fn demodulate(rx: &[Complex64], symbol_index: usize, cfg: &SystemConfig) -> Result<ReceivedSymbol> {
    Demodulator::new(cfg)?.demodulate(rx, symbol_index)
}

/// `Ĥ = R/x` per bin.
pub fn ls_estimate(ref_rx: &ReceivedSymbol, ref_tx: &[Complex64]) -> Result<Vec<Complex64>> {
    if ref_rx.bins.len() != ref_tx.len() {
        return Err(Error::Dimension("reference length differs from bin count".into()));
    }
    ref_rx
        .bins
        .iter()
        .zip(ref_tx)
        .enumerate()
        .map(|(i, (r, x))| {
            if x.norm() == 0.0 {
                Err(Error::Estimation(format!("reference symbol is zero on bin {i}")))
            } else {
                Ok(r / x)
            }
        })
        .collect()
}

/// Equalizer output; `flagged` lists bins whose estimate was below
/// [`ZF_FLOOR`] and were passed through as zero.
#[derive(Clone, Debug, PartialEq)]
pub struct Equalized {
    pub symbols: Vec<Complex64>,
    pub flagged: Vec<usize>,
}

pub fn zf_equalize(rx: &ReceivedSymbol) -> Result<Equalized> {
    let h = rx
        .channel_estimate
        .as_ref()
        .ok_or_else(|| Error::Estimation("no channel estimate attached".into()))?;
    if h.len() != rx.bins.len() {
        return Err(Error::Dimension("estimate length differs from bin count".into()));
    }
    let mut flagged = Vec::new();
    let symbols = rx
        .bins
        .iter()
        .zip(h)
        .enumerate()
        .map(|(i, (r, h))| {
            if h.norm() < ZF_FLOOR {
                flagged.push(i);
                Complex64::new(0.0, 0.0)
            } else {
                r / h
            }
        })
        .collect();
    Ok(Equalized { symbols, flagged })
}

pub fn measure_ber(tx_bits: &[u8], rx_bits: &[u8]) -> Result<f64> {
    if tx_bits.len() != rx_bits.len() {
        return Err(Error::Dimension(format!("{} vs {} bits", tx_bits.len(), rx_bits.len())));
    }
    if tx_bits.is_empty() {
        return Err(Error::Dimension("no bits to compare".into()));
    }
    let errors = tx_bits.iter().zip(rx_bits).filter(|(a, b)| a != b).count();
    Ok(errors as f64 / tx_bits.len() as f64)
}

/// Symbols observed under one fixed channel: the true per-bin response,
/// the transmitted data and the demodulated bins.
#[derive(Clone, Debug, Default)]
pub struct SinrTrial {
    pub response: Vec<Complex64>,
    pub tx: Vec<Vec<Complex64>>,
    pub rx: Vec<Vec<Complex64>>,
}

impl SinrTrial {
    /// Per-bin `|H|²·E|x|² / E|R − Hx|²`. The residual power is summed over
    /// `n` symbols and divided by `n − 1`, which makes the reciprocal
    /// unbiased for Gaussian residuals.
    pub fn per_bin(&self) -> Result<Vec<f64>> {
        let k = self.response.len();
        if self.tx.len() != self.rx.len() || self.tx.len() < 2 {
            return Err(Error::Dimension("trial needs matching tx/rx with at least two symbols".into()));
        }
        if self.tx.iter().chain(&self.rx).any(|v| v.len() != k) {
            return Err(Error::Dimension("symbol length differs from response length".into()));
        }
        let count = self.tx.len() as f64;
        Ok((0..k)
            .map(|b| {
                let h = self.response[b];
                let (mut sig, mut res) = (0.0, 0.0);
                for (x, r) in self.tx.iter().zip(&self.rx) {
                    sig += (h * x[b]).norm_sqr();
                    res += (r[b] - h * x[b]).norm_sqr();
                }
                if res == 0.0 {
                    f64::INFINITY
                } else {
                    (sig / count) / (res / (count - 1.0))
                }
            })
            .collect())
    }
}

/// Average of the per-bin SINR over bins and trials, in dB.
pub fn measure_sinr(trials: &[SinrTrial]) -> Result<f64> {
    if trials.is_empty() {
        return Err(Error::Dimension("no SINR trials".into()));
    }
    let mut sum = 0.0;
    let mut n = 0usize;
    for t in trials {
        for g in t.per_bin()? {
            sum += g;
            n += 1;
        }
    }
    Ok(10.0 * (sum / n as f64).log10())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::trial_rng;
    use crate::waveform::{ofdm_modulate, qam_demap, qam_map, random_bits};

    #[test]
    fn loopback_bits() {
        let cfg = SystemConfig::default();
        let mut rng = trial_rng(3, 0);
        let bits = random_bits(cfg.k() * 4, &mut rng);
        let x = qam_map(&bits, 16).unwrap();
        let y = ofdm_modulate(&x, &cfg).unwrap();
        let rx = demodulate(&y, 0, &cfg).unwrap();
        for (a, b) in rx.bins.iter().zip(&x) {
            assert!((a - b).norm() < 1e-12);
        }
        let eq = zf_equalize(&rx.clone().with_estimate(vec![Complex64::new(1.0, 0.0); cfg.k()])).unwrap();
        assert!(eq.flagged.is_empty());
        assert_eq!(qam_demap(&eq.symbols, 16).unwrap(), bits);
    }

    #[test]
    fn flat_gain_estimate_and_equalize() {
        let cfg = SystemConfig::default();
        let h = Complex64::new(0.3, -0.8);
        let x = qam_map(&random_bits(cfg.k() * 4, &mut trial_rng(5, 0)), 16).unwrap();
        let y: Vec<_> = ofdm_modulate(&x, &cfg).unwrap().into_iter().map(|s| s * h).collect();
        let rx = demodulate(&y, 0, &cfg).unwrap();
        let est = ls_estimate(&rx, &x).unwrap();
        assert!(est.iter().all(|e| (e - h).norm() < 1e-12));
        let eq = zf_equalize(&rx.with_estimate(est)).unwrap();
        for (a, b) in eq.symbols.iter().zip(&x) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn deep_fade_flagged() {
        let rx = ReceivedSymbol {
            bins: vec![Complex64::new(1.0, 0.0); 3],
            channel_estimate: Some(vec![Complex64::new(1.0, 0.0), Complex64::new(1e-13, 0.0), Complex64::new(2.0, 0.0)]),
        };
        let eq = zf_equalize(&rx).unwrap();
        assert_eq!(eq.flagged, vec![1]);
        assert_eq!(eq.symbols[2], Complex64::new(0.5, 0.0));
    }

    #[test]
    fn zero_reference_rejected() {
        let rx = ReceivedSymbol {
            bins: vec![Complex64::new(1.0, 0.0); 2],
            channel_estimate: None,
        };
        assert!(matches!(
            ls_estimate(&rx, &[Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]),
            Err(Error::Estimation(_))
        ));
        assert!(zf_equalize(&rx).is_err());
    }

    #[test]
    fn ber_extremes() {
        assert_eq!(measure_ber(&[0, 1, 1, 0], &[0, 1, 1, 0]).unwrap(), 0.0);
        assert_eq!(measure_ber(&[0, 1, 1, 0], &[1, 0, 0, 1]).unwrap(), 1.0);
        assert!(measure_ber(&[0], &[0, 1]).is_err());
    }

    #[test]
    fn out_of_range_symbol() {
        let cfg = SystemConfig::default();
        let y = vec![Complex64::new(0.0, 0.0); cfg.symbol_len()];
        assert!(demodulate(&y, 1, &cfg).is_err());
    }
}
