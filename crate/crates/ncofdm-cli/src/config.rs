//! Experiment configuration: one JSON document, overridden by flags.

use std::path::Path;

use ncofdm::analysis::LinkMonteCarlo;
use ncofdm::channel::{eva_profile, ChannelProfile};
use ncofdm::spectral::{MonteCarloSpec, WelchSpec};
use ncofdm::sync::StoExperiment;
use ncofdm::waveform::SystemConfig;
use serde::{Deserialize, Serialize};

/// Problem with the configuration; the runner exits with status 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NamedChannel {
    Eva,
    Flat,
}

/// `"eva"`, `"flat"` or an explicit tap list.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ChannelChoice {
    Named(NamedChannel),
    Custom(ChannelProfile),
}

impl Default for ChannelChoice {
    fn default() -> Self {
        Self::Named(NamedChannel::Eva)
    }
}

impl ChannelChoice {
    pub fn profile(&self) -> ChannelProfile {
        match self {
            Self::Named(NamedChannel::Eva) => eva_profile(),
            Self::Named(NamedChannel::Flat) => ChannelProfile::flat(),
            Self::Custom(p) => p.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PsdParams {
    /// Symbols in the simulated stream fed to Welch.
    pub welch_symbols: usize,
    pub welch: WelchSpec,
    pub mc: MonteCarloSpec,
    /// Output band, in multiples of the band edge either side of DC.
    pub span_edges: f64,
    /// Slope-fit range beyond the band edge, in subcarrier spacings.
    pub slope_from: f64,
    pub slope_to: f64,
}

impl Default for PsdParams {
    fn default() -> Self {
        Self {
            welch_symbols: 800,
            welch: WelchSpec::default(),
            mc: MonteCarloSpec::default(),
            span_edges: 3.0,
            slope_from: 1024.0,
            slope_to: 10240.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LinkParams {
    /// Per-bin SNR points in dB.
    pub snr_db: Vec<f64>,
    pub mc: LinkMonteCarlo,
}

/// 0 to 30 dB in 5 dB steps.
impl Default for LinkParams {
    fn default() -> Self {
        Self::with_step(5)
    }
}

impl LinkParams {
    fn with_step(step: usize) -> Self {
        Self {
            snr_db: (0..=30).step_by(step).map(f64::from).collect(),
            mc: LinkMonteCarlo::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Ebn0Params {
    /// Per-bit SNR of the unsmoothed reference in dB.
    pub reference_db: f64,
    pub n_values: Vec<usize>,
    pub l_values: Vec<usize>,
    /// Symbols in the baseline projection's distortion estimate.
    pub baseline_symbols: usize,
}

impl Default for Ebn0Params {
    fn default() -> Self {
        Self {
            reference_db: 30.0,
            n_values: (0..=4).collect(),
            l_values: vec![36, 72, 144, 1000],
            baseline_symbols: 2000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ComplexityParams {
    pub l_values: Vec<usize>,
}

impl Default for ComplexityParams {
    fn default() -> Self {
        Self {
            l_values: vec![36, 72, 144, 1000],
        }
    }
}

/// Full experiment description. Seeds inside the nested blocks are
/// replaced by streams derived from `seed` when a run starts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub system: SystemConfig,
    pub channel: ChannelChoice,
    pub seed: u64,
    pub psd: PsdParams,
    pub ber: LinkParams,
    pub sinr: LinkParams,
    pub ebn0: Ebn0Params,
    pub sync: StoExperiment,
    pub complexity: ComplexityParams,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            system: SystemConfig::new(2, 144),
            channel: ChannelChoice::default(),
            seed: 0,
            psd: PsdParams::default(),
            ber: LinkParams::with_step(2),
            sinr: LinkParams::with_step(5),
            ebn0: Ebn0Params::default(),
            sync: StoExperiment::default(),
            complexity: ComplexityParams::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, ConfigError> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
        // serde_json reports line and column.
        serde_json::from_str(&text).map_err(|e| ConfigError(format!("{}: {e}", path.display())))
    }

    /// Checks every block, whichever subcommand runs.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let lib = |e: ncofdm::Error| ConfigError(e.to_string());
        self.system.validate().map_err(lib)?;
        self.channel.profile().validate().map_err(lib)?;
        let need = |ok: bool, what: &str| if ok { Ok(()) } else { Err(ConfigError(what.to_string())) };
        let p = &self.psd;
        need(p.welch_symbols > 0, "psd.welch_symbols must be positive")?;
        need(p.welch.segment > p.welch.overlap, "psd.welch.segment must exceed psd.welch.overlap")?;
        need(
            p.mc.realizations > 0 && p.mc.symbols > 0,
            "psd.mc needs positive realizations and symbols",
        )?;
        need(p.span_edges > 0.0, "psd.span_edges must be positive")?;
        need(
            p.slope_from > 0.0 && p.slope_to > p.slope_from,
            "psd slope range must satisfy 0 < slope_from < slope_to",
        )?;
        for (name, link) in [("ber", &self.ber), ("sinr", &self.sinr)] {
            need(!link.snr_db.is_empty(), &format!("{name}.snr_db is empty"))?;
            need(link.snr_db.iter().all(|s| s.is_finite()), &format!("{name}.snr_db must be finite"))?;
            need(
                link.mc.realizations > 0 && link.mc.symbols > 0,
                &format!("{name}.mc needs positive realizations and symbols"),
            )?;
        }
        let e = &self.ebn0;
        need(e.reference_db.is_finite(), "ebn0.reference_db must be finite")?;
        need(!e.n_values.is_empty() && !e.l_values.is_empty(), "ebn0 needs n_values and l_values")?;
        need(e.baseline_symbols > 0, "ebn0.baseline_symbols must be positive")?;
        for &l in &e.l_values {
            SystemConfig { l, ..self.system.clone() }.validate().map_err(lib)?;
        }
        let s = &self.sync;
        need(s.trials > 0, "sync.trials must be positive")?;
        need(
            !s.snr_db.is_empty() && s.snr_db.iter().all(|v| v.is_finite()),
            "sync.snr_db must be non-empty and finite",
        )?;
        need(s.cfo_hz.is_finite(), "sync.cfo_hz must be finite")?;
        need(!self.complexity.l_values.is_empty(), "complexity.l_values is empty")?;
        for &l in &self.complexity.l_values {
            SystemConfig { l, ..self.system.clone() }.validate().map_err(lib)?;
        }
        Ok(())
    }
}

/// `a:step:b`, a comma list, or one value.
pub fn parse_snr_list(text: &str) -> Result<Vec<f64>, String> {
    let num = |s: &str| s.trim().parse::<f64>().map_err(|e| format!("bad number {s:?}: {e}"));
    let parts: Vec<&str> = text.split(':').collect();
    match parts.as_slice() {
        [a, step, b] => {
            let (a, step, b) = (num(a)?, num(step)?, num(b)?);
            if !(step > 0.0) || b < a {
                return Err(format!("range {text:?} needs step > 0 and start <= stop"));
            }
            let count = ((b - a) / step + 1e-9).floor() as usize + 1;
            Ok((0..count).map(|i| a + i as f64 * step).collect())
        }
        [_] => text.split(',').map(num).collect(),
        _ => Err(format!("expected start:step:stop or a comma list, got {text:?}")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snr_ranges() {
        assert_eq!(parse_snr_list("0:10:30").unwrap(), vec![0.0, 10.0, 20.0, 30.0]);
        assert_eq!(parse_snr_list("5").unwrap(), vec![5.0]);
        assert_eq!(parse_snr_list("1,2.5").unwrap(), vec![1.0, 2.5]);
        assert!(parse_snr_list("0:0:3").is_err());
        assert!(parse_snr_list("a").is_err());
    }

    #[test]
    fn partial_documents_fill_defaults() {
        let c: ExperimentConfig = serde_json::from_str(r#"{"system": {"n": 4}, "channel": "flat", "sinr": {"snr_db": [3]}}"#).unwrap();
        assert_eq!(c.system.n, 4);
        assert_eq!(c.system.m, 2048);
        assert_eq!(c.sinr.snr_db, vec![3.0]);
        assert_eq!(c.channel.profile(), ChannelProfile::flat());
        c.validate().unwrap();
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(serde_json::from_str::<ExperimentConfig>(r#"{"sytem": {}}"#).is_err());
        assert!(serde_json::from_str::<ExperimentConfig>(r#"{"psd": {"welch": {"segmnt": 8}}}"#).is_err());
    }

    #[test]
    fn validation_catches_bad_values() {
        let mut c = ExperimentConfig::default();
        c.system.l = 1;
        assert!(c.validate().is_err());
        let mut c = ExperimentConfig::default();
        c.sync.trials = 0;
        assert!(c.validate().is_err());
    }
}
