//! Experiment runner: `ncofdm <subcommand>` writes a CSV table and a JSON
//! run manifest into `--out`.

mod config;
mod experiments;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ncofdm::sync::{Estimator, SyncChannel};

use config::{parse_snr_list, ConfigError, ExperimentConfig};

/// Parsed `--snr` value; a bare `Vec` would make clap expect repeated values.
#[derive(Clone)]
struct SnrList(Vec<f64>);

fn snr_list(text: &str) -> Result<SnrList, String> {
    parse_snr_list(text).map(SnrList)
}

#[derive(Parser)]
#[command(name = "ncofdm", version, about = "Low-interference N-continuous OFDM experiments")]
struct Cli {
    /// JSON experiment config; flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true, env = "NCOFDM_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args, Clone, Default)]
struct SystemArgs {
    /// Highest derivative order made continuous.
    #[arg(long)]
    n: Option<usize>,
    /// Smooth-signal length in samples.
    #[arg(long)]
    l: Option<usize>,
    /// Square QAM order.
    #[arg(long)]
    qam: Option<usize>,
}

#[derive(Args, Clone, Default)]
struct LinkArgs {
    /// SNR points, `start:step:stop` or a comma list.
    #[arg(long, value_parser = snr_list)]
    snr: Option<SnrList>,
    /// Channel draws per point.
    #[arg(long)]
    realizations: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum EstimatorArg {
    Cp,
    Training,
}

#[derive(Clone, Copy, ValueEnum)]
enum ChannelArg {
    Awgn,
    Eva,
}

#[derive(Subcommand)]
enum Cmd {
    /// Analytic and Welch PSD with the far-out slope.
    Psd {
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long)]
        welch_symbols: Option<usize>,
        /// Realizations of the analytic expectation.
        #[arg(long)]
        realizations: Option<usize>,
    },
    /// BER: closed form, quadrature and simulation.
    Ber {
        #[command(flatten)]
        system: SystemArgs,
        #[command(flatten)]
        link: LinkArgs,
    },
    /// Average SINR under perfect synchronization.
    Sinr {
        #[command(flatten)]
        system: SystemArgs,
        #[command(flatten)]
        link: LinkArgs,
    },
    /// Per-bit SNR after smoothing against the noise-only reference.
    Ebn0 {
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long)]
        reference_db: Option<f64>,
    },
    /// Timing-offset estimator error variance.
    Sync {
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long, value_enum)]
        estimator: Option<EstimatorArg>,
        #[arg(long, value_enum)]
        channel: Option<ChannelArg>,
        /// Send plain CP-OFDM instead of the smoothed waveform.
        #[arg(long)]
        plain: bool,
        #[arg(long, value_parser = snr_list)]
        snr: Option<SnrList>,
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Instrumented multiplication counts.
    Complexity {
        #[command(flatten)]
        system: SystemArgs,
    },
    /// Closed forms against their oracles; exits 1 on any breach.
    Validate,
}

impl Cmd {
    fn name(&self) -> &'static str {
        match self {
            Cmd::Psd { .. } => "psd",
            Cmd::Ber { .. } => "ber",
            Cmd::Sinr { .. } => "sinr",
            Cmd::Ebn0 { .. } => "ebn0",
            Cmd::Sync { .. } => "sync",
            Cmd::Complexity { .. } => "complexity",
            Cmd::Validate => "validate",
        }
    }
}

fn apply_system(c: &mut ExperimentConfig, s: &SystemArgs) {
    if let Some(n) = s.n {
        c.system.n = n;
    }
    if let Some(l) = s.l {
        c.system.l = l;
    }
    if let Some(q) = s.qam {
        c.system.qam_order = q;
    }
}

fn resolve(cli: &Cli) -> Result<ExperimentConfig, ConfigError> {
    let mut c = ExperimentConfig::load(cli.config.as_deref())?;
    if let Some(seed) = cli.seed {
        c.seed = seed;
    }
    match &cli.command {
        Cmd::Psd {
            system,
            welch_symbols,
            realizations,
        } => {
            apply_system(&mut c, system);
            if let Some(v) = welch_symbols {
                c.psd.welch_symbols = *v;
            }
            if let Some(v) = realizations {
                c.psd.mc.realizations = *v;
            }
        }
        Cmd::Ber { system, link } | Cmd::Sinr { system, link } => {
            apply_system(&mut c, system);
            let target = if matches!(cli.command, Cmd::Ber { .. }) {
                &mut c.ber
            } else {
                &mut c.sinr
            };
            if let Some(v) = &link.snr {
                target.snr_db = v.0.clone();
            }
            if let Some(v) = link.realizations {
                target.mc.realizations = v;
            }
        }
        Cmd::Ebn0 { system, reference_db } => {
            apply_system(&mut c, system);
            if let Some(v) = reference_db {
                c.ebn0.reference_db = *v;
            }
        }
        Cmd::Sync {
            system,
            estimator,
            channel,
            plain,
            snr,
            trials,
        } => {
            apply_system(&mut c, system);
            if let Some(e) = estimator {
                c.sync.estimator = match e {
                    EstimatorArg::Cp => Estimator::Cp,
                    EstimatorArg::Training => Estimator::Training,
                };
            }
            if let Some(ch) = channel {
                c.sync.channel = match ch {
                    ChannelArg::Awgn => SyncChannel::Awgn,
                    ChannelArg::Eva => SyncChannel::Eva,
                };
            }
            if *plain {
                c.sync.smoothed = false;
            }
            if let Some(v) = snr {
                c.sync.snr_db = v.0.clone();
            }
            if let Some(v) = trials {
                c.sync.trials = *v;
            }
        }
        Cmd::Complexity { system } => apply_system(&mut c, system),
        Cmd::Validate => {}
    }
    c.validate()?;
    Ok(c)
}

fn run(cli: &Cli) -> anyhow::Result<ExitCode> {
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(ConfigError("--threads must be at least 1".into()).into());
        }
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global()?;
    }
    let config = resolve(cli)?;
    let start = Instant::now();
    let name = cli.command.name();
    let (table, breaches) = match &cli.command {
        Cmd::Psd { .. } => (experiments::psd(&config)?, 0),
        Cmd::Ber { .. } => (experiments::ber(&config)?, 0),
        Cmd::Sinr { .. } => (experiments::sinr(&config)?, 0),
        Cmd::Ebn0 { .. } => (experiments::ebn0(&config)?, 0),
        Cmd::Sync { .. } => (experiments::sync(&config)?, 0),
        Cmd::Complexity { .. } => (experiments::complexity(&config)?, 0),
        Cmd::Validate => experiments::validate(&config)?,
    };
    let path = output::write_run(&cli.out, name, &config, &table, start.elapsed().as_secs_f64())?;
    eprintln!("wrote {}", path.display());
    if breaches > 0 {
        eprintln!("{breaches} check(s) out of tolerance");
        return Ok(ExitCode::from(1));
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            let config_problem =
                e.downcast_ref::<ConfigError>().is_some() || matches!(e.downcast_ref::<ncofdm::Error>(), Some(ncofdm::Error::Config(_)));
            eprintln!("error: {e:#}");
            ExitCode::from(if config_problem { 2 } else { 1 })
        }
    }
}
