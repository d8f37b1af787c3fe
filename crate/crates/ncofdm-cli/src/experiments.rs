//! One function per subcommand, each producing a table.

use anyhow::Result;
use ncofdm::analysis::*;
use ncofdm::exec::{substream, trial_rng};
use ncofdm::spectral::*;
use ncofdm::sync::{sto_error_variance, StoExperiment};
use ncofdm::waveform::*;
use ncofdm::Error;

use crate::config::ExperimentConfig;
use crate::output::{num, opt, Table};

fn analytic_psd(grid: &[f64], cfg: &SystemConfig, ctx: &SmootherContext, mc: &MonteCarloSpec) -> ncofdm::Result<PsdEstimate> {
    match cfg.n {
        0 => analytic_psd_case0(grid, cfg, ctx, mc),
        1 => analytic_psd_case1(grid, cfg, ctx, mc),
        _ => analytic_psd_case_n(grid, cfg, ctx, mc),
    }
}

fn case_tag(n: usize) -> &'static str {
    match n {
        0 => "case0",
        1 => "case1",
        _ => "caseN",
    }
}

/// Analytic and Welch PSD on the Welch bins within the span, then one
/// trailing row with the far-out analytic slope.
pub fn psd(c: &ExperimentConfig) -> Result<Table> {
    let cfg = &c.system;
    let p = &c.psd;
    let ctx = build_smoother(cfg)?;
    let constellation = QamConstellation::new(cfg.qam_order)?;
    let mut rng = trial_rng(c.seed, 0);
    let data: Vec<_> = (0..p.welch_symbols)
        .map(|_| random_symbols(&constellation, cfg.k(), &mut rng))
        .collect();
    let welch = welch_psd(&assemble_stream(&data, &ctx, cfg)?, cfg, &p.welch)?;
    let span = p.span_edges * cfg.band_edge() * cfg.subcarrier_spacing_hz;
    let keep: Vec<usize> = (0..welch.freqs_hz.len()).filter(|&i| welch.freqs_hz[i].abs() <= span).collect();
    let grid: Vec<f64> = keep.iter().map(|&i| welch.freqs_hz[i]).collect();
    let mc = MonteCarloSpec {
        seed: substream(c.seed, 1),
        ..p.mc
    };
    let analytic = analytic_psd(&grid, cfg, &ctx, &mc)?;
    let tag = case_tag(cfg.n);
    let mut table = Table::new(&["freq_hz", "analytic_db", "welch_db", "case_tag"]);
    // The analytic estimate may drop grid points it cannot represent.
    let mut j = 0;
    for &i in &keep {
        let f = welch.freqs_hz[i];
        let a = if j < analytic.freqs_hz.len() && analytic.freqs_hz[j] == f {
            j += 1;
            Some(analytic.values_db[j - 1])
        } else {
            None
        };
        table.push(vec![num(f), opt(a), num(welch.values_db[i]), tag.into()]);
    }
    let far = edge_offset_grid(cfg, p.slope_from, p.slope_to, 40);
    let slope = fit_slope(&analytic_psd(&far, cfg, &ctx, &mc)?, 0.0, f64::INFINITY)?;
    table.push(vec![String::new(), num(slope), String::new(), "slope_db_per_decade".into()]);
    Ok(table)
}

/// Closed form (blank where it cannot hold double precision), quadrature
/// and simulation against per-bin SNR.
pub fn ber(c: &ExperimentConfig) -> Result<Table> {
    let cfg = &c.system;
    let profile = c.channel.profile();
    let ctx = build_smoother(cfg)?;
    let model = smooth_interference_power(&ctx, &profile, cfg)?;
    let mean_alpha: f64 = profile.powers().iter().sum();
    let mut table = Table::new(&["snr_db", "ber_closed_form", "ber_quadrature", "ber_simulated", "closed_form_status"]);
    for (i, &snr) in c.ber.snr_db.iter().enumerate() {
        let nv = noise_var_for_bin_snr(snr, cfg);
        let mut params = BerSeriesParams::new(cfg.qam_order, model.sigma_w_sq.clone(), nv, cfg.m);
        params.mean_alpha = mean_alpha;
        let (closed, status) = match ber_closed_form(&params) {
            Ok(v) => (Some(v), "ok"),
            Err(Error::Precision { .. }) => (None, "precision"),
            Err(e) => return Err(e.into()),
        };
        let quad = ber_numeric_quadrature(&params)?;
        let mc = LinkMonteCarlo {
            seed: substream(c.seed, i as u64),
            ..c.ber.mc
        };
        let sim = simulate_perfect_sync_ber(cfg, &ctx, &profile, nv, &mc)?;
        table.push(vec![num(snr), opt(closed), num(quad), num(sim), status.into()]);
    }
    Ok(table)
}

pub fn sinr(c: &ExperimentConfig) -> Result<Table> {
    let cfg = &c.system;
    let profile = c.channel.profile();
    let ctx = build_smoother(cfg)?;
    let model = smooth_interference_power(&ctx, &profile, cfg)?;
    let mut table = Table::new(&["snr_db", "analytic_db", "simulated_db"]);
    for (i, &snr) in c.sinr.snr_db.iter().enumerate() {
        let nv = noise_var_for_bin_snr(snr, cfg);
        let mc = LinkMonteCarlo {
            seed: substream(c.seed, i as u64),
            ..c.sinr.mc
        };
        let analytic = average_sinr_db(&model, nv, cfg)?;
        let sim = simulate_perfect_sync_sinr(cfg, &ctx, &profile, nv, &mc)?;
        table.push(vec![num(snr), num(analytic), num(sim)]);
    }
    Ok(table)
}

/// Per-bit SNR after smoothing for every (N, L), the noise-only reference,
/// and the projection baseline per N.
pub fn ebn0(c: &ExperimentConfig) -> Result<Table> {
    let e = &c.ebn0;
    let nv = noise_var_for_ebn0(e.reference_db, &c.system);
    let reference = ebn0_with_distortion(nv, 0.0, &c.system)?;
    let mut table = Table::new(&["scheme", "n", "l", "ebn0_db", "loss_db"]);
    table.push(vec!["reference".into(), String::new(), String::new(), num(reference), num(0.0)]);
    for &n in &e.n_values {
        for &l in &e.l_values {
            let cfg = SystemConfig { n, l, ..c.system.clone() };
            let v = ebn0_relation(nv, &build_smoother(&cfg)?, &cfg)?;
            table.push(vec![
                "low_interference".into(),
                n.to_string(),
                l.to_string(),
                num(v),
                num(reference - v),
            ]);
        }
    }
    for &n in &e.n_values {
        let cfg = SystemConfig { n, ..c.system.clone() };
        let distortion = baseline_distortion_power(&cfg, e.baseline_symbols, substream(c.seed, n as u64))?;
        let v = ebn0_with_distortion(nv, distortion, &cfg)?;
        table.push(vec![
            "baseline_projection".into(),
            n.to_string(),
            String::new(),
            num(v),
            num(reference - v),
        ]);
    }
    Ok(table)
}

pub fn sync(c: &ExperimentConfig) -> Result<Table> {
    let exp = StoExperiment {
        seed: c.seed,
        ..c.sync.clone()
    };
    let rows = sto_error_variance(&exp, &build_smoother(&c.system)?, &c.system)?;
    let mut table = Table::new(&["snr_db", "mse_samples_sq"]);
    for r in rows {
        table.push(vec![num(r.snr_db), num(r.mse_samples_sq)]);
    }
    Ok(table)
}

pub fn complexity(c: &ExperimentConfig) -> Result<Table> {
    let mut table = Table::new(&[
        "n",
        "l",
        "low_interference_count",
        "low_interference_formula",
        "baseline_count",
        "baseline_formula",
        "coefficient_count",
    ]);
    for &l in &c.complexity.l_values {
        let cfg = SystemConfig { l, ..c.system.clone() };
        table.push(vec![
            cfg.n.to_string(),
            l.to_string(),
            complexity_count(Scheme::LowInterference, &cfg)?.to_string(),
            complexity_formula(Scheme::LowInterference, &cfg).to_string(),
            complexity_count(Scheme::BaselineProjection, &cfg)?.to_string(),
            complexity_formula(Scheme::BaselineProjection, &cfg).to_string(),
            coefficient_count(&cfg)?.to_string(),
        ]);
    }
    Ok(table)
}

struct Check {
    name: String,
    value: f64,
    limit: String,
    pass: bool,
}

fn check(name: impl Into<String>, value: f64, limit: impl Into<String>, pass: bool) -> Check {
    Check {
        name: name.into(),
        value,
        limit: limit.into(),
        pass,
    }
}

/// Closed forms against their oracles at reduced scale. Returns the table
/// and the number of breaches.
pub fn validate(c: &ExperimentConfig) -> Result<(Table, usize)> {
    let mut checks = Vec::new();
    let constellation = QamConstellation::new(16)?;

    for (model, exact, tag) in [(BoundaryModel::Hankel, false, "ladder"), (BoundaryModel::Leibniz, true, "exact")] {
        let mut worst = 0.0f64;
        for n in 0..=4 {
            for l in [144, 1000] {
                let cfg = SystemConfig::new(n, l);
                let ctx = build_smoother_with(&cfg, model)?;
                let mut rng = trial_rng(substream(c.seed, 10), (n * 10_000 + l) as u64);
                let data: Vec<_> = (0..21).map(|_| random_symbols(&constellation, cfg.k(), &mut rng)).collect();
                for pair in data.windows(2) {
                    for v in ctx.junction_residuals(&pair[0], &pair[1], exact)? {
                        worst = worst.max(v);
                    }
                }
            }
        }
        checks.push(check(format!("continuity_{tag}"), worst, "< 1e-8", worst < 1e-8));
    }

    let mc = MonteCarloSpec {
        seed: substream(c.seed, 20),
        ..MonteCarloSpec::default()
    };
    for (n, want) in [(0usize, -40.0), (1, -60.0)] {
        let cfg = SystemConfig::new(n, 144);
        let ctx = build_smoother(&cfg)?;
        let grid = edge_offset_grid(&cfg, 1024.0, 10240.0, 40);
        let s = fit_slope(&analytic_psd(&grid, &cfg, &ctx, &mc)?, 0.0, f64::INFINITY)?;
        checks.push(check(
            format!("psd_slope_n{n}"),
            s,
            format!("{want} +/- 5"),
            (s - want).abs() <= 5.0,
        ));
    }

    let profile = ncofdm::channel::eva_profile();
    for (n, l) in [(2, 144), (4, 1000)] {
        let cfg = SystemConfig::new(n, l);
        let ctx = build_smoother(&cfg)?;
        let model = smooth_interference_power(&ctx, &profile, &cfg)?;
        for snr in [10.0, 30.0] {
            let nv = noise_var_for_bin_snr(snr, &cfg);
            let mc = LinkMonteCarlo {
                seed: substream(c.seed, 30 + snr as u64),
                ..LinkMonteCarlo::default()
            };
            let gap = (average_sinr_db(&model, nv, &cfg)? - simulate_perfect_sync_sinr(&cfg, &ctx, &profile, nv, &mc)?).abs();
            checks.push(check(format!("sinr_gap_n{n}_l{l}_{snr}db"), gap, "<= 0.5 dB", gap <= 0.5));
        }
    }

    let m = 2048;
    for (sw, a) in [(0.1, 0.05), (0.2, 1.0), (0.5, 3.0), (0.0, 3.0)] {
        let p = BerSeriesParams::new(16, vec![sw], a * m as f64, m);
        let rel = (ber_closed_form(&p)? - ber_numeric_quadrature(&p)?).abs() / ber_numeric_quadrature(&p)?;
        let limit = if sw == 0.0 { 0.01 } else { 0.005 };
        checks.push(check(
            format!("ber_closed_vs_quadrature_sw{sw}_a{a}"),
            rel,
            format!("<= {limit}"),
            rel <= limit,
        ));
    }

    {
        let cfg = SystemConfig::new(2, 1000);
        let ctx = build_smoother(&cfg)?;
        let inputs = |sto| SinrCaseInputs {
            sto_samples: sto,
            cfo_normalized: 0.074,
            profile: &profile,
            ctx: &ctx,
            cfg: &cfg,
            noise_var: noise_var_for_ebn0(15.0, &cfg),
        };
        let late = sinr_case(SyncCase::Late, &inputs(30.0))?;
        let clean = sinr_case(SyncCase::EarlyClean, &inputs(30.0))?;
        let overlap = sinr_case(SyncCase::EarlyOverlap, &inputs(97.0))?;
        let margin = 10.0 * (clean / late.max(overlap)).log10();
        checks.push(check("imperfect_sync_ordering_db", margin, "> 0", margin > 0.0));
        let sim = simulate_case(SyncCase::Late, &inputs(30.0), 200, substream(c.seed, 40))?.sinr();
        let gap = 10.0 * (sim / late).log10().abs();
        checks.push(check("imperfect_sync_late_gap_db", gap, "<= 1 dB", gap <= 1.0));
    }

    let nv = noise_var_for_ebn0(30.0, &SystemConfig::new(0, 144));
    let mut drops = Vec::new();
    for n in 0..=4 {
        let cfg = SystemConfig::new(n, 144);
        drops.push(ebn0_relation(nv, &build_smoother(&cfg)?, &cfg)?);
    }
    let step = drops.windows(2).map(|w| w[0] - w[1]).fold(f64::INFINITY, f64::min);
    checks.push(check("ebn0_min_drop_per_order_db", step, "> 0", step > 0.0));

    for l in [36, 1000] {
        let cfg = SystemConfig::new(2, l);
        let count = complexity_count(Scheme::LowInterference, &cfg)?;
        let ok = count == complexity_formula(Scheme::LowInterference, &cfg) && count < complexity_count(Scheme::BaselineProjection, &cfg)?;
        checks.push(check(format!("complexity_l{l}"), count as f64, "= formula, < baseline", ok));
    }

    let breaches = checks.iter().filter(|c| !c.pass).count();
    let mut table = Table::new(&["check", "value", "limit", "pass"]);
    for ch in checks {
        table.push(vec![ch.name, num(ch.value), ch.limit, ch.pass.to_string()]);
    }
    Ok((table, breaches))
}
