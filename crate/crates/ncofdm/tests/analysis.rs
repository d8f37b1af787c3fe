use ncofdm::analysis::*;
use ncofdm::channel::eva_profile;
use ncofdm::waveform::*;
use ncofdm::Complex64;
use proptest::prelude::*;

fn inputs<'a>(
    sto: f64,
    profile: &'a ncofdm::channel::ChannelProfile,
    ctx: &'a SmootherContext,
    cfg: &'a SystemConfig,
) -> SinrCaseInputs<'a> {
    SinrCaseInputs {
        sto_samples: sto,
        cfo_normalized: 0.074,
        profile,
        ctx,
        cfg,
        noise_var: noise_var_for_ebn0(15.0, cfg),
    }
}

#[test]
fn sinr_density_integrates_to_one() {
    let m = 2048;
    for (sw, nv) in [(1e-3, 0.1 * m as f64), (5e-5, 2.0 * m as f64), (0.05, 0.5 * m as f64)] {
        let ceiling = 1.0 / (2.0 * sw);
        // Composite Simpson; the density vanishes smoothly at the ceiling.
        let steps = 400_000;
        let h = ceiling / steps as f64;
        let mut s = sinr_pdf(0.0, sw, nv, m, 1.0).unwrap() + sinr_pdf(ceiling * (1.0 - 1e-15), sw, nv, m, 1.0).unwrap();
        for i in 1..steps {
            s += sinr_pdf(i as f64 * h, sw, nv, m, 1.0).unwrap() * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        let total = s * h / 3.0;
        assert!((total - 1.0).abs() < 1e-6, "σ_w²={sw}: {total}");
        assert_eq!(sinr_pdf(ceiling * 1.0001, sw, nv, m, 1.0).unwrap(), 0.0);
    }
}

#[test]
fn ber_grows_with_interference() {
    let m = 2048;
    let mut last = 0.0;
    for sw in [0.1, 0.15, 0.2, 0.3, 0.5] {
        let ber = ber_closed_form(&BerSeriesParams::new(16, vec![sw], 0.5 * m as f64, m)).unwrap();
        assert!(ber > last, "σ_w²={sw}");
        last = ber;
    }
}

#[test]
fn finer_integration_grid_barely_moves_integrals() {
    let profile = eva_profile();
    let coarse = SystemConfig::new(2, 1000);
    let fine = SystemConfig {
        oversample: 16,
        ..coarse.clone()
    };
    let ctx = build_smoother(&coarse).unwrap();
    let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(1e-300);
    let (i1c, i1f) = (
        interference_case1(&inputs(30.0, &profile, &ctx, &coarse)).unwrap(),
        interference_case1(&inputs(30.0, &profile, &ctx, &fine)).unwrap(),
    );
    let (i2c, i2f) = (
        interference_case2(&inputs(30.0, &profile, &ctx, &coarse)).unwrap(),
        interference_case2(&inputs(30.0, &profile, &ctx, &fine)).unwrap(),
    );
    let (i3c, i3f) = (
        interference_case3(&inputs(97.0, &profile, &ctx, &coarse)).unwrap(),
        interference_case3(&inputs(97.0, &profile, &ctx, &fine)).unwrap(),
    );
    let (ec, ef) = (smooth_energy(&ctx, &coarse).unwrap(), smooth_energy(&ctx, &fine).unwrap());
    for (name, a, b) in [("I1", i1c, i1f), ("I2", i2c, i2f), ("I3", i3c, i3f), ("Ew", ec, ef)] {
        assert!(rel(a, b) < 1e-3, "{name}: {a} vs {b}");
    }
}

#[test]
fn early_cases_meet_where_the_overlap_starts() {
    // Case II and case III describe the same geometry at the switch-over offset.
    let profile = eva_profile();
    let cfg = SystemConfig::new(2, 100);
    let ctx = build_smoother(&cfg).unwrap();
    let dmax = profile.max_delay_samples(cfg.sample_period_s()) as f64;
    let at = cfg.mcp as f64 - dmax;
    let two = sinr_case(SyncCase::EarlyClean, &inputs(at, &profile, &ctx, &cfg)).unwrap();
    let three = sinr_case(SyncCase::EarlyOverlap, &inputs(at, &profile, &ctx, &cfg)).unwrap();
    assert!((two - three).abs() / two < 1e-9);
    assert!(sinr_case(SyncCase::EarlyClean, &inputs(at + 1.0, &profile, &ctx, &cfg)).is_err());
}

#[test]
fn case_simulation_tracks_closed_form() {
    let profile = eva_profile();
    let cfg = SystemConfig::new(2, 1000);
    let ctx = build_smoother(&cfg).unwrap();
    for (case, sto) in [(SyncCase::Late, 30.0), (SyncCase::EarlyClean, 30.0), (SyncCase::EarlyOverlap, 97.0)] {
        let inp = inputs(sto, &profile, &ctx, &cfg);
        let analytic = 10.0 * sinr_case(case, &inp).unwrap().log10();
        let sim = 10.0 * simulate_case(case, &inp, 200, 4).unwrap().sinr().log10();
        assert!((analytic - sim).abs() < 1.0, "{case:?}: {analytic} vs {sim}");
    }
}

#[test]
fn interference_is_non_negative_across_offsets() {
    let profile = eva_profile();
    for (n, l) in [(0, 144), (4, 1000)] {
        let cfg = SystemConfig::new(n, l);
        let ctx = build_smoother(&cfg).unwrap();
        for sto in [0.0, 5.0, 30.0, 60.0] {
            assert!(interference_case1(&inputs(sto, &profile, &ctx, &cfg)).unwrap() >= 0.0);
            assert!(interference_case2(&inputs(sto, &profile, &ctx, &cfg)).unwrap() >= 0.0);
        }
        for sto in [97.0, 120.0, 143.0] {
            assert!(interference_case3(&inputs(sto, &profile, &ctx, &cfg)).unwrap() >= 0.0);
        }
    }
}

#[test]
fn complexity_is_affine_in_window_length_and_below_baseline() {
    let count = |l: usize| complexity_count(Scheme::LowInterference, &SystemConfig::new(2, l)).unwrap() as i64;
    let (c36, c72, c144) = (count(36), count(72), count(144));
    assert_eq!(c144 - c72, 2 * (c72 - c36));
    for l in [36, 72, 144, 1000] {
        let cfg = SystemConfig::new(2, l);
        let li = complexity_count(Scheme::LowInterference, &cfg).unwrap();
        let base = complexity_count(Scheme::BaselineProjection, &cfg).unwrap();
        assert!(li < base);
        assert_eq!(base, complexity_formula(Scheme::BaselineProjection, &cfg));
    }
}

#[test]
fn ebn0_falls_with_smoothing_order() {
    let cfg0 = SystemConfig::new(0, 144);
    let nv = noise_var_for_ebn0(30.0, &cfg0);
    let mut last = f64::INFINITY;
    for n in 0..=4 {
        let cfg = SystemConfig::new(n, 144);
        let ctx = build_smoother(&cfg).unwrap();
        let v = ebn0_relation(nv, &ctx, &cfg).unwrap();
        assert!(v < last && v < 30.0);
        last = v;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn sinr_increases_with_channel_gain(g in 1e-3f64..10.0, step in 1e-3f64..5.0, sw in 0.0f64..0.1, nv in 1.0f64..1e5, phase in 0.0f64..6.28) {
        let lo = instantaneous_sinr(Complex64::from_polar(g, phase), sw, nv, 2048).unwrap();
        let hi = instantaneous_sinr(Complex64::from_polar(g + step, -phase), sw, nv, 2048).unwrap();
        prop_assert!(hi > lo);
        if sw > 0.0 {
            prop_assert!(hi < 1.0 / (2.0 * sw));
        }
    }

    #[test]
    fn average_sinr_sits_below_both_limits(sw in 1e-6f64..0.2, nv in 1.0f64..1e5) {
        let m = 2048;
        let avg = average_sinr_bin(sw, nv, m, 1.0).unwrap();
        prop_assert!(avg > 0.0);
        prop_assert!(avg <= 1.0 / (2.0 * sw) * (1.0 + 1e-12));
        prop_assert!(avg <= m as f64 / nv * (1.0 + 1e-12));
    }
}

#[test]
fn simulated_ber_matches_quadrature_without_leakage() {
    // L inside the CP on a flat channel leaves no smooth-signal leakage.
    let cfg = SystemConfig::new(1, 100);
    let ctx = build_smoother(&cfg).unwrap();
    let profile = ncofdm::channel::ChannelProfile::flat();
    let nv = noise_var_for_bin_snr(5.0, &cfg);
    let mc = LinkMonteCarlo {
        realizations: 3000,
        symbols: 2,
        seed: 9,
    };
    let sim = simulate_perfect_sync_ber(&cfg, &ctx, &profile, nv, &mc).unwrap();
    let quad = ber_numeric_quadrature(&BerSeriesParams::new(16, vec![0.0], nv, cfg.m)).unwrap();
    assert!((sim - quad).abs() / quad < 0.05, "{sim} vs {quad}");
}
