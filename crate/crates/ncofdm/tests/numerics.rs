use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use ncofdm::numerics::*;
use ncofdm::Complex64;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn naive_dft(x: &[Complex64]) -> Vec<Complex64> {
    let n = x.len();
    (0..n)
        .map(|k| {
            x.iter()
                .enumerate()
                .map(|(m, v)| v * Complex64::from_polar(1.0, -2.0 * PI * (k * m % n) as f64 / n as f64))
                .sum::<Complex64>()
                / n as f64
        })
        .collect()
}

fn to_na(a: &CMatrix) -> DMatrix<Complex64> {
    DMatrix::from_fn(a.rows(), a.cols(), |i, j| a[(i, j)])
}

#[test]
fn dft_matches_direct_sum() {
    let x: Vec<Complex64> = (0..64).map(|i| c((i as f64 * 0.37).sin(), (i as f64 * 1.3).cos() - 0.2)).collect();
    let fast = dft(&x, 64).unwrap();
    let slow = naive_dft(&x);
    let scale: f64 = slow.iter().map(|v| v.norm()).fold(0.0, f64::max);
    for (a, b) in fast.iter().zip(&slow) {
        assert!((a - b).norm() / scale < 1e-12);
    }
    // Parseval under the 1/M convention.
    let ex: f64 = x.iter().map(|v| v.norm_sqr()).sum();
    let ek: f64 = fast.iter().map(|v| v.norm_sqr()).sum();
    assert!((ek * 64.0 - ex).abs() / ex < 1e-12);
}

#[test]
fn dft_round_trip_up_to_8192() {
    for n in [1usize, 7, 64, 2048, 8192] {
        let x: Vec<Complex64> = (0..n).map(|i| c((i as f64).sqrt().sin(), (i as f64 * 0.01).cos())).collect();
        let plan = DftPlan::new(n);
        let back = plan.inverse(&plan.forward(&x).unwrap()).unwrap();
        let norm: f64 = x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        let err: f64 = x.iter().zip(&back).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        assert!(err / norm < 1e-12, "n={n}");
    }
}

#[test]
fn solve_agrees_with_nalgebra() {
    let a = CMatrix::from_fn(5, 5, |i, j| {
        c(
            if i == j { 4.0 } else { 0.3 * (i + 2 * j) as f64 / 7.0 },
            0.1 * (i as f64 - j as f64),
        )
    });
    let b = CMatrix::from_fn(5, 2, |i, j| c(i as f64 - 1.0, j as f64 + 0.5));
    let ours = solve(&a, &b).unwrap().x;
    let reference = to_na(&a).lu().solve(&to_na(&b)).unwrap();
    for i in 0..5 {
        for j in 0..2 {
            assert!((ours[(i, j)] - reference[(i, j)]).norm() < 1e-12);
        }
    }
}

#[test]
fn normal_equation_matches_stacked_least_squares() {
    let q1 = CMatrix::from_fn(4, 3, |i, j| c((i * 3 + j) as f64 * 0.21 - 1.0, (i as f64 - j as f64) * 0.4));
    let q2 = CMatrix::from_fn(4, 3, |i, j| c(((i + 1) * (j + 2)) as f64 * 0.13, (j as f64 * 0.7).sin()));
    let w = vec![c(1.0, 0.0), c(-0.5, 0.2), c(0.3, 0.9), c(0.0, -1.0)];
    let ours = normal_equation_pinv(&q1, &q2, &w).unwrap();
    let stacked = DMatrix::from_fn(8, 3, |i, j| if i < 4 { q1[(i, j)] } else { q2[(i - 4, j)] });
    let rhs = DVector::from_fn(8, |i, _| if i < 4 { c(0.0, 0.0) } else { w[i - 4] });
    let lsq = stacked.svd(true, true).solve(&rhs, 1e-14).unwrap();
    for (a, b) in ours.iter().zip(lsq.iter()) {
        assert!((a - b).norm() < 1e-9);
    }
}

#[test]
fn hypergeometric_log_identity_and_budget() {
    // 2F1(1,1;2;z) = -ln(1-z)/z.
    for z in [0.1, 0.5, 0.9] {
        let v = gauss_2f1(1.0, 1.0, 2.0, z).unwrap();
        let oracle = -(1.0 - z).ln() / z;
        assert!((v - oracle).abs() / oracle < 1e-12, "z={z}");
    }
    assert!((gauss_2f1(1.0, 1.0, 2.0, 0.5).unwrap() - 1.3862944).abs() < 1e-7);
    // 2F1(a,b;b;z) = (1-z)^-a.
    let v = gauss_2f1(2.5, 3.0, 3.0, 0.3).unwrap();
    assert!((v - 0.7f64.powf(-2.5)).abs() / v < 1e-12);
}

#[test]
fn erf_against_statrs_and_reference_values() {
    // statrs is accurate to roughly 1e-11 here.
    for x in [-3.0, -1.2, -0.3, 0.0, 0.2, 0.9, 1.7, 2.0, 2.5, 3.3, 5.0] {
        assert!((erf(x) - statrs::function::erf::erf(x)).abs() < 1e-10, "erf {x}");
        let ec = statrs::function::erf::erfc(x);
        assert!((erfc(x) - ec).abs() <= 1e-10 * ec, "erfc {x}");
    }
    // 30-digit reference values.
    let table = [
        (-1.2, -0.910_313_978_229_635_38, 1.910_313_978_229_635_4),
        (0.9, 0.796_908_212_422_832_13, 0.203_091_787_577_167_87),
        (2.5, 0.999_593_047_982_555_04, 4.069_520_174_449_589_4e-4),
        (4.0, 0.999_999_984_582_742_1, 1.541_725_790_028_002e-8),
    ];
    for (x, e, ec) in table {
        assert!((erf(x) - e).abs() < 2e-15, "erf {x}");
        assert!((erfc(x) - ec).abs() / ec < 1e-13, "erfc {x}");
    }
}

#[test]
fn q_function_against_quadrature() {
    // Composite Simpson on the Gaussian density over [1, 12].
    let n = 20_000;
    let (a, b) = (1.0, 12.0);
    let h = (b - a) / n as f64;
    let pdf = |x: f64| (-x * x / 2.0).exp() / (2.0 * PI).sqrt();
    let mut s = pdf(a) + pdf(b);
    for i in 1..n {
        s += pdf(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    let oracle = s * h / 3.0;
    assert!((q_function(1.0) - oracle).abs() < 1e-10);
    assert!((q_function(1.0) - 0.15865525).abs() < 1e-8);
}

#[test]
fn exponential_integral_against_series() {
    // E1(x) = -γ - ln x - Σ (-x)^k/(k·k!).
    let euler = 0.577_215_664_901_532_9;
    for x in [0.05, 0.5, 1.0, 2.0] {
        let mut sum = 0.0;
        let mut term = 1.0;
        for k in 1..60 {
            term *= -x / k as f64;
            sum += term / k as f64;
        }
        let oracle = -euler - f64::ln(x) - sum;
        assert!((exp_integral_e1(x).unwrap() - oracle).abs() / oracle < 1e-12, "x={x}");
    }
}

#[test]
fn blackman_derivatives_match_finite_differences() {
    let t_l = 999.0;
    let h = t_l / 1e6;
    for i in 1..40 {
        let t = t_l * i as f64 / 40.0;
        for order in 1..=3u32 {
            let fd =
                (blackman_derivative(order - 1, t + h, t_l).unwrap() - blackman_derivative(order - 1, t - h, t_l).unwrap()) / (2.0 * h);
            let an = blackman_derivative(order, t, t_l).unwrap();
            let scale = (2.0 * PI / t_l).powi(order as i32);
            assert!((fd - an).abs() / scale < 1e-6, "order {order} at {t}");
        }
    }
}

proptest! {
    #[test]
    fn solve_residual_is_small(seed in prop::collection::vec(-1.0f64..1.0, 32)) {
        let a = CMatrix::from_fn(4, 4, |i, j| c(seed[i * 4 + j] + if i == j { 3.0 } else { 0.0 }, seed[16 + i * 4 + j]));
        let b = CMatrix::from_fn(4, 1, |i, _| c(seed[i], seed[i + 8]));
        if let Ok(s) = solve(&a, &b) {
            let r = a.matmul(&s.x).unwrap().sub(&b).unwrap();
            prop_assert!(r.frobenius_norm() / b.frobenius_norm().max(1e-300) <= 1e-9);
        }
    }

    #[test]
    fn hypergeometric_budget_is_stable(a in 0.1f64..4.0, b in 0.1f64..4.0, c0 in 0.5f64..6.0, z in 0.0f64..0.95) {
        let v = gauss_2f1(a, b, c0, z).unwrap();
        // Same value from the Euler transformation (1-z)^{c-a-b} 2F1(c-a, c-b; c; z).
        let w = (1.0 - z).powf(c0 - a - b) * gauss_2f1(c0 - a, c0 - b, c0, z).unwrap();
        prop_assert!((v - w).abs() <= 1e-9 * v.abs().max(1.0));
    }
}
