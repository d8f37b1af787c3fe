use std::f64::consts::PI;

use crate::error::{Error, Result};

const FRAC_2_SQRT_PI: f64 = std::f64::consts::FRAC_2_SQRT_PI;
const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Normalized sinc, `sin(πx)/(πx)` with `sinc(0) = 1`.
pub fn sinc(x: f64) -> f64 {
    let px = PI * x;
    if px.abs() < 1e-8 {
        1.0 - px * px / 6.0
    } else {
        px.sin() / px
    }
}

/// Gauss hypergeometric ₂F₁(a, b; c; z) by its power series, for real
/// `0 ≤ z < 1`.
///
/// Summation stops once three consecutive terms fall below 1e-15 of the
/// running sum in magnitude.
pub fn gauss_2f1(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    const MAX_TERMS: usize = 1_000_000;
    if c <= 0.0 && c.fract() == 0.0 {
        return Err(Error::Domain(format!("2F1 with non-positive integer c = {c}")));
    }
    if !(0.0..1.0).contains(&z) {
        return Err(Error::Domain(format!("2F1 series needs 0 <= z < 1, got {z}")));
    }
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut small_run = 0;
    for k in 0..MAX_TERMS {
        let kf = k as f64;
        term *= (a + kf) * (b + kf) / ((c + kf) * (kf + 1.0)) * z;
        sum += term;
        if term.abs() < 1e-15 * sum.abs() {
            small_run += 1;
            if small_run == 3 {
                return Ok(sum);
            }
        } else {
            small_run = 0;
        }
        if !sum.is_finite() {
            break;
        }
    }
    Err(Error::Convergence {
        what: format!("2F1({a}, {b}; {c}; {z})"),
        terms: MAX_TERMS,
    })
}

/// Maclaurin-type series `erf(x) = (2/√π) e^{-x²} Σ 2ⁿ x^{2n+1} / (2n+1)!!`.
///
/// All terms share one sign, so the sum is free of the cancellation that
/// the alternating form suffers for moderate `x`.
fn erf_series(x: f64) -> f64 {
    let x2 = x * x;
    let mut term = x;
    let mut sum = x;
    let mut n = 0.0;
    while term.abs() > 1e-17 * sum.abs() {
        term *= 2.0 * x2 / (2.0 * n + 3.0);
        sum += term;
        n += 1.0;
    }
    FRAC_2_SQRT_PI * (-x2).exp() * sum
}

/// Continued fraction for erfc, valid for `x > 0` and fast for `x ≳ 2`.
fn erfc_continued_fraction(x: f64) -> f64 {
    // erfc(x) = e^{-x²}/√π · 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...)))), modified Lentz.
    let tiny = 1e-300;
    let mut f = x;
    let mut c = x;
    let mut d = 0.0;
    for n in 1..5000 {
        let an = n as f64 / 2.0;
        d = x + an * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = x + an / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    (-x * x).exp() / (f * PI.sqrt())
}

/// Error function: series for `|x| ≤ 3`, continued fraction beyond.
pub fn erf(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x.abs() <= 3.0 {
        erf_series(x)
    } else {
        x.signum() * (1.0 - erfc_continued_fraction(x.abs()))
    }
}

/// Complementary error function, keeping relative accuracy in the tail.
pub fn erfc(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x < 0.0 {
        2.0 - erfc(-x)
    } else if x < 2.0 {
        1.0 - erf_series(x)
    } else {
        erfc_continued_fraction(x)
    }
}

/// Gaussian tail probability `Q(x) = ½ erfc(x/√2)`.
pub fn q_function(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// Exponential integral `E₁(x) = ∫₁^∞ e^{-xt}/t dt` for `x > 0`.
pub fn exp_integral_e1(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("E1 needs finite x > 0, got {x}")));
    }
    if x <= 1.0 {
        Ok(e1_series(x))
    } else {
        Ok((-x).exp() * e1_scaled_cf(x))
    }
}

/// `eˣ E₁(x)`, finite for large `x` where `E₁` alone underflows.
pub fn exp_integral_e1_scaled(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("E1 needs finite x > 0, got {x}")));
    }
    if x <= 1.0 {
        Ok(x.exp() * e1_series(x))
    } else {
        Ok(e1_scaled_cf(x))
    }
}

fn e1_series(x: f64) -> f64 {
    let mut sum = 0.0;
    let mut term = 1.0;
    for k in 1..200 {
        term *= -x / k as f64;
        let add = term / k as f64;
        sum += add;
        if add.abs() < 1e-17 * sum.abs().max(1e-300) {
            break;
        }
    }
    -EULER_GAMMA - x.ln() - sum
}

fn e1_scaled_cf(x: f64) -> f64 {
    // eˣE₁(x) = 1/(x+1- 1/(x+3- 4/(x+5- ...))), modified Lentz.
    let tiny = 1e-300;
    let mut b = x + 1.0;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..10_000 {
        let an = -((i * i) as f64);
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        if c.abs() < tiny {
            c = tiny;
        }
        let delta = c * d;
        h *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h
}
