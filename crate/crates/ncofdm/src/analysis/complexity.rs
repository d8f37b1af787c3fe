//! Transmitter multiplication counts by instrumented arithmetic.

use std::cell::Cell;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::waveform::{build_smoother, coefficients_generic, precode_generic, synthesize_smooth_generic, LeastNormPrecoder, SystemConfig};

thread_local! {
    static REAL_MULS: Cell<u64> = const { Cell::new(0) };
}

/// Complex scalar that tallies four real multiplications per product.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Counted(pub Complex64);

impl Counted {
    pub fn reset() {
        REAL_MULS.with(|c| c.set(0));
    }

    pub fn count() -> u64 {
        REAL_MULS.with(Cell::get)
    }
}

impl Add for Counted {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self(self.0 + rhs.0)
    }
}

impl Sub for Counted {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self(self.0 - rhs.0)
    }
}

impl Mul for Counted {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        REAL_MULS.with(|c| c.set(c.get() + 4));
        Self(self.0 * rhs.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    LowInterference,
    /// Least-norm projection precoder, not a published NC-OFDM transmitter.
    BaselineProjection,
}

fn wrap(v: &[Complex64]) -> Vec<Counted> {
    v.iter().copied().map(Counted).collect()
}

/// Real multiplications spent per transmitted symbol beyond plain OFDM
/// modulation, counted by running the transmitter path on [`Counted`].
pub fn complexity_count(scheme: Scheme, cfg: &SystemConfig) -> Result<u64> {
    cfg.validate()?;
    let k = cfg.k();
    let data: Vec<Counted> = (0..k).map(|r| Counted(Complex64::new(1.0, r as f64))).collect();
    match scheme {
        Scheme::LowInterference => {
            let ctx = build_smoother(cfg)?;
            let (a, b, qf) = (wrap(ctx.a.as_slice()), wrap(ctx.b.as_slice()), wrap(ctx.qf.as_slice()));
            Counted::reset();
            let w = synthesize_smooth_generic(&a, &b, &qf, (cfg.n + 1, k, cfg.l), &data, &data);
            debug_assert_eq!(w.len(), cfg.l);
        }
        Scheme::BaselineProjection => {
            let p = LeastNormPrecoder::new(cfg)?;
            let (w, v) = (wrap(p.w.as_slice()), wrap(p.v.as_slice()));
            Counted::reset();
            precode_generic(&w, &v, k, &data, &data);
        }
    }
    Ok(Counted::count())
}

/// Hand count: `4(2(N+1)K + L(N+1))` for the smoother, `8K²` for the
/// projection's two dense `K×K` products.
pub fn complexity_formula(scheme: Scheme, cfg: &SystemConfig) -> u64 {
    let (k, n1, l) = (cfg.k() as u64, cfg.n as u64 + 1, cfg.l as u64);
    match scheme {
        Scheme::LowInterference => 4 * (2 * n1 * k + l * n1),
        Scheme::BaselineProjection => 8 * k * k,
    }
}

/// Count of the coefficient step alone, `c = A·x_prev − B·x_cur`.
pub fn coefficient_count(cfg: &SystemConfig) -> Result<u64> {
    let ctx = build_smoother(cfg)?;
    let data: Vec<Counted> = (0..cfg.k()).map(|_| Counted(Complex64::new(1.0, 0.0))).collect();
    let (a, b) = (wrap(ctx.a.as_slice()), wrap(ctx.b.as_slice()));
    Counted::reset();
    coefficients_generic(&a, &b, cfg.n + 1, cfg.k(), &data, &data);
    Ok(Counted::count())
}
