//! Uncoded square-QAM BER over Rayleigh fading with smooth-signal
//! interference: the double-series closed form and its quadrature oracle.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::interference::sinr_pdf;
use crate::error::{Error, Result};
use crate::numerics::{gauss_2f1, q_function};

/// Relative error budget of the closed form before it reports precision loss.
pub const BER_PRECISION_BUDGET: f64 = 1e-4;

/// One term of the conditional BER: `weight · Q(multiplier·√(3γ/(J−1)))`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QamTerm {
    pub weight: f64,
    pub multiplier: f64,
}

/// Gray-coded square-QAM bit error terms, prefactor folded into the weights.
pub fn qam_ber_terms(order: usize) -> Result<Vec<QamTerm>> {
    let side = (order as f64).sqrt().round() as usize;
    if order < 4 || side * side != order || !side.is_power_of_two() {
        return Err(Error::Config(format!("{order} is not a square QAM order")));
    }
    let bits_per_axis = side.trailing_zeros() as usize;
    let pref = 2.0 / (side as f64 * bits_per_axis as f64);
    let mut out = Vec::new();
    for u1 in 1..=bits_per_axis {
        let half = 1usize << (u1 - 1);
        let count = ((1.0 - 0.5f64.powi(u1 as i32)) * side as f64).round() as usize;
        for u2 in 0..count {
            let ratio = (u2 * half) as f64 / side as f64;
            let sign = if (ratio.floor() as i64) % 2 == 0 { 1.0 } else { -1.0 };
            let w = half as f64 - (ratio + 0.5).floor();
            out.push(QamTerm {
                weight: pref * sign * w,
                multiplier: (2 * u2 + 1) as f64,
            });
        }
    }
    Ok(out)
}

/// BER at a fixed SINR `γ`.
pub fn conditional_ber(gamma: f64, order: usize) -> Result<f64> {
    let scale = (3.0 * gamma / (order as f64 - 1.0)).sqrt();
    Ok(qam_ber_terms(order)?
        .iter()
        .map(|t| t.weight * q_function(t.multiplier * scale))
        .sum())
}

/// Parameters of the BER expressions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BerSeriesParams {
    pub qam_order: usize,
    /// `σ²_{w,k}` per subcarrier; the BER is their average.
    pub sigma_w_sq: Vec<f64>,
    /// Per-sample noise variance `σ_n²`.
    pub noise_var: f64,
    /// DFT size `M`.
    pub m: usize,
    /// `E{α} = Σσ²_l`.
    pub mean_alpha: f64,
    /// Gap below the SINR ceiling, `σ⁻ = (1−ε)/(2σ_w²)`. `None` picks ε so
    /// the cut sits at `tail_multiple·E{α}` in channel gain.
    pub epsilon: Option<f64>,
    /// Gain cut in units of `E{α}`; also the cut for `σ_w = 0`.
    pub tail_multiple: f64,
    pub v1_max: usize,
    pub v2_max: usize,
}

impl BerSeriesParams {
    pub fn new(qam_order: usize, sigma_w_sq: Vec<f64>, noise_var: f64, m: usize) -> Self {
        Self {
            qam_order,
            sigma_w_sq,
            noise_var,
            m,
            mean_alpha: 1.0,
            epsilon: None,
            tail_multiple: 14.0,
            v1_max: 4000,
            v2_max: 4000,
        }
    }

    fn validate(&self) -> Result<()> {
        qam_ber_terms(self.qam_order)?;
        if self.sigma_w_sq.is_empty() || self.sigma_w_sq.iter().any(|s| !(*s >= 0.0) || !s.is_finite()) {
            return Err(Error::Config("σ_w² values must be finite and non-negative".into()));
        }
        if !(self.noise_var > 0.0) || !(self.mean_alpha > 0.0) || self.m == 0 {
            return Err(Error::Config("noise variance, E{α} and M must be positive".into()));
        }
        if let Some(e) = self.epsilon {
            if !(e > 0.0 && e < 1.0) {
                return Err(Error::Config(format!("ε = {e} outside (0, 1)")));
            }
        }
        if self.v1_max < 8 || self.v2_max < 8 {
            return Err(Error::Config("truncation orders must be at least 8".into()));
        }
        Ok(())
    }

    fn noise_term(&self) -> f64 {
        self.noise_var / self.m as f64
    }

    /// Upper SINR limit `σ⁻` used for one subcarrier.
    pub fn sigma_minus(&self, sigma_w_sq: f64) -> f64 {
        let a = self.noise_term();
        if sigma_w_sq == 0.0 {
            return self.tail_multiple * self.mean_alpha / a;
        }
        let s = 2.0 * sigma_w_sq;
        let eps = self.epsilon.unwrap_or_else(|| a / (a + s * self.tail_multiple * self.mean_alpha));
        (1.0 - eps) / s
    }
}

/// Double series for one `c = 3m²/(2(J−1))`: returns the sum and the sum
/// of term magnitudes.
fn double_series(c: f64, a: f64, mean_alpha: f64, s: f64, sm: f64, p: &BerSeriesParams) -> Result<(f64, f64)> {
    let z = s * sm;
    let (ln_c, ln_a, ln_sm, ln_e) = (c.ln(), a.ln(), sm.ln(), mean_alpha.ln());
    let mut total = 0.0;
    let mut magnitude = 0.0;
    let mut prev_outer = f64::INFINITY;
    for v1 in 0..=p.v1_max {
        if v1 == p.v1_max {
            return Err(Error::Convergence {
                what: "BER outer series".into(),
                terms: v1,
            });
        }
        let mut inner = 0.0;
        let mut inner_mag = 0.0;
        let mut prev = f64::INFINITY;
        let mut done = false;
        for v2 in 0..p.v2_max {
            let v = (v1 + v2) as f64;
            let log_mag = (v1 as f64 + 0.5) * ln_c - ln_factorial(v1) - ((2 * v1 + 1) as f64).ln() + (v2 as f64 + 1.0) * (ln_a - ln_e)
                - ln_factorial(v2)
                + (v + 1.5) * ln_sm
                - (v + 1.5).ln();
            let h = if z == 0.0 {
                1.0
            } else {
                gauss_2f1(v2 as f64 + 2.0, v + 1.5, v + 2.5, z)?
            };
            let t = log_mag.exp() * h;
            if !t.is_finite() {
                return Err(Error::Precision {
                    what: "BER series term".into(),
                    magnitude: f64::INFINITY,
                    value: inner,
                    hint: "raise ε or shrink the tail multiple".into(),
                });
            }
            let signed = if (v1 + v2) % 2 == 0 { t } else { -t };
            inner += signed;
            inner_mag += t;
            if v2 >= 8 && t < prev && t <= 1e-10 * inner.abs().max(f64::MIN_POSITIVE) && t <= 1e-17 * inner_mag {
                done = true;
                break;
            }
            prev = t;
        }
        if !done {
            return Err(Error::Convergence {
                what: "BER inner series".into(),
                terms: p.v2_max,
            });
        }
        total += inner;
        magnitude += inner_mag;
        if v1 >= 8 && inner_mag < prev_outer && inner_mag <= 1e-17 * magnitude {
            return Ok((total, magnitude));
        }
        prev_outer = inner_mag;
    }
    unreachable!("outer loop returns or errors before exhausting v1_max")
}

/// `ln(n!)`.
fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|i| (i as f64).ln()).sum()
}

/// BER for one subcarrier's `σ_w²`.
fn closed_form_single(p: &BerSeriesParams, sigma_w_sq: f64) -> Result<f64> {
    let a = p.noise_term();
    let s = 2.0 * sigma_w_sq;
    let sm = p.sigma_minus(sigma_w_sq);
    let j = p.qam_order as f64;
    let mut ber = 0.0;
    let mut err = 0.0;
    let terms = qam_ber_terms(p.qam_order)?;
    let mut cache: Vec<(f64, f64, f64)> = Vec::new();
    for t in &terms {
        let c = 3.0 * t.multiplier * t.multiplier / (2.0 * (j - 1.0));
        let (sum, mag) = match cache.iter().find(|e| e.0 == c) {
            Some(&(_, s_, m_)) => (s_, m_),
            None => {
                let (s_, m_) = double_series(c, a, p.mean_alpha, s, sm, p)?;
                cache.push((c, s_, m_));
                (s_, m_)
            }
        };
        ber += t.weight * (0.5 - sum / PI.sqrt());
        err += t.weight.abs() * mag * 4.0 * f64::EPSILON / PI.sqrt();
    }
    if !(err <= BER_PRECISION_BUDGET * ber.abs()) {
        return Err(Error::Precision {
            what: format!("BER series at σ_w²={sigma_w_sq:.3e}, σ_n²/M={a:.3e}"),
            magnitude: err / (4.0 * f64::EPSILON),
            value: ber,
            hint: "the alternating series cancels beyond double precision here; use ber_numeric_quadrature".into(),
        });
    }
    Ok(ber)
}

/// Closed-form BER averaged over subcarriers.
pub fn ber_closed_form(p: &BerSeriesParams) -> Result<f64> {
    p.validate()?;
    let mut sum = 0.0;
    let mut cache: Vec<(f64, f64)> = Vec::new();
    for &sw in &p.sigma_w_sq {
        let v = match cache.iter().find(|e| e.0 == sw) {
            Some(&(_, v)) => v,
            None => {
                let v = closed_form_single(p, sw)?;
                cache.push((sw, v));
                v
            }
        };
        sum += v;
    }
    Ok((sum / p.sigma_w_sq.len() as f64).clamp(0.0, 0.5))
}

/// Adaptive quadrature of conditional BER times the SINR density over the
/// full support, averaged over subcarriers.
pub fn ber_numeric_quadrature(p: &BerSeriesParams) -> Result<f64> {
    p.validate()?;
    let mut sum = 0.0;
    for &sw in &p.sigma_w_sq {
        sum += quadrature_single(p, sw)?;
    }
    Ok(sum / p.sigma_w_sq.len() as f64)
}

fn quadrature_single(p: &BerSeriesParams, sigma_w_sq: f64) -> Result<f64> {
    let terms = qam_ber_terms(p.qam_order)?;
    let scale = 3.0 / (p.qam_order as f64 - 1.0);
    let cond = |g: f64| -> f64 {
        let r = (scale * g).sqrt();
        terms.iter().map(|t| t.weight * q_function(t.multiplier * r)).sum()
    };
    let density = |g: f64| sinr_pdf(g, sigma_w_sq, p.noise_var, p.m, p.mean_alpha).unwrap_or(0.0);
    let s = 2.0 * sigma_w_sq;
    let kappa = p.mean_alpha * p.m as f64 / p.noise_var;
    // With the ceiling far past the noise-limited mean the density has died
    // out long before it, so the unbounded map keeps the mass resolvable.
    let out = if s * kappa > 1e-3 {
        // γ = u/s over the bounded support.
        quadrature::double_exponential::integrate(|u| cond(u / s) * density(u / s) / s, 0.0, 1.0, 1e-15)
    } else {
        // γ = κu/(1−u).
        quadrature::double_exponential::integrate(
            |u| {
                if u >= 1.0 {
                    return 0.0;
                }
                let g = kappa * u / (1.0 - u);
                cond(g) * density(g) * kappa / ((1.0 - u) * (1.0 - u))
            },
            0.0,
            1.0,
            1e-15,
        )
    };
    if !out.integral.is_finite() || out.error_estimate > 1e-6 * out.integral.abs().max(1e-300) {
        return Err(Error::Quadrature(format!(
            "BER integral {:.3e} with error estimate {:.1e}",
            out.integral, out.error_estimate
        )));
    }
    Ok(out.integral)
}
