//! Closed-form PSD of the smoothed stream for a Blackman smoother.
//!
//! Each symbol's spectrum is a linear map of its own data and of the
//! previous symbol's data: `A_i(f) = Σ_r α_r(f)·x_{i,r} + β_r(f)·x_{i−1,r}`.
//! [`AnalyticPsd::coefficients`] evaluates `α` and `β`; the PSD is the
//! finite-`U` periodogram of `Σ_i A_i(f)e^{−j2πfiT}` averaged over data
//! realizations. [`AnalyticPsd::expected`] gives the same average in closed
//! form and serves as a convergence check.
//!
//! Frequencies inside this module are in subcarrier units `F = f/Δf` and
//! time in samples.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::{MonteCarloSpec, PsdEstimate};
use crate::error::{Error, Result};
use crate::exec::{par_map, trial_rng};
use crate::numerics::{normal_equation_pinv, sinc, CMatrix, WindowKind};
use crate::waveform::{random_symbols, QamConstellation, SmootherContext, SystemConfig};

const J: Complex64 = Complex64 { re: 0.0, im: 1.0 };
/// Half-width of the symmetric average used at removable singularities.
const SINGULAR_STEP: f64 = 1e-5;

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Transform of the `nb`-th derivative of the falling Blackman window times a
/// tone, at normalized offset `x = T_L·f_r/M`.
fn window_bracket(nb: usize, x: f64, t_l: f64) -> Complex64 {
    let core = |x: f64| {
        let (s, c) = ((PI * nb as f64 / 2.0).sin(), (PI * nb as f64 / 2.0).cos());
        let e = 1.0 - nb as f64;
        let t0 = if nb == 0 { 0.42 * t_l * sinc(x) } else { 0.0 };
        let t1 = -(PI * x).cos() * Complex64::new(s, 2.0 * x * c) / ((PI / t_l).powf(e) * (1.0 - 4.0 * x * x));
        let t2 = 0.16 * (PI * x).sin() * Complex64::new(-x * c, s) / ((2.0 * PI / t_l).powf(e) * (1.0 - x * x));
        t2 + t1 + t0
    };
    if (1.0 - 4.0 * x * x).abs() < 1e-7 || (1.0 - x * x).abs() < 1e-7 {
        0.5 * (core(x + SINGULAR_STEP) + core(x - SINGULAR_STEP))
    } else {
        core(x)
    }
}

/// `sin(πa·x)/(πx)` with its limit `a` at zero.
fn scaled_sinc(a: f64, x: f64) -> f64 {
    if x.abs() < 1e-12 {
        a
    } else {
        (PI * a * x).sin() / (PI * x)
    }
}

/// Per-frequency `α` and `β` rows, `K` values each.
#[derive(Clone, Debug)]
pub struct CoefficientTable {
    pub freqs: Vec<f64>,
    pub alpha: Vec<Vec<Complex64>>,
    pub beta: Vec<Vec<Complex64>>,
}

/// Evaluator bound to one configuration and smoother.
#[derive(Clone, Debug)]
pub struct AnalyticPsd<'a> {
    ctx: &'a SmootherContext,
    m: f64,
    mcp: f64,
    t_sym: f64,
    /// `N × (N+1)` map from smoother coefficients to auxiliary coefficients
    /// (empty for `N < 2`).
    aux_map: CMatrix,
    aux_system: Option<AuxSystem>,
}

/// Least-squares system for the auxiliary smoother.
#[derive(Clone, Debug)]
pub struct AuxSystem {
    /// Derivatives `0…N−2` of the `N` auxiliary basis terms at the next symbol start.
    pub q1: CMatrix,
    /// Same at the smoother's end.
    pub q2: CMatrix,
    /// `(N−1)×(N+1)`: derivatives `2…N` of each smoother basis at its end.
    pub d: CMatrix,
}

impl<'a> AnalyticPsd<'a> {
    pub fn new(cfg: &SystemConfig, ctx: &'a SmootherContext) -> Result<Self> {
        cfg.validate()?;
        if ctx.window != WindowKind::Blackman {
            return Err(Error::Config(format!(
                "analytic PSD is derived for the Blackman window, got {}",
                ctx.window.name()
            )));
        }
        if ctx.n != cfg.n || ctx.l != cfg.l || ctx.m != cfg.m || ctx.mcp != cfg.mcp || ctx.k() != cfg.k() {
            return Err(Error::Config("smoother context was built for another configuration".into()));
        }
        let mut me = Self {
            ctx,
            m: cfg.m as f64,
            mcp: cfg.mcp as f64,
            t_sym: cfg.symbol_len() as f64,
            aux_map: CMatrix::zeros(0, 0),
            aux_system: None,
        };
        if ctx.n >= 2 {
            let sys = me.build_aux_system();
            let n = ctx.n;
            let mut map = CMatrix::zeros(n, n + 1);
            for col in 0..=n {
                let w = sys.d.col(col);
                let b = normal_equation_pinv(&sys.q1, &sys.q2, &w)?;
                for (row, v) in b.into_iter().enumerate() {
                    map[(row, col)] = v;
                }
            }
            me.aux_map = map;
            me.aux_system = Some(sys);
        }
        Ok(me)
    }

    fn build_aux_system(&self) -> AuxSystem {
        let ctx = self.ctx;
        let n = ctx.n;
        let t_l = ctx.t_l();
        let next_start = self.m + self.mcp;
        let q1 = CMatrix::from_fn(n - 1, n, |r, c| ctx.f_deriv(r + c, next_start));
        let q2 = CMatrix::from_fn(n - 1, n, |r, c| ctx.f_deriv(r + c, t_l));
        let d = CMatrix::from_fn(n - 1, n + 1, |row, col| ctx.basis_exact_deriv(col, row + 2, t_l));
        AuxSystem { q1, q2, d }
    }

    pub fn aux_system(&self) -> Option<&AuxSystem> {
        self.aux_system.as_ref()
    }

    /// Auxiliary coefficients for smoother coefficients `c` (length `N+1`).
    pub fn aux_coefficients(&self, c: &[Complex64]) -> Result<Vec<Complex64>> {
        if self.aux_system.is_none() {
            return Err(Error::CaseMismatch("auxiliary smoother exists only for N >= 2".into()));
        }
        self.aux_map.matvec(c)
    }

    /// Transform of `f̃_n` carrying `order` extra derivatives of the product,
    /// with the summed magnitude of its terms.
    fn basis_transform(&self, n: usize, order: usize, f: f64) -> (Complex64, f64) {
        let t_l = self.ctx.t_l();
        let ks = self.ctx.subcarriers();
        let mut tot = Complex64::new(0.0, 0.0);
        let mut mag = 0.0;
        for (r, &k) in ks.iter().enumerate() {
            let fr = k - f;
            let x = t_l / self.m * fr;
            let ph = Complex64::from_polar(1.0, PI * (2.0 * self.mcp * f / self.m + x));
            let p = self.ctx.ladder(r);
            for nb in 0..=order {
                let term = binomial(order, nb) * p.powu((n + order - nb) as u32) * window_bracket(nb, x, t_l);
                mag += term.norm();
                tot += ph * term;
            }
        }
        (tot, mag)
    }

    /// `(α_r(F), β_r(F))` for one frequency in subcarrier units.
    pub fn coefficients(&self, f: f64) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
        self.coefficients_checked(f).map(|(a, b, _)| (a, b))
    }

    /// As [`Self::coefficients`], plus the number of decimal digits lost to
    /// cancellation (log10 of summand magnitude over result magnitude).
    pub fn coefficients_checked(&self, f: f64) -> Result<(Vec<Complex64>, Vec<Complex64>, f64)> {
        if f.abs() < 1e-9 {
            return Err(Error::Domain("analytic PSD is not evaluated at DC".into()));
        }
        let ctx = self.ctx;
        let n = ctx.n;
        let o = (n + 1) as u32;
        let b1 = self.mcp / self.m;
        let ks = ctx.subcarriers();
        let den = (J * 2.0 * PI * f / self.m).powu(o);
        let mut coefw = Vec::with_capacity(n + 1);
        // Magnitude of the summands behind each coefficient, for the loss estimate.
        let mut coefw_mag = Vec::with_capacity(n + 1);
        for nn in 0..=n {
            let (v, mag) = self.basis_transform(nn, n + 1, f);
            coefw.push(v / (self.t_sym * den));
            coefw_mag.push(mag / (self.t_sym * den.norm()));
        }
        if n >= 2 {
            let b2 = ctx.t_l() / self.m;
            let scale = self.m / self.t_sym;
            let quad = (J * 2.0 * PI * f / self.m).powu(2);
            let mut s = vec![Complex64::new(0.0, 0.0); n];
            let mut s_mag = vec![0.0; n];
            for (r, &k) in ks.iter().enumerate() {
                let fr = k - f;
                let fbar = k + f;
                let ph = Complex64::from_polar(1.0, PI * ((1.0 + b2) * fr + b1 * fbar)) * scaled_sinc(1.0 - b2 + b1, fr);
                let p = ctx.ladder(r);
                for nn in 0..n {
                    let t3 = scale * p.powu((n - 1 + nn) as u32) * ph / den;
                    let t4 = scale * p.powu(nn as u32) * ph / quad;
                    s[nn] += t3 - t4;
                    s_mag[nn] += t3.norm() + t4.norm();
                }
            }
            for col in 0..=n {
                for row in 0..n {
                    coefw[col] += s[row] * self.aux_map[(row, col)];
                    coefw_mag[col] += s_mag[row] * self.aux_map[(row, col)].norm();
                }
            }
        }
        let mut alpha = Vec::with_capacity(ks.len());
        let mut beta = Vec::with_capacity(ks.len());
        let (mut summands, mut result) = (0.0, 0.0);
        for (r, &k) in ks.iter().enumerate() {
            let fr = k - f;
            let data = (k / f).powi(o as i32) * Complex64::from_polar(1.0, PI * fr * (1.0 - b1)) * sinc(fr * (1.0 + b1));
            let (mut cb, mut ca) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
            summands += data.norm();
            for (nn, cw) in coefw.iter().enumerate() {
                cb += cw * ctx.b[(nn, r)];
                ca += cw * ctx.a[(nn, r)];
                summands += coefw_mag[nn] * (ctx.a[(nn, r)].norm() + ctx.b[(nn, r)].norm());
            }
            result += (data - cb).norm() + ca.norm();
            alpha.push(data - cb);
            beta.push(ca);
        }
        Ok((alpha, beta, (summands / result).log10()))
    }

    fn symbol_phase(&self, f: f64) -> Complex64 {
        Complex64::from_polar(1.0, -2.0 * PI * f * self.t_sym / self.m)
    }

    /// Infinite-`U` expectation for unit-variance i.i.d. data.
    pub fn expected(&self, f: f64) -> Result<f64> {
        let (alpha, beta) = self.coefficients(f)?;
        let z = self.symbol_phase(f);
        Ok(alpha.iter().zip(&beta).map(|(a, b)| (a + z * b).norm_sqr()).sum::<f64>() / self.t_sym)
    }

    pub fn table(&self, freqs: &[f64]) -> Result<CoefficientTable> {
        let rows: Vec<Result<_>> = par_map(freqs.len(), |i| self.coefficients(freqs[i]));
        let mut alpha = Vec::with_capacity(freqs.len());
        let mut beta = Vec::with_capacity(freqs.len());
        for row in rows {
            let (a, b) = row?;
            alpha.push(a);
            beta.push(b);
        }
        Ok(CoefficientTable {
            freqs: freqs.to_vec(),
            alpha,
            beta,
        })
    }

    /// `|Σ_i A_i(f)e^{−j2πfiT}|²/(U·T)` for one data realization. `data`
    /// holds `x_{−1}, x_0, …, x_{U−1}`.
    pub fn periodogram(&self, table: &CoefficientTable, data: &[Vec<Complex64>]) -> Vec<f64> {
        let u = data.len() - 1;
        table
            .freqs
            .iter()
            .enumerate()
            .map(|(fi, &f)| {
                let z = self.symbol_phase(f);
                let (alpha, beta) = (&table.alpha[fi], &table.beta[fi]);
                let mut zi = Complex64::new(1.0, 0.0);
                let mut acc = Complex64::new(0.0, 0.0);
                for pair in data.windows(2) {
                    let (prev, cur) = (&pair[0], &pair[1]);
                    let mut a_i = Complex64::new(0.0, 0.0);
                    for r in 0..alpha.len() {
                        a_i += alpha[r] * cur[r] + beta[r] * prev[r];
                    }
                    acc += a_i * zi;
                    zi *= z;
                }
                acc.norm_sqr() / (u as f64 * self.t_sym)
            })
            .collect()
    }

    /// Realization-averaged periodogram on `freqs` (subcarrier units).
    pub fn monte_carlo(&self, freqs: &[f64], qam_order: usize, mc: &MonteCarloSpec) -> Result<Vec<f64>> {
        if mc.realizations == 0 || mc.symbols == 0 {
            return Err(Error::Config("Monte-Carlo spec needs realizations and symbols".into()));
        }
        let table = self.table(freqs)?;
        let constellation = QamConstellation::new(qam_order)?;
        let per: Vec<Vec<f64>> = par_map(mc.realizations, |i| {
            let mut rng = trial_rng(mc.seed, i as u64);
            let data: Vec<Vec<Complex64>> = (0..=mc.symbols)
                .map(|_| random_symbols(&constellation, self.ctx.k(), &mut rng))
                .collect();
            self.periodogram(&table, &data)
        });
        let mut out = vec![0.0; freqs.len()];
        for p in &per {
            for (o, v) in out.iter_mut().zip(p) {
                *o += v;
            }
        }
        for o in out.iter_mut() {
            *o /= mc.realizations as f64;
        }
        Ok(out)
    }

    /// Smallest `|F|` at which the expression is trusted. For `N ≥ 2` the
    /// auxiliary-smoother summands carry `1/F²` and `1/F^{N+1}` factors that
    /// do not cancel near DC, so the inner half of the band is excluded.
    pub fn min_valid_frequency(&self) -> f64 {
        if self.ctx.n >= 2 {
            self.edge() / 2.0
        } else {
            0.0
        }
    }

    fn edge(&self) -> f64 {
        self.ctx.subcarriers().iter().fold(0.0f64, |m, k| m.max(k.abs())) + 0.5
    }

    /// Mean expected PSD over the active subcarrier centres in the outer
    /// half of the band.
    pub fn in_band_reference(&self) -> Result<f64> {
        let half = self.edge() / 2.0;
        let mut sum = 0.0;
        let mut count = 0usize;
        for &k in self.ctx.subcarriers().iter().filter(|k| k.abs() >= half) {
            sum += self.expected(k)?;
            count += 1;
        }
        if count == 0 {
            return Err(Error::Degenerate("no subcarriers in the outer half of the band".into()));
        }
        Ok(sum / count as f64)
    }
}

fn run_case(fgrid_hz: &[f64], cfg: &SystemConfig, ctx: &SmootherContext, mc: &MonteCarloSpec, tag: &str) -> Result<PsdEstimate> {
    if fgrid_hz.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Config("frequency grid must be strictly increasing".into()));
    }
    let psd = AnalyticPsd::new(cfg, ctx)?;
    let floor = psd.min_valid_frequency();
    let kept_hz: Vec<f64> = fgrid_hz
        .iter()
        .copied()
        .filter(|f| (f / cfg.subcarrier_spacing_hz).abs() >= floor.max(1e-9))
        .collect();
    if kept_hz.is_empty() {
        return Err(Error::Domain("no grid point lies where the analytic PSD is valid".into()));
    }
    let freqs: Vec<f64> = kept_hz.iter().map(|f| f / cfg.subcarrier_spacing_hz).collect();
    let linear = psd.monte_carlo(&freqs, cfg.qam_order, mc)?;
    let reference = psd.in_band_reference()?;
    let meta = format!(
        "analytic {tag} N={} L={} realizations={} symbols={} dropped_below_min_freq={}",
        cfg.n,
        cfg.l,
        mc.realizations,
        mc.symbols,
        fgrid_hz.len() - kept_hz.len()
    );
    Ok(PsdEstimate::from_linear(
        kept_hz,
        linear,
        reference,
        cfg.band_edge() * cfg.subcarrier_spacing_hz,
        meta,
    ))
}

/// Continuous signal (`N = 0`).
pub fn analytic_psd_case0(fgrid_hz: &[f64], cfg: &SystemConfig, ctx: &SmootherContext, mc: &MonteCarloSpec) -> Result<PsdEstimate> {
    if cfg.n != 0 {
        return Err(Error::CaseMismatch(format!("case0 needs N = 0, got {}", cfg.n)));
    }
    run_case(fgrid_hz, cfg, ctx, mc, "case0")
}

/// Continuous first derivative (`N = 1`).
pub fn analytic_psd_case1(fgrid_hz: &[f64], cfg: &SystemConfig, ctx: &SmootherContext, mc: &MonteCarloSpec) -> Result<PsdEstimate> {
    if cfg.n != 1 {
        return Err(Error::CaseMismatch(format!("case1 needs N = 1, got {}", cfg.n)));
    }
    run_case(fgrid_hz, cfg, ctx, mc, "case1")
}

/// `N ≥ 2`, with the auxiliary least-squares smoother for the higher-order
/// boundary terms.
pub fn analytic_psd_case_n(fgrid_hz: &[f64], cfg: &SystemConfig, ctx: &SmootherContext, mc: &MonteCarloSpec) -> Result<PsdEstimate> {
    if cfg.n < 2 {
        return Err(Error::CaseMismatch(format!("caseN needs N >= 2, got {}", cfg.n)));
    }
    run_case(fgrid_hz, cfg, ctx, mc, "caseN")
}
