use std::f64::consts::PI;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::SystemConfig;
use crate::error::{Error, Result};
use crate::numerics::{CMatrix, DftPlan, WindowKind};

/// How derivatives of the windowed basis signals at the smooth-signal start
/// enter the boundary system.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryModel {
    /// `P_f[i][j] = f̃_{i+j}(start)`: the derivative of `f̃_n` is taken as
    /// `f̃_{n+1}`, giving the symmetric Hankel matrix.
    #[default]
    Hankel,
    /// Exact derivatives of `f^{(n)}·g` by the Leibniz rule, including the
    /// window's own curvature. Not symmetric for `N ≥ 2`.
    Leibniz,
}

/// Precomputed smoother matrices for one configuration.
#[derive(Clone, Debug)]
pub struct SmootherContext {
    pub n: usize,
    pub l: usize,
    pub m: usize,
    pub mcp: usize,
    pub window: WindowKind,
    pub model: BoundaryModel,
    subcarriers: Vec<f64>,
    /// `(N+1)×(N+1)` boundary matrix.
    pub pf: CMatrix,
    /// `(N+1)×K`, entries `(j2πk_r/M)^n`.
    pub p1: CMatrix,
    /// `P1·Φ`.
    pub p2: CMatrix,
    /// Diagonal of `Φ`, `e^{jφk_r}`.
    pub phi: Vec<Complex64>,
    /// `L×(N+1)` sampled basis signals.
    pub qf: CMatrix,
    /// `P_f⁻¹P1`, entries `a_{nr}`.
    pub a: CMatrix,
    /// `P_f⁻¹P1Φ`, entries `b_{nr}`.
    pub b: CMatrix,
    pub cond_pf: f64,
}

impl SmootherContext {
    pub fn k(&self) -> usize {
        self.subcarriers.len()
    }

    pub fn subcarriers(&self) -> &[f64] {
        &self.subcarriers
    }

    pub fn t_l(&self) -> f64 {
        self.l as f64 - 1.0
    }

    /// `j2πk_r/M`.
    pub fn ladder(&self, r: usize) -> Complex64 {
        Complex64::new(0.0, 2.0 * PI * self.subcarriers[r] / self.m as f64)
    }

    /// `f^{(n)}` at local time `τ = m + Mcp` (samples from the symbol start).
    pub fn f_deriv(&self, n: usize, tau: f64) -> Complex64 {
        (0..self.k())
            .map(|r| self.ladder(r).powu(n as u32) * Complex64::from_polar(1.0, 2.0 * PI * self.subcarriers[r] * tau / self.m as f64))
            .sum()
    }

    /// Window derivative at local time `τ`, zero outside `[0, T_L]`.
    pub fn window_deriv(&self, order: u32, tau: f64) -> f64 {
        let t_l = self.t_l();
        if tau < 0.0 || tau > t_l {
            return 0.0;
        }
        self.window.falling_derivative(order, tau, t_l).unwrap_or(0.0)
    }

    /// Basis signal `f̃_n(τ)`, zero outside the support.
    pub fn basis(&self, n: usize, tau: f64) -> Complex64 {
        let g = self.window_deriv(0, tau);
        if g == 0.0 && (tau < 0.0 || tau > self.t_l()) {
            return Complex64::new(0.0, 0.0);
        }
        self.f_deriv(n, tau) * g
    }

    /// Exact `order`-th derivative of `f̃_n` at `τ` inside the support.
    pub fn basis_exact_deriv(&self, n: usize, order: usize, tau: f64) -> Complex64 {
        (0..=order)
            .map(|j| self.f_deriv(n + order - j, tau) * (binomial(order, j) * self.window_deriv(j as u32, tau)))
            .sum()
    }

    /// Sampled `[f̃_0 … f̃_{cols-1}]` at the given local times.
    pub fn basis_matrix(&self, taus: &[f64], cols: usize) -> CMatrix {
        let k = self.k();
        let mut out = CMatrix::zeros(taus.len(), cols);
        let ladders: Vec<Complex64> = (0..k).map(|r| self.ladder(r)).collect();
        for (row, &tau) in taus.iter().enumerate() {
            let g = self.window_deriv(0, tau);
            if tau < 0.0 || tau > self.t_l() {
                continue;
            }
            let mut acc = vec![Complex64::new(0.0, 0.0); cols];
            for r in 0..k {
                let mut term = Complex64::from_polar(1.0, 2.0 * PI * self.subcarriers[r] * tau / self.m as f64);
                for a in acc.iter_mut() {
                    *a += term;
                    term *= ladders[r];
                }
            }
            for (c, a) in acc.into_iter().enumerate() {
                out[(row, c)] = a * g;
            }
        }
        out
    }

    /// Smoother coefficients `c = A·x_prev − B·x_cur`.
    pub fn coefficients(&self, x_prev: &[Complex64], x_cur: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check_data(x_prev, x_cur)?;
        Ok(coefficients_generic(
            self.a.as_slice(),
            self.b.as_slice(),
            self.n + 1,
            self.k(),
            x_prev,
            x_cur,
        ))
    }

    /// Smooth signal `w = Q_f·c` over its `L` samples.
    pub fn smooth(&self, x_prev: &[Complex64], x_cur: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check_data(x_prev, x_cur)?;
        Ok(synthesize_smooth_generic(
            self.a.as_slice(),
            self.b.as_slice(),
            self.qf.as_slice(),
            (self.n + 1, self.k(), self.l),
            x_prev,
            x_cur,
        ))
    }

    fn check_data(&self, x_prev: &[Complex64], x_cur: &[Complex64]) -> Result<()> {
        if x_prev.len() != self.k() || x_cur.len() != self.k() {
            return Err(Error::Dimension(format!(
                "data vectors of length {} and {}, expected K = {}",
                x_prev.len(),
                x_cur.len(),
                self.k()
            )));
        }
        Ok(())
    }

    /// Derivative mismatch between symbols at a junction, one entry per derivative
    /// order `0..=N`, each divided by `(2π/M)ⁿ·max|k|ⁿ·K`.
    ///
    /// `exact` selects true Leibniz derivatives of the basis signals; otherwise
    /// the ladder convention of [`BoundaryModel::Hankel`] is used.
    pub fn junction_residuals(&self, x_prev: &[Complex64], x_cur: &[Complex64], exact: bool) -> Result<Vec<f64>> {
        let c = self.coefficients(x_prev, x_cur)?;
        let kmax = self.subcarriers.iter().fold(0.0f64, |m, k| m.max(k.abs()));
        let start_phase: Vec<Complex64> = self
            .subcarriers
            .iter()
            .map(|&k| Complex64::from_polar(1.0, -2.0 * PI * k * self.mcp as f64 / self.m as f64))
            .collect();
        let mut out = Vec::with_capacity(self.n + 1);
        for order in 0..=self.n {
            let mut end_prev = Complex64::new(0.0, 0.0);
            let mut start_cur = Complex64::new(0.0, 0.0);
            for r in 0..self.k() {
                let p = self.ladder(r).powu(order as u32);
                end_prev += p * x_prev[r];
                start_cur += p * x_cur[r] * start_phase[r];
            }
            let w_deriv: Complex64 = (0..=self.n)
                .map(|nn| {
                    let d = if exact {
                        self.basis_exact_deriv(nn, order, 0.0)
                    } else {
                        self.basis(nn + order, 0.0)
                    };
                    c[nn] * d
                })
                .sum();
            let scale = (2.0 * PI / self.m as f64 * kmax).powi(order as i32) * self.k() as f64;
            out.push((end_prev - start_cur - w_deriv).norm() / scale);
        }
        Ok(out)
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `c = A·x_prev − B·x_cur` for any scalar type; `a`, `b` are row-major `n1×k`.
pub fn coefficients_generic<T>(a: &[T], b: &[T], n1: usize, k: usize, x_prev: &[T], x_cur: &[T]) -> Vec<T>
where
    T: Copy + Default + Add<Output = T> + Sub<Output = T> + Mul<Output = T>,
{
    (0..n1)
        .map(|n| {
            let mut acc = T::default();
            for r in 0..k {
                acc = acc + a[n * k + r] * x_prev[r];
                acc = acc - b[n * k + r] * x_cur[r];
            }
            acc
        })
        .collect()
}

/// Smooth-signal synthesis `Q_f·(A·x_prev − B·x_cur)` for any scalar type.
/// `dims = (N+1, K, L)`; matrices are row-major.
pub fn synthesize_smooth_generic<T>(a: &[T], b: &[T], qf: &[T], dims: (usize, usize, usize), x_prev: &[T], x_cur: &[T]) -> Vec<T>
where
    T: Copy + Default + Add<Output = T> + Sub<Output = T> + Mul<Output = T>,
{
    let (n1, k, l) = dims;
    let c = coefficients_generic(a, b, n1, k, x_prev, x_cur);
    (0..l)
        .map(|m| {
            let mut acc = T::default();
            for n in 0..n1 {
                acc = acc + qf[m * n1 + n] * c[n];
            }
            acc
        })
        .collect()
}

/// Build the smoother with the default Hankel boundary model.
pub fn build_smoother(cfg: &SystemConfig) -> Result<SmootherContext> {
    build_smoother_with(cfg, BoundaryModel::Hankel)
}

pub fn build_smoother_with(cfg: &SystemConfig, model: BoundaryModel) -> Result<SmootherContext> {
    cfg.validate()?;
    let n1 = cfg.n + 1;
    let k = cfg.k();
    let phi = cfg.phi();
    let mut ctx = SmootherContext {
        n: cfg.n,
        l: cfg.l,
        m: cfg.m,
        mcp: cfg.mcp,
        window: cfg.window,
        model,
        subcarriers: cfg.subcarriers.iter().map(|&k| k as f64).collect(),
        pf: CMatrix::zeros(n1, n1),
        p1: CMatrix::zeros(n1, k),
        p2: CMatrix::zeros(n1, k),
        phi: cfg
            .subcarriers
            .iter()
            .map(|&kr| Complex64::from_polar(1.0, phi * kr as f64))
            .collect(),
        qf: CMatrix::zeros(cfg.l, n1),
        a: CMatrix::zeros(n1, k),
        b: CMatrix::zeros(n1, k),
        cond_pf: 0.0,
    };
    ctx.pf = match model {
        BoundaryModel::Hankel => {
            let start: Vec<Complex64> = (0..2 * n1 - 1).map(|n| ctx.basis(n, 0.0)).collect();
            CMatrix::from_fn(n1, n1, |i, j| start[i + j])
        }
        BoundaryModel::Leibniz => CMatrix::from_fn(n1, n1, |i, j| ctx.basis_exact_deriv(j, i, 0.0)),
    };
    ctx.p1 = CMatrix::from_fn(n1, k, |n, r| ctx.ladder(r).powu(n as u32));
    ctx.p2 = ctx.p1.scale_cols(&ctx.phi)?;
    let name = format!("P_f (N={}, L={}, window={})", cfg.n, cfg.l, cfg.window.name());
    let sa = crate::numerics::matrix_solve_named(&ctx.pf, &ctx.p1, &name)?;
    let sb = crate::numerics::matrix_solve_named(&ctx.pf, &ctx.p2, &name)?;
    ctx.a = sa.x;
    ctx.b = sb.x;
    ctx.cond_pf = sa.cond;
    let taus: Vec<f64> = (0..cfg.l).map(|m| m as f64).collect();
    ctx.qf = ctx.basis_matrix(&taus, n1);
    Ok(ctx)
}

/// Sampled basis signal `f̃_ñ` over the `L` support samples, `ñ ≤ 2N`.
pub fn basis_signal(order: usize, cfg: &SystemConfig) -> Result<Vec<Complex64>> {
    if order > 2 * cfg.n {
        return Err(Error::Domain(format!("basis order {order} exceeds 2N = {}", 2 * cfg.n)));
    }
    let ctx = build_smoother(cfg)?;
    Ok((0..cfg.l).map(|m| ctx.basis(order, m as f64)).collect())
}

/// `w = Q_f·(A·x_prev − B·x_cur)`.
pub fn smooth_signal(x_prev: &[Complex64], x_cur: &[Complex64], ctx: &SmootherContext) -> Result<Vec<Complex64>> {
    ctx.smooth(x_prev, x_cur)
}

/// CP-OFDM modulator with a cached inverse DFT.
#[derive(Clone, Debug)]
pub struct OfdmModulator {
    plan: DftPlan,
    bins: Vec<usize>,
    mcp: usize,
}

impl OfdmModulator {
    pub fn new(cfg: &SystemConfig) -> Result<Self> {
        cfg.validate()?;
        let m = cfg.m as i64;
        Ok(Self {
            plan: DftPlan::new(cfg.m),
            bins: cfg.subcarriers.iter().map(|&k| k.rem_euclid(m) as usize).collect(),
            mcp: cfg.mcp,
        })
    }

    pub fn plan(&self) -> &DftPlan {
        &self.plan
    }

    /// DFT bin index of each active subcarrier.
    pub fn bins(&self) -> &[usize] {
        &self.bins
    }

    /// `y(m) = Σ x_r e^{j2πk_r m/M}` for `m = −Mcp … M−1`, CP first.
    pub fn modulate(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        if x.len() != self.bins.len() {
            return Err(Error::Dimension(format!(
                "{} data values for {} subcarriers",
                x.len(),
                self.bins.len()
            )));
        }
        let m = self.plan.size();
        let mut buf = vec![Complex64::new(0.0, 0.0); m];
        for (&bin, &v) in self.bins.iter().zip(x) {
            buf[bin] = v;
        }
        self.plan.inverse_in_place(&mut buf)?;
        let mut out = Vec::with_capacity(m + self.mcp);
        out.extend_from_slice(&buf[m - self.mcp..]);
        out.extend_from_slice(&buf);
        Ok(out)
    }
}

pub fn ofdm_modulate(x: &[Complex64], cfg: &SystemConfig) -> Result<Vec<Complex64>> {
    OfdmModulator::new(cfg)?.modulate(x)
}

/// Concatenate `ȳ_i = y_i + [w_i; 0]` for every data vector, then the
/// terminating smooth block driven by the last symbol alone.
pub fn assemble_stream(data: &[Vec<Complex64>], ctx: &SmootherContext, cfg: &SystemConfig) -> Result<Vec<Complex64>> {
    if data.is_empty() {
        return Err(Error::Dimension("stream needs at least one symbol".into()));
    }
    let modulator = OfdmModulator::new(cfg)?;
    let t = cfg.symbol_len();
    let zero = vec![Complex64::new(0.0, 0.0); cfg.k()];
    let mut out = Vec::with_capacity(data.len() * t + cfg.l);
    let mut prev = &zero;
    for x in data {
        let mut y = modulator.modulate(x)?;
        for (s, w) in y.iter_mut().zip(ctx.smooth(prev, x)?) {
            *s += w;
        }
        out.extend_from_slice(&y);
        prev = x;
    }
    out.extend(ctx.smooth(prev, &zero)?);
    Ok(out)
}
