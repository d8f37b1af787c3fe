//! Least-norm projection precoder used as the comparison baseline.
//!
//! This is a plain minimum-distance projection onto the continuity
//! constraints, not a reproduction of any published NC-OFDM precoder.

use std::ops::{Add, Mul};

use num_complex::Complex64;

use super::SystemConfig;
use crate::error::{Error, Result};
use crate::numerics::{solve, CMatrix};

/// Dense `K×K` operators of `x̄ = W·x + V·x̄_prev`, with
/// `W = I − P2ᴴ(P2P2ᴴ)⁻¹P2` and `V = P2ᴴ(P2P2ᴴ)⁻¹P1`.
#[derive(Clone, Debug)]
pub struct LeastNormPrecoder {
    pub w: CMatrix,
    pub v: CMatrix,
    k: usize,
}

impl LeastNormPrecoder {
    pub fn new(cfg: &SystemConfig) -> Result<Self> {
        cfg.validate()?;
        let k = cfg.k();
        let n1 = cfg.n + 1;
        if n1 > k {
            return Err(Error::Singular {
                matrix: format!("P2P2ᴴ ({n1} constraints on {k} subcarriers)"),
                cond: f64::INFINITY,
            });
        }
        let phi = cfg.phi();
        let m = cfg.m as f64;
        let p1 = CMatrix::from_fn(n1, k, |n, r| {
            Complex64::new(0.0, 2.0 * std::f64::consts::PI * cfg.subcarriers[r] as f64 / m).powu(n as u32)
        });
        let phases: Vec<Complex64> = cfg
            .subcarriers
            .iter()
            .map(|&kr| Complex64::from_polar(1.0, phi * kr as f64))
            .collect();
        let p2 = p1.scale_cols(&phases)?;
        let p2h = p2.adjoint();
        let gram = p2.matmul(&p2h)?;
        let gi_p2 = solve(&gram, &p2).map_err(|e| rename_singular(e, "P2P2ᴴ"))?.x;
        let gi_p1 = solve(&gram, &p1).map_err(|e| rename_singular(e, "P2P2ᴴ"))?.x;
        let w = CMatrix::identity(k).sub(&p2h.matmul(&gi_p2)?)?;
        let v = p2h.matmul(&gi_p1)?;
        Ok(Self { w, v, k })
    }

    pub fn precode(&self, x_prev: &[Complex64], x_cur: &[Complex64]) -> Result<Vec<Complex64>> {
        if x_prev.len() != self.k || x_cur.len() != self.k {
            return Err(Error::Dimension(format!("expected data of length {}", self.k)));
        }
        Ok(precode_generic(self.w.as_slice(), self.v.as_slice(), self.k, x_prev, x_cur))
    }
}

fn rename_singular(e: Error, name: &str) -> Error {
    match e {
        Error::Singular { cond, .. } => Error::Singular {
            matrix: name.to_string(),
            cond,
        },
        other => other,
    }
}

/// `W·x_cur + V·x_prev` for any scalar type; `w`, `v` row-major `k×k`.
pub fn precode_generic<T>(w: &[T], v: &[T], k: usize, x_prev: &[T], x_cur: &[T]) -> Vec<T>
where
    T: Copy + Default + Add<Output = T> + Mul<Output = T>,
{
    (0..k)
        .map(|i| {
            let mut acc = T::default();
            for j in 0..k {
                acc = acc + w[i * k + j] * x_cur[j];
                acc = acc + v[i * k + j] * x_prev[j];
            }
            acc
        })
        .collect()
}

/// Precoded symbol `x̄` nearest to `x_cur` whose head joins `x_prev`'s tail
/// N-continuously. `x_prev` is the previously transmitted (precoded) symbol.
pub fn baseline_least_norm_precoder(x_prev: &[Complex64], x_cur: &[Complex64], cfg: &SystemConfig) -> Result<Vec<Complex64>> {
    LeastNormPrecoder::new(cfg)?.precode(x_prev, x_cur)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn feasible_point_is_fixed_without_cp_phase() {
        let cfg = SystemConfig {
            subcarriers: SystemConfig::centered_subcarriers(16),
            m: 64,
            mcp: 0,
            ..SystemConfig::new(2, 8)
        };
        let x: Vec<Complex64> = (0..16).map(|i| Complex64::new(i as f64 * 0.1, 1.0 - i as f64 * 0.05)).collect();
        let out = baseline_least_norm_precoder(&x, &x, &cfg).unwrap();
        for (a, b) in out.iter().zip(&x) {
            assert!((a - b).norm() < 1e-12);
        }
    }
}
