use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Symmetric Blackman window on `[0, 2·T_L]`, zero at both edges and 1 at `T_L`.
pub fn blackman(t: f64, t_l: f64) -> Result<f64> {
    blackman_derivative(0, t, t_l)
}

/// `order`-th analytic derivative of [`blackman`].
pub fn blackman_derivative(order: u32, t: f64, t_l: f64) -> Result<f64> {
    check_support(t, t_l)?;
    let w1 = PI / t_l;
    let w2 = 2.0 * PI / t_l;
    let shift = order as f64 * PI / 2.0;
    let mut v = -0.5 * w1.powi(order as i32) * (w1 * t + shift).cos() + 0.08 * w2.powi(order as i32) * (w2 * t + shift).cos();
    if order == 0 {
        v += 0.42;
    }
    Ok(v)
}

fn check_support(t: f64, t_l: f64) -> Result<()> {
    if !(t_l > 0.0) {
        return Err(Error::Domain(format!("window half-length must be positive, got {t_l}")));
    }
    // Allow rounding slop at the edges.
    let slop = 1e-12 * t_l;
    if t < -slop || t > 2.0 * t_l + slop || !t.is_finite() {
        return Err(Error::Domain(format!("t = {t} outside [0, {}]", 2.0 * t_l)));
    }
    Ok(())
}

/// Truncation window used for the smooth signal.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum WindowKind {
    #[default]
    Blackman,
    Hanning,
    Triangular,
}

impl WindowKind {
    /// Falling half of the symmetric window, `g(τ + T_L)` for `τ ∈ [0, T_L]`:
    /// 1 at `τ = 0`, 0 at `τ = T_L`.
    pub fn falling(self, tau: f64, t_l: f64) -> Result<f64> {
        self.falling_derivative(0, tau, t_l)
    }

    /// `order`-th derivative of [`WindowKind::falling`] with respect to `τ`.
    /// The triangular window reports its one-sided slope.
    pub fn falling_derivative(self, order: u32, tau: f64, t_l: f64) -> Result<f64> {
        if tau < -1e-12 * t_l || tau > t_l * (1.0 + 1e-12) {
            return Err(Error::Domain(format!("tau = {tau} outside [0, {t_l}]")));
        }
        match self {
            WindowKind::Blackman => blackman_derivative(order, tau + t_l, t_l),
            WindowKind::Hanning => {
                let w = PI / t_l;
                let mut v = -0.5 * w.powi(order as i32) * (w * (tau + t_l) + order as f64 * PI / 2.0).cos();
                if order == 0 {
                    v += 0.5;
                }
                Ok(v)
            }
            WindowKind::Triangular => Ok(match order {
                0 => 1.0 - tau / t_l,
                1 => -1.0 / t_l,
                _ => 0.0,
            }),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            WindowKind::Blackman => "blackman",
            WindowKind::Hanning => "hanning",
            WindowKind::Triangular => "triangular",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blackman_edges_and_peak() {
        assert!(blackman(0.0, 7.0).unwrap().abs() < 1e-15);
        assert!((blackman(7.0, 7.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(blackman(14.0, 7.0).unwrap().abs() < 1e-15);
    }

    #[test]
    fn blackman_second_derivative_at_far_edge() {
        let t_l = 999.0;
        let want = 0.18 * (PI / t_l).powi(2);
        let got = blackman_derivative(2, 2.0 * t_l, t_l).unwrap();
        assert!((got - want).abs() < 1e-12 * want);
    }

    #[test]
    fn blackman_support_is_enforced() {
        assert!(matches!(blackman(-0.5, 1.0), Err(Error::Domain(_))));
        assert!(matches!(blackman(2.5, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn falling_halves_run_from_one_to_zero() {
        for kind in [WindowKind::Blackman, WindowKind::Hanning, WindowKind::Triangular] {
            assert!((kind.falling(0.0, 100.0).unwrap() - 1.0).abs() < 1e-15);
            assert!(kind.falling(100.0, 100.0).unwrap().abs() < 1e-15);
        }
    }

    #[test]
    fn blackman_peak_curvature() {
        let t_l = 50.0;
        let d1 = WindowKind::Blackman.falling_derivative(1, 0.0, t_l).unwrap();
        let d2 = WindowKind::Blackman.falling_derivative(2, 0.0, t_l).unwrap();
        assert!(d1.abs() < 1e-15);
        assert!((d2 + 0.82 * (PI / t_l).powi(2)).abs() < 1e-15);
    }
}
