use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Cached forward/inverse transforms of one size.
///
/// The forward transform carries the 1/M factor, the inverse none, so a
/// round trip is the identity and `forward` of an M-sample tone of unit
/// amplitude yields 1 in its bin.
#[derive(Clone)]
pub struct DftPlan {
    size: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for DftPlan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DftPlan").field("size", &self.size).finish()
    }
}

impl DftPlan {
    pub fn new(size: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            size,
            forward: planner.plan_fft_forward(size),
            inverse: planner.plan_fft_inverse(size),
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// In-place `X[k] = (1/M) Σ x[m] e^{-j2πkm/M}`.
    pub fn forward_in_place(&self, buf: &mut [Complex64]) -> Result<()> {
        self.check(buf.len())?;
        self.forward.process(buf);
        let scale = 1.0 / self.size as f64;
        for v in buf.iter_mut() {
            *v *= scale;
        }
        Ok(())
    }

    /// In-place `x[m] = Σ X[k] e^{j2πkm/M}`.
    pub fn inverse_in_place(&self, buf: &mut [Complex64]) -> Result<()> {
        self.check(buf.len())?;
        self.inverse.process(buf);
        Ok(())
    }

    pub fn forward(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        let mut buf = x.to_vec();
        self.forward_in_place(&mut buf)?;
        Ok(buf)
    }

    pub fn inverse(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        let mut buf = x.to_vec();
        self.inverse_in_place(&mut buf)?;
        Ok(buf)
    }

    fn check(&self, len: usize) -> Result<()> {
        if len != self.size {
            return Err(Error::Dimension(format!("buffer of {len} samples for a {}-point DFT", self.size)));
        }
        Ok(())
    }
}

/// One-shot forward DFT with 1/size normalization.
pub fn dft(x: &[Complex64], size: usize) -> Result<Vec<Complex64>> {
    DftPlan::new(size).forward(x)
}

/// One-shot inverse DFT without scaling.
pub fn idft(x: &[Complex64], size: usize) -> Result<Vec<Complex64>> {
    DftPlan::new(size).inverse(x)
}
