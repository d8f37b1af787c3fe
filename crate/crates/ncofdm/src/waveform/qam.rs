use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};

/// Gray-labelled square QAM with unit average energy.
#[derive(Clone, Debug)]
pub struct QamConstellation {
    order: usize,
    side: usize,
    bits_per_axis: usize,
    scale: f64,
    points: Vec<Complex64>,
}

impl QamConstellation {
    pub fn new(order: usize) -> Result<Self> {
        let bits = order.trailing_zeros() as usize;
        if order < 4 || !order.is_power_of_two() || bits % 2 != 0 {
            return Err(Error::Config(format!("QAM order {order} is not a square power of two")));
        }
        let side = 1usize << (bits / 2);
        // Mean energy of a side×side grid with levels ±1, ±3, … is 2(side²−1)/3.
        let scale = (1.5 / (order as f64 - 1.0)).sqrt();
        let mut c = Self {
            order,
            side,
            bits_per_axis: bits / 2,
            scale,
            points: Vec::new(),
        };
        c.points = (0..order).map(|label| c.point(label)).collect();
        Ok(c)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn bits_per_symbol(&self) -> usize {
        2 * self.bits_per_axis
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    fn level(&self, gray: usize) -> f64 {
        // Gray to binary, then binary index to amplitude level.
        let mut b = gray;
        let mut shift = gray >> 1;
        while shift != 0 {
            b ^= shift;
            shift >>= 1;
        }
        (2 * b) as f64 - (self.side - 1) as f64
    }

    /// Point for a label whose high half selects I and low half selects Q.
    pub fn point(&self, label: usize) -> Complex64 {
        let i = label >> self.bits_per_axis;
        let q = label & (self.side - 1);
        Complex64::new(self.level(i), self.level(q)) * self.scale
    }

    /// Nearest-point label (hard decision).
    pub fn decide(&self, v: Complex64) -> usize {
        let axis = |x: f64| -> usize {
            let b = ((x / self.scale + (self.side - 1) as f64) / 2.0).round();
            let b = b.clamp(0.0, (self.side - 1) as f64) as usize;
            b ^ (b >> 1)
        };
        (axis(v.re) << self.bits_per_axis) | axis(v.im)
    }

    pub fn random_label<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        rng.random_range(0..self.order)
    }
}

/// Map a bit stream (MSB first within each symbol) onto QAM points.
pub fn qam_map(bits: &[u8], order: usize) -> Result<Vec<Complex64>> {
    let c = QamConstellation::new(order)?;
    let per = c.bits_per_symbol();
    if bits.len() % per != 0 {
        return Err(Error::Dimension(format!("{} bits do not split into {per}-bit symbols", bits.len())));
    }
    Ok(bits
        .chunks(per)
        .map(|chunk| c.point(chunk.iter().fold(0usize, |acc, &b| (acc << 1) | (b & 1) as usize)))
        .collect())
}

/// Hard-decision demapping back to bits.
pub fn qam_demap(symbols: &[Complex64], order: usize) -> Result<Vec<u8>> {
    let c = QamConstellation::new(order)?;
    let per = c.bits_per_symbol();
    let mut bits = Vec::with_capacity(symbols.len() * per);
    for &s in symbols {
        let label = c.decide(s);
        for shift in (0..per).rev() {
            bits.push(((label >> shift) & 1) as u8);
        }
    }
    Ok(bits)
}

pub fn random_bits<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<u8> {
    (0..n).map(|_| rng.random_range(0..2u8)).collect()
}

/// `count` uniformly drawn constellation points.
pub fn random_symbols<R: Rng + ?Sized>(c: &QamConstellation, count: usize, rng: &mut R) -> Vec<Complex64> {
    (0..count).map(|_| c.point(c.random_label(rng))).collect()
}
