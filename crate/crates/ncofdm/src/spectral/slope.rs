use super::PsdEstimate;
use crate::error::{Error, Result};

/// Least-squares slope of `values_db` against `log10(f − band_edge)` over
/// grid points in `[f_lo, f_hi]` above the upper band edge, in dB/decade.
pub fn fit_slope(psd: &PsdEstimate, f_lo_hz: f64, f_hi_hz: f64) -> Result<f64> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = psd
        .freqs_hz
        .iter()
        .zip(&psd.values_db)
        .filter(|(&f, _)| f >= f_lo_hz && f <= f_hi_hz && f > psd.band_edge_hz)
        .map(|(&f, &v)| ((f - psd.band_edge_hz).log10(), v))
        .unzip();
    if xs.len() < 10 {
        return Err(Error::Dimension(format!(
            "slope fit needs at least 10 points above the band edge, found {}",
            xs.len()
        )));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Degenerate("all fit points share one frequency".into()));
    }
    Ok(sxy / sxx)
}
