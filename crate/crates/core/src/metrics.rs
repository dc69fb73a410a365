//! Reconstruction quality metrics.

use crate::error::{ensure, Error, Result};
use crate::grid::RealField;

/// Peak signal-to-noise ratio `10 log10(max|f|^2 / mean (f - g)^2)` in dB.
///
/// With `window = Some(side)` both the peak and the mean are taken over the
/// nodes of the centred square of that side length.
pub fn psnr(reference: &RealField, candidate: &RealField, window: Option<f64>) -> Result<f64> {
    reference.check_same_grid(candidate)?;
    let mask = reference.grid().window_mask(window)?;
    let mut peak: f64 = 0.0;
    let mut sum = 0.0;
    let mut count = 0usize;
    for ((f, g), inside) in reference.values().iter().zip(candidate.values()).zip(&mask) {
        if *inside {
            peak = peak.max(f.abs());
            sum += (f - g) * (f - g);
            count += 1;
        }
    }
    ensure!(count > 0, "PSNR evaluation window contains no nodes");
    if sum == 0.0 {
        return Err(Error::numerical("PSNR undefined: zero MSE"));
    }
    let mse = sum / count as f64;
    Ok(10.0 * (peak * peak / mse).log10())
}

/// Relative L2 distance `||a - b|| / ||a||`.
pub fn relative_l2(reference: &[f64], candidate: &[f64]) -> f64 {
    let num: f64 = reference.iter().zip(candidate).map(|(a, b)| (a - b).powi(2)).sum();
    let den: f64 = reference.iter().map(|a| a * a).sum();
    (num / den).sqrt()
}
