use num_complex::Complex64;

use crate::acquisition::Trace;
use crate::error::{ensure, Error, Result};
use crate::grid::{ComplexField, Grid};

/// Bilinear samples of `field` at `points`.
pub fn sample_points(field: &ComplexField, points: &[[f64; 2]]) -> Result<Vec<Complex64>> {
    points
        .iter()
        .map(|&p| {
            field.interpolate(p).ok_or_else(|| {
                Error::invalid(format!("receiver ({}, {}) lies outside the grid", p[0], p[1]))
            })
        })
        .collect()
}

/// Transpose of [`sample_points`]: spreads `values` onto the grid nodes.
pub fn spread_points(grid: &Grid, points: &[[f64; 2]], values: &[Complex64]) -> Result<Vec<Complex64>> {
    ensure!(points.len() == values.len(), "one value per point is required");
    let mut out = vec![Complex64::default(); grid.len()];
    for (&p, &v) in points.iter().zip(values) {
        let st = grid.bilinear_stencil(p).ok_or_else(|| {
            Error::invalid(format!("receiver ({}, {}) lies outside the grid", p[0], p[1]))
        })?;
        for (idx, w) in st {
            out[idx] += v * w;
        }
    }
    Ok(out)
}

/// Trace of `field` on the line `x2 = height`.
pub fn sample_receivers(field: &ComplexField, receiver_x: &[f64], height: f64) -> Result<Trace> {
    let pts: Vec<[f64; 2]> = receiver_x.iter().map(|&x| [x, height]).collect();
    Trace::new(receiver_x.to_vec(), height, sample_points(field, &pts)?)
}

/// Complex scale `alpha` minimising `|alpha u - exp(i k0 r_M)|^2` over the
/// central half of the receiver line.
pub fn calibrate_incident(incident: &Trace, k0: f64) -> Result<Complex64> {
    let reach = incident.receiver_x.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let ideal = Complex64::from_polar(1.0, k0 * incident.height);
    let mut num = Complex64::default();
    let mut den = 0.0;
    for (x, u) in incident.receiver_x.iter().zip(&incident.values) {
        if x.abs() <= 0.5 * reach + 1e-12 {
            num += u.conj() * ideal;
            den += u.norm_sqr();
        }
    }
    if !(den > 0.0) {
        return Err(Error::invalid("incident trace has zero power on the central receivers"));
    }
    Ok(num / den)
}

/// `alpha (u_tot - u_inc)`.
pub fn scattered_from_total(total: &ComplexField, incident: &ComplexField, alpha: Complex64) -> Result<ComplexField> {
    total.check_same_grid(incident)?;
    let vals = total.values().iter().zip(incident.values()).map(|(t, i)| alpha * (t - i)).collect();
    ComplexField::new(*total.grid(), vals)
}
