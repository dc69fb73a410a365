//! 8-bit binary PGM export.
//!
//! A value `v` maps to `round(255 (v - lo) / (hi - lo))`, clamped to
//! `0..=255`, with ties rounded up; on `[-1, 1]` zero becomes 128. A
//! constant field (`lo == hi`) renders as uniform 128. Rows run from the
//! largest `x2` at the top to the smallest at the bottom.

use difftomo::RealField;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RenderOptions {
    /// Side of the centred square to render; the whole grid by default.
    pub window: Option<f64>,
    /// Value range mapped to black and white; the data range by default.
    pub range: Option<(f64, f64)>,
}

/// Gray level of `v` on `[lo, hi]`.
pub fn gray_level(v: f64, lo: f64, hi: f64) -> u8 {
    if hi <= lo {
        return 128;
    }
    let t = 255.0 * (v - lo) / (hi - lo);
    (t + 0.5).floor().clamp(0.0, 255.0) as u8
}

pub fn render_pgm(field: &RealField, options: RenderOptions) -> CliResult<Vec<u8>> {
    let grid = field.grid();
    let mask = grid.window_mask(options.window)?;
    let n = grid.resolution();
    let inside: Vec<usize> = (0..n).filter(|&i| mask[grid.index(i, n / 2)]).collect();
    let (first, last) = match (inside.first(), inside.last()) {
        (Some(&a), Some(&b)) => (a, b),
        _ => return Err(CliError::Validation("render window contains no nodes".into())),
    };
    let (lo, hi) = match options.range {
        Some((lo, hi)) => {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(CliError::Validation(format!("invalid value range [{lo}, {hi}]")));
            }
            (lo, hi)
        }
        None => {
            let vals = field.values().iter().zip(&mask).filter(|(_, &m)| m).map(|(v, _)| *v);
            vals.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)))
        }
    };
    let side = last - first + 1;
    let mut out = format!("P5\n{side} {side}\n255\n").into_bytes();
    for i2 in (first..=last).rev() {
        for i1 in first..=last {
            out.push(gray_level(field.at(i1, i2), lo, hi));
        }
    }
    Ok(out)
}
