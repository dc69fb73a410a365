//! k-space samples `y = R_alpha (k1, kappa - k0)^T` and coverage geometry.

use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::dft::{dft_frequencies, kappa};
use crate::acquisition::rotate;
use crate::error::Result;

/// Bins with `|k1| >= k0 (1 - EVANESCENT_CUTOFF)` are dropped.
pub const EVANESCENT_CUTOFF: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KSpaceSample {
    pub point: [f64; 2],
    /// `k0^2 F f_1(point)`, i.e. the spectrum of the potential at `k0`.
    pub value: Complex64,
    pub angle: f64,
    pub k0: f64,
    /// DFT bin `q`, with `k1 = q pi / l_M`.
    pub bin: i64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CoverageSet {
    pub samples: Vec<KSpaceSample>,
}

impl CoverageSet {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn points(&self) -> Vec<[f64; 2]> {
        self.samples.iter().map(|s| s.point).collect()
    }

    pub fn max_norm(&self) -> f64 {
        self.samples.iter().map(|s| s.point[0].hypot(s.point[1])).fold(0.0, f64::max)
    }

    /// Fraction of the cells of side `cell` whose centre lies in the disk of
    /// radius `radius` and that contain at least one sample.
    pub fn disk_fill_fraction(&self, radius: f64, cell: f64) -> f64 {
        let n = (radius / cell).ceil() as i64;
        let side = (2 * n) as usize;
        let mut hit = vec![false; side * side];
        for s in &self.samples {
            let i = (s.point[0] / cell).floor() as i64 + n;
            let j = (s.point[1] / cell).floor() as i64 + n;
            if (0..2 * n).contains(&i) && (0..2 * n).contains(&j) {
                hit[j as usize * side + i as usize] = true;
            }
        }
        let (mut inside, mut filled) = (0usize, 0usize);
        for j in 0..side {
            for i in 0..side {
                let c = [(i as f64 - n as f64 + 0.5) * cell, (j as f64 - n as f64 + 0.5) * cell];
                if c[0].hypot(c[1]) <= radius {
                    inside += 1;
                    filled += hit[j * side + i] as usize;
                }
            }
        }
        if inside == 0 {
            0.0
        } else {
            filled as f64 / inside as f64
        }
    }

    /// CSV with columns `y1,y2,re,im,alpha,k0`.
    pub fn write_csv(&self, mut out: impl Write) -> Result<()> {
        writeln!(out, "y1,y2,re,im,alpha,k0")?;
        for s in &self.samples {
            writeln!(
                out,
                "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
                s.point[0], s.point[1], s.value.re, s.value.im, s.angle, s.k0
            )?;
        }
        Ok(())
    }
}

/// DFT bins that satisfy the evanescent cutoff for `k0`.
pub fn propagating_bins(k0: f64, receiver_count: usize, half_width: f64) -> Vec<(usize, f64)> {
    dft_frequencies(receiver_count, half_width)
        .into_iter()
        .enumerate()
        .filter(|(_, k1)| k1.abs() < k0 * (1.0 - EVANESCENT_CUTOFF))
        .collect()
}

/// `R_alpha (k1, kappa(k1) - k0)^T`.
pub fn semicircle_point(k1: f64, k0: f64, alpha: f64) -> Result<[f64; 2]> {
    Ok(rotate(alpha, [k1, kappa(k1, k0)? - k0]))
}

/// Sample positions for all wavenumbers, angles and propagating bins (values zero).
pub fn coverage_geometry(wavenumbers: &[f64], angles: &[f64], receiver_count: usize, half_width: f64) -> Result<CoverageSet> {
    let mut samples = Vec::new();
    for &k0 in wavenumbers {
        let bins = propagating_bins(k0, receiver_count, half_width);
        for &alpha in angles {
            for &(q, k1) in &bins {
                samples.push(KSpaceSample {
                    point: semicircle_point(k1, k0, alpha)?,
                    value: Complex64::default(),
                    angle: alpha,
                    k0,
                    bin: q as i64 - (receiver_count / 2) as i64,
                });
            }
        }
    }
    Ok(CoverageSet { samples })
}

/// Membership in the coverage of unrotated experiments with wavenumbers
/// `[k_min, k_max]`:
/// `|y1| <= k_max` and
/// `sqrt(k_max^2 - y1^2) - k_max >= y2 >= { -|y1|                       if |y1| >= k_min
///                                        { sqrt(k_min^2 - y1^2) - k_min otherwise`.
pub fn band_contains(y: [f64; 2], k_min: f64, k_max: f64) -> bool {
    let a = y[0].abs();
    if a > k_max {
        return false;
    }
    let upper = (k_max * k_max - a * a).sqrt() - k_max;
    let lower = if a >= k_min { -a } else { (k_min * k_min - a * a).sqrt() - k_min };
    upper >= y[1] && y[1] >= lower
}
