//! Nonuniform DFT `v(y) = (2 pi)^-1 h^2 sum_x f(x) exp(-i x . y)` from grid
//! nodes `x` to arbitrary frequencies `y`, and its adjoint.
//!
//! Two evaluation paths:
//!
//! * direct summation, factorised per point as `b^T F a` with
//!   `a_i = exp(-i x_i y1)`, `b_i = exp(-i x_i y2)`;
//! * Gaussian gridding: deconvolve, oversampled FFT (factor 2), then
//!   interpolate with a truncated periodic Gaussian of `2 * SPREAD` taps per
//!   axis and width `tau = pi SPREAD / (N^2 R (R - 1/2))`. The adjoint runs the
//!   transposed steps in reverse order.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftDirection;
use serde::{Deserialize, Serialize};

use crate::error::{ensure, Result};
use crate::fft::Fft2;
use crate::grid::Grid;

const OVERSAMPLING: usize = 2;
const SPREAD: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NdftMethod {
    #[default]
    Direct,
    Gridding,
}

/// NDFT between the nodes of `grid` and a fixed list of frequencies.
pub struct Ndft {
    grid: Grid,
    points: Vec<[f64; 2]>,
    method: NdftMethod,
    scale: f64,
    // direct path: per-point 1-D phase vectors
    phase1: Vec<Complex64>,
    phase2: Vec<Complex64>,
    gridding: Option<Gridding>,
}

struct Gridding {
    size: usize,
    tau: f64,
    deconv: Vec<f64>,
    forward: Fft2,
    inverse: Fft2,
}

impl std::fmt::Debug for Gridding {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Gridding").field("size", &self.size).field("tau", &self.tau).finish()
    }
}

impl std::fmt::Debug for Ndft {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Ndft")
            .field("grid", &self.grid)
            .field("points", &self.points.len())
            .field("method", &self.method)
            .finish()
    }
}

impl Ndft {
    pub fn new(grid: Grid, points: Vec<[f64; 2]>, method: NdftMethod) -> Result<Self> {
        ensure!(points.iter().flatten().all(|v| v.is_finite()), "non-finite frequency");
        let n = grid.resolution();
        let h = grid.spacing();
        let coords = grid.coords();
        let (phase1, phase2) = if method == NdftMethod::Direct {
            let mut p1 = Vec::with_capacity(points.len() * n);
            let mut p2 = Vec::with_capacity(points.len() * n);
            for y in &points {
                p1.extend(coords.iter().map(|&x| Complex64::from_polar(1.0, -x * y[0])));
                p2.extend(coords.iter().map(|&x| Complex64::from_polar(1.0, -x * y[1])));
            }
            (p1, p2)
        } else {
            (Vec::new(), Vec::new())
        };
        let gridding = (method == NdftMethod::Gridding).then(|| {
            let size = OVERSAMPLING * n;
            let r = OVERSAMPLING as f64;
            let tau = PI * SPREAD as f64 / ((n * n) as f64 * r * (r - 0.5));
            // Fourier coefficient of the periodic Gaussian: sqrt(tau/pi) exp(-k^2 tau)
            let deconv = (0..n)
                .map(|j| {
                    let k = j as f64 - (n / 2) as f64;
                    (PI / tau).sqrt() * (k * k * tau).exp()
                })
                .collect();
            Gridding {
                size,
                tau,
                deconv,
                forward: Fft2::new(size, FftDirection::Forward),
                inverse: Fft2::new(size, FftDirection::Inverse),
            }
        });
        Ok(Self { grid, points, method, scale: h * h / (2.0 * PI), phase1, phase2, gridding })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn points(&self) -> &[[f64; 2]] {
        &self.points
    }

    pub fn method(&self) -> NdftMethod {
        self.method
    }

    pub fn forward(&self, f: &[Complex64]) -> Result<Vec<Complex64>> {
        ensure!(f.len() == self.grid.len(), "field has the wrong length");
        Ok(match &self.gridding {
            None => self.forward_direct(f),
            Some(g) => self.forward_gridding(g, f),
        })
    }

    pub fn adjoint(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        ensure!(v.len() == self.points.len(), "one value per frequency is required");
        Ok(match &self.gridding {
            None => self.adjoint_direct(v),
            Some(g) => self.adjoint_gridding(g, v),
        })
    }

    fn forward_direct(&self, f: &[Complex64]) -> Vec<Complex64> {
        let n = self.grid.resolution();
        (0..self.points.len())
            .into_par_iter()
            .map(|p| {
                let a = &self.phase1[p * n..(p + 1) * n];
                let b = &self.phase2[p * n..(p + 1) * n];
                let mut acc = Complex64::default();
                for (row, &bi) in f.chunks_exact(n).zip(b) {
                    let s: Complex64 = row.iter().zip(a).map(|(u, w)| u * w).sum();
                    acc += s * bi;
                }
                acc * self.scale
            })
            .collect()
    }

    fn adjoint_direct(&self, v: &[Complex64]) -> Vec<Complex64> {
        let n = self.grid.resolution();
        let mut out = vec![Complex64::default(); self.grid.len()];
        out.par_chunks_mut(n).enumerate().for_each(|(i2, row)| {
            for (p, &vp) in v.iter().enumerate() {
                let c = vp * self.phase2[p * n + i2].conj() * self.scale;
                for (o, w) in row.iter_mut().zip(&self.phase1[p * n..(p + 1) * n]) {
                    *o += c * w.conj();
                }
            }
        });
        out
    }

    /// Taps of the interpolation kernel along one axis: oversampled-grid
    /// indices and Gaussian weights.
    fn taps(&self, g: &Gridding, theta: f64) -> ([usize; 2 * SPREAD], [f64; 2 * SPREAD]) {
        let size = g.size as f64;
        let step = 2.0 * PI / size;
        let centre = (theta / step).floor() as i64;
        let mut idx = [0usize; 2 * SPREAD];
        let mut w = [0.0; 2 * SPREAD];
        for t in 0..2 * SPREAD {
            let m = centre - SPREAD as i64 + 1 + t as i64;
            let d = theta - step * m as f64;
            idx[t] = m.rem_euclid(g.size as i64) as usize;
            w[t] = (-d * d / (4.0 * g.tau)).exp();
        }
        (idx, w)
    }

    fn forward_gridding(&self, g: &Gridding, f: &[Complex64]) -> Vec<Complex64> {
        let n = self.grid.resolution();
        let size = g.size;
        let h = self.grid.spacing();
        let mut buf = vec![Complex64::default(); size * size];
        for j2 in 0..n {
            let m2 = (j2 as i64 - (n / 2) as i64).rem_euclid(size as i64) as usize;
            for j1 in 0..n {
                let m1 = (j1 as i64 - (n / 2) as i64).rem_euclid(size as i64) as usize;
                buf[m2 * size + m1] = f[j2 * n + j1] * g.deconv[j1] * g.deconv[j2];
            }
        }
        g.forward.process(&mut buf);
        let norm = self.scale / (size * size) as f64;
        self.points
            .par_iter()
            .map(|y| {
                let (i1, w1) = self.taps(g, h * y[0]);
                let (i2, w2) = self.taps(g, h * y[1]);
                let mut acc = Complex64::default();
                for (&r, &wr) in i2.iter().zip(&w2) {
                    let row = &buf[r * size..(r + 1) * size];
                    let s: Complex64 = i1.iter().zip(&w1).map(|(&c, &wc)| row[c] * wc).sum();
                    acc += s * wr;
                }
                acc * norm
            })
            .collect()
    }

    fn adjoint_gridding(&self, g: &Gridding, v: &[Complex64]) -> Vec<Complex64> {
        let n = self.grid.resolution();
        let size = g.size;
        let h = self.grid.spacing();
        let norm = self.scale / (size * size) as f64;
        let mut buf = vec![Complex64::default(); size * size];
        for (y, &val) in self.points.iter().zip(v) {
            let (i1, w1) = self.taps(g, h * y[0]);
            let (i2, w2) = self.taps(g, h * y[1]);
            for (&r, &wr) in i2.iter().zip(&w2) {
                let c0 = val * (wr * norm);
                for (&c, &wc) in i1.iter().zip(&w1) {
                    buf[r * size + c] += c0 * wc;
                }
            }
        }
        g.inverse.process(&mut buf);
        let mut out = vec![Complex64::default(); self.grid.len()];
        for j2 in 0..n {
            let m2 = (j2 as i64 - (n / 2) as i64).rem_euclid(size as i64) as usize;
            for j1 in 0..n {
                let m1 = (j1 as i64 - (n / 2) as i64).rem_euclid(size as i64) as usize;
                out[j2 * n + j1] = buf[m2 * size + m1] * g.deconv[j1] * g.deconv[j2];
            }
        }
        out
    }
}
