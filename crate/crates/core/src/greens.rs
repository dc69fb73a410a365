//! Outgoing Green's function of the 2-D Helmholtz operator and the Born
//! volume integral `u(x) = int G(x - y) f(y) u_inc(y) dy` evaluated by
//! midpoint quadrature on the grid of `f`.

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftDirection;

use crate::error::{ensure, Error, Result};
use crate::fft::Fft2;
use crate::grid::{ComplexField, RealField};
use crate::special::{hankel_h0_1, hankel_h1_1};

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreensKernel {
    k0: f64,
}

impl GreensKernel {
    pub fn new(k0: f64) -> Result<Self> {
        ensure!(k0.is_finite() && k0 > 0.0, "wavenumber must be positive, got {k0}");
        Ok(Self { k0 })
    }

    pub fn k0(&self) -> f64 {
        self.k0
    }

    /// `G(r) = (i/4) H0(k0 r)` for `r > 0`.
    pub fn at_distance(&self, r: f64) -> Result<Complex64> {
        if !(r > 0.0) {
            return Err(Error::invalid("Green's function is singular at the origin"));
        }
        Ok(0.25 * I * hankel_h0_1(self.k0 * r)?)
    }

    /// Mean of `G` over the disk of radius `rho` centred at the origin:
    /// `(i/4)(2/rho^2) [rho H1(k rho)/k + 2i/(pi k^2)]`.
    pub fn disk_average(&self, rho: f64) -> Result<Complex64> {
        ensure!(rho > 0.0, "averaging radius must be positive");
        let k = self.k0;
        let inner = rho * hankel_h1_1(k * rho)? / k + I * (2.0 / (std::f64::consts::PI * k * k));
        Ok(0.25 * I * (2.0 / (rho * rho)) * inner)
    }

    /// Average of `G` over a square cell of side `h`, approximated by the
    /// disk of equal area.
    pub fn cell_average(&self, h: f64) -> Result<Complex64> {
        self.disk_average(h / std::f64::consts::PI.sqrt())
    }
}

pub fn greens_2d(x: [f64; 2], k0: f64) -> Result<Complex64> {
    GreensKernel::new(k0)?.at_distance(x[0].hypot(x[1]))
}

/// Quadrature of the Born integral with plane-wave incidence `exp(i k0 y2)`,
/// evaluated at `points`.
///
/// Only nodes where `f != 0` contribute. A point closer than `h/2` to such a
/// node is rejected unless `self_cell` is set, in which case the singular
/// sample is replaced by the cell average of `G`.
pub fn born_convolution(
    f: &RealField,
    k0: f64,
    points: &[[f64; 2]],
    self_cell: bool,
) -> Result<Vec<Complex64>> {
    let kernel = GreensKernel::new(k0)?;
    let grid = *f.grid();
    let h = grid.spacing();
    let w = h * h;
    let support: Vec<([f64; 2], Complex64)> = f
        .values()
        .iter()
        .enumerate()
        .filter(|(_, &v)| v != 0.0)
        .map(|(idx, &v)| {
            let (i1, i2) = grid.unindex(idx);
            let y = grid.node(i1, i2);
            (y, v * Complex64::from_polar(w, k0 * y[1]))
        })
        .collect();
    let cell = kernel.cell_average(h)?;
    points
        .par_iter()
        .map(|&x| {
            let mut acc = Complex64::default();
            for &(y, s) in &support {
                let r = (x[0] - y[0]).hypot(x[1] - y[1]);
                let g = if r <= 0.5 * h {
                    if !self_cell {
                        return Err(Error::invalid(format!(
                            "evaluation point ({}, {}) lies within h/2 of the support",
                            x[0], x[1]
                        )));
                    }
                    cell
                } else {
                    kernel.at_distance(r)?
                };
                acc += g * s;
            }
            Ok(acc)
        })
        .collect()
}

/// Born series of order `order` on the nodes of `f`'s grid:
/// `u_1 = G * (f u_inc)`, `u_q = G * (f (u_inc + u_{q-1}))`, with
/// `u_inc = exp(i k0 x2)`. Convolutions run through a zero-padded FFT; the
/// self term uses the cell average of `G`.
pub fn born_iterate(f: &RealField, k0: f64, order: usize) -> Result<ComplexField> {
    ensure!(order >= 1, "Born order must be at least 1");
    let kernel = GreensKernel::new(k0)?;
    let grid = *f.grid();
    let n = grid.resolution();
    let h = grid.spacing();
    let m = 2 * n;

    // kernel samples h^2 G(d h) for offsets d in (-n, n), stored circularly
    let mut kern = vec![Complex64::default(); m * m];
    let cell = kernel.cell_average(h)?;
    for d2 in 0..m {
        for d1 in 0..m {
            let o1 = if d1 < n { d1 as f64 } else { d1 as f64 - m as f64 };
            let o2 = if d2 < n { d2 as f64 } else { d2 as f64 - m as f64 };
            let g = if d1 == 0 && d2 == 0 { cell } else { kernel.at_distance(h * o1.hypot(o2))? };
            kern[d2 * m + d1] = g * h * h;
        }
    }
    let forward = Fft2::new(m, FftDirection::Forward);
    let inverse = Fft2::new(m, FftDirection::Inverse);
    forward.process(&mut kern);

    let incident: Vec<Complex64> =
        (0..grid.len()).map(|idx| Complex64::from_polar(1.0, k0 * grid.node(0, grid.unindex(idx).1)[1])).collect();
    let mut u = vec![Complex64::default(); grid.len()];
    let mut buf = vec![Complex64::default(); m * m];
    for _ in 0..order {
        buf.iter_mut().for_each(|v| *v = Complex64::default());
        for i2 in 0..n {
            for i1 in 0..n {
                let idx = grid.index(i1, i2);
                buf[i2 * m + i1] = f.values()[idx] * (incident[idx] + u[idx]);
            }
        }
        forward.process(&mut buf);
        for (b, k) in buf.iter_mut().zip(&kern) {
            *b *= k;
        }
        inverse.process(&mut buf);
        let scale = 1.0 / (m * m) as f64;
        for i2 in 0..n {
            for i1 in 0..n {
                u[grid.index(i1, i2)] = buf[i2 * m + i1] * scale;
            }
        }
    }
    ComplexField::new(grid, u).map_err(|_| Error::numerical("Born iteration produced non-finite values"))
}
