//! WebAssembly bindings for the demo page in `www/`.
//!
//! Every entry point takes plain numbers and returns flat `f64` arrays so the
//! page needs no glue beyond the generated module. Frequencies are given as
//! `omega / 2 pi` with `c0 = 1`.

use std::f64::consts::PI;

use difftomo::fdt::{coverage_geometry, reconstruct, CoverageSet, NdftMethod, ReconstructionConfig};
use difftomo::greens::born_iterate;
use difftomo::metrics::psnr;
use difftomo::phantom::disk_potential;
use difftomo::special::bessel_j1;
use difftomo::{Complex64, Grid};
use wasm_bindgen::prelude::*;

fn js_error(e: impl std::fmt::Display) -> JsError {
    JsError::new(&e.to_string())
}

fn angles(n: usize) -> Vec<f64> {
    (0..n).map(|j| 2.0 * PI * j as f64 / n as f64).collect()
}

/// k-space sample positions `[y1, y2, y1, y2, ...]` of a full turn of
/// `n_angles` experiments at every frequency in `frequencies`.
#[wasm_bindgen]
pub fn coverage(frequencies: &[f64], n_angles: usize, receiver_count: usize, half_width: f64) -> Result<Vec<f64>, JsError> {
    let wavenumbers: Vec<f64> = frequencies.iter().map(|f| 2.0 * PI * f).collect();
    let set = coverage_geometry(&wavenumbers, &angles(n_angles), receiver_count, half_width).map_err(js_error)?;
    Ok(set.samples.iter().flat_map(|s| s.point).collect())
}

/// A reconstructed image on an `n x n` grid, rows from the smallest `x2`.
#[wasm_bindgen]
pub struct Image {
    n: usize,
    half_width: f64,
    values: Vec<f64>,
    psnr: f64,
}

#[wasm_bindgen]
impl Image {
    #[wasm_bindgen(getter)]
    pub fn n(&self) -> usize {
        self.n
    }

    #[wasm_bindgen(getter)]
    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    #[wasm_bindgen(getter)]
    pub fn values(&self) -> Vec<f64> {
        self.values.clone()
    }

    /// PSNR against the true disk in dB; NaN when undefined.
    #[wasm_bindgen(getter)]
    pub fn psnr(&self) -> f64 {
        self.psnr
    }
}

/// Fourier transform `amp a J1(a |y|) / |y|` of the disk of radius `a`.
fn disk_spectrum(radius: f64, amplitude: f64, y: [f64; 2]) -> f64 {
    let r = y[0].hypot(y[1]);
    if r < 1e-12 {
        amplitude * radius * radius / 2.0
    } else {
        amplitude * radius * bessel_j1(radius * r) / r
    }
}

/// CGNE reconstruction of a disk from its exact spectrum sampled on the
/// coverage of `n_angles` experiments at frequency `frequency`, with
/// receivers on `[-10, 10]` and the image on `[-10, 10]^2`.
#[wasm_bindgen]
pub fn reconstruct_disk(
    radius: f64,
    amplitude: f64,
    frequency: f64,
    n_angles: usize,
    iterations: usize,
    n: usize,
) -> Result<Image, JsError> {
    let half_width = 10.0;
    let k0 = 2.0 * PI * frequency;
    let mut set: CoverageSet = coverage_geometry(&[k0], &angles(n_angles), 200, half_width).map_err(js_error)?;
    // the samples hold the potential at the frequency of the experiment;
    // `reconstruct` maps them back to the reference frequency
    let scale = frequency * frequency;
    for s in &mut set.samples {
        s.value = Complex64::new(scale * disk_spectrum(radius, amplitude, s.point), 0.0);
    }
    let grid = Grid::new(half_width, n).map_err(js_error)?;
    let config = ReconstructionConfig { grid, iterations, method: NdftMethod::Gridding, c0: 1.0 };
    let field = reconstruct(&set, &config).map_err(js_error)?.field;
    let truth = disk_potential(radius, amplitude, &grid).map_err(js_error)?;
    let psnr = psnr(&truth, &field, None).unwrap_or(f64::NAN);
    Ok(Image { n, half_width, values: field.into_values(), psnr })
}

/// First-order Born scattered field of a disk under the plane wave
/// `exp(i k0 x2)` on an `n x n` grid of half-width `half_width`, as
/// `[re, im, re, im, ...]`.
#[wasm_bindgen]
pub fn born_field(radius: f64, amplitude: f64, frequency: f64, half_width: f64, n: usize) -> Result<Vec<f64>, JsError> {
    let grid = Grid::new(half_width, n).map_err(js_error)?;
    let k0 = 2.0 * PI * frequency;
    let f = disk_potential(radius, amplitude * frequency * frequency, &grid).map_err(js_error)?;
    let u = born_iterate(&f, k0, 1).map_err(js_error)?;
    Ok(u.values().iter().flat_map(|z| [z.re, z.im]).collect())
}
