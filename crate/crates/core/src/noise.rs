//! White Gaussian measurement noise.
//!
//! Noise samples come from ChaCha20 (`rand_chacha::ChaCha20Rng`, seeded with
//! `seed_from_u64`) pushed through the Box-Muller transform: each pair of
//! 53-bit uniforms `u1 in (0, 1]`, `u2 in [0, 1)` yields one complex sample
//! `sqrt(-2 ln u1) * (cos 2 pi u2, sin 2 pi u2)`. Both choices are fixed so
//! that a given seed reproduces the same noise everywhere.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::acquisition::Trace;
use crate::error::{ensure, Result};

/// Deterministic source of circular complex Gaussian samples with unit variance.
pub struct GaussianSource {
    rng: ChaCha20Rng,
}

impl GaussianSource {
    pub fn new(seed: u64) -> Self {
        Self { rng: ChaCha20Rng::seed_from_u64(seed) }
    }

    fn unit_open_closed(&mut self) -> f64 {
        ((self.rng.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    fn unit_closed_open(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Complex sample with `E|z|^2 = 1`.
    pub fn complex(&mut self) -> Complex64 {
        let r = (-2.0 * self.unit_open_closed().ln()).sqrt();
        let t = 2.0 * PI * self.unit_closed_open();
        Complex64::new(r * t.cos(), r * t.sin()) * std::f64::consts::FRAC_1_SQRT_2
    }

    /// Uniform sample in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.unit_closed_open()
    }

    pub fn real(&mut self) -> f64 {
        let r = (-2.0 * self.unit_open_closed().ln()).sqrt();
        r * (2.0 * PI * self.unit_closed_open()).cos()
    }
}

/// Adds circular complex Gaussian noise of power `P_signal * 10^(-snr/10)`.
pub fn add_noise(trace: &Trace, snr_db: f64, seed: u64) -> Result<Trace> {
    ensure!(snr_db.is_finite(), "SNR must be finite");
    ensure!(!trace.is_empty(), "cannot add noise to an empty trace");
    let power = trace.power();
    ensure!(power > 0.0, "SNR is undefined for an all-zero trace");
    let sigma = (power * 10f64.powf(-snr_db / 10.0)).sqrt();
    let mut src = GaussianSource::new(seed);
    let values = trace.values.iter().map(|v| v + src.complex() * sigma).collect();
    Ok(trace.with_values(values))
}

/// Seed for trace `index` of a dataset generated with `seed` (SplitMix64 step).
pub fn trace_seed(seed: u64, index: usize) -> u64 {
    let mut z = seed.wrapping_add((index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
