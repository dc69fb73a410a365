//! Fourier diffraction theorem and the reconstruction chain built on it.
//!
//! For a trace `u` measured on `x2 = r_M` at wavenumber `k0` and angle `alpha`,
//!
//! ```text
//! k0^2 F f_1(R_alpha (k1, kappa - k0)^T) = -i sqrt(2/pi) kappa exp(-i kappa r_M) F_1 u(k1)
//! ```
//!
//! for `|k1| < k0`. The samples are inverted with CGNE on the nonuniform DFT.

mod cgne;
mod coverage;
mod dft;
mod ndft;
mod rytov;

pub use cgne::{cgne, CgneResult};
pub use coverage::{
    band_contains, coverage_geometry, propagating_bins, semicircle_point, CoverageSet, KSpaceSample,
    EVANESCENT_CUTOFF,
};
pub use dft::{dft_frequencies, kappa, trace_dft, trace_dft_direct, Spectrum};
pub use ndft::{Ndft, NdftMethod};
pub use rytov::{rytov_dataset, rytov_to_born, unwrap_1d};

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::acquisition::{DataKind, Dataset, REFERENCE_OMEGA};
use crate::error::{ensure, Result};
use crate::grid::Grid;

/// k-space samples of a scattered or Born-equivalent dataset.
pub fn fdt_samples(data: &Dataset) -> Result<CoverageSet> {
    ensure!(
        matches!(data.kind, DataKind::Scattered | DataKind::BornEquivalent),
        "the diffraction theorem needs scattered or Born-equivalent data, got {:?}",
        data.kind
    );
    let acq = &data.acquisition;
    let angles = acq.angles();
    let l = acq.receiver_half_width;
    let r_m = acq.receiver_height;
    let pairs: Vec<(usize, usize)> =
        (0..acq.wavenumbers.len()).flat_map(|ki| (0..acq.n_angles).map(move |ai| (ki, ai))).collect();
    let blocks = pairs
        .par_iter()
        .map(|&(ki, ai)| {
            let k0 = acq.wavenumbers[ki];
            let alpha = angles[ai];
            let spec = trace_dft(data.trace(ki, ai), l)?;
            propagating_bins(k0, acq.receiver_count, l)
                .into_iter()
                .map(|(q, k1)| {
                    let kap = kappa(k1, k0)?;
                    let factor = Complex64::new(0.0, -(2.0 / PI).sqrt() * kap) * Complex64::from_polar(1.0, -kap * r_m);
                    Ok(KSpaceSample {
                        point: semicircle_point(k1, k0, alpha)?,
                        value: factor * spec.values[q],
                        angle: alpha,
                        k0,
                        bin: q as i64 - (acq.receiver_count / 2) as i64,
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CoverageSet { samples: blocks.into_iter().flatten().collect() })
}

/// Reconstruction settings for [`reconstruct`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReconstructionConfig {
    pub grid: Grid,
    pub iterations: usize,
    pub method: NdftMethod,
    /// Background speed; together with the reference frequency it fixes the
    /// wavenumber at which the potential is recovered.
    pub c0: f64,
}

/// CGNE reconstruction of the potential at the reference frequency. Each
/// sample is rescaled by `(k_ref / k0)^2` before the inversion.
pub fn reconstruct(samples: &CoverageSet, config: &ReconstructionConfig) -> Result<CgneResult> {
    ensure!(config.c0 > 0.0, "background speed must be positive");
    let k_ref = REFERENCE_OMEGA / config.c0;
    let b: Vec<Complex64> = samples.samples.iter().map(|s| s.value * (k_ref / s.k0).powi(2)).collect();
    let op = Ndft::new(config.grid, samples.points(), config.method)?;
    cgne(&op, &b, config.iterations)
}
