//! Two-dimensional diffraction tomography.
//!
//! The crate covers the full chain from a scattering potential to its
//! reconstruction:
//!
//! * [`grid`], [`acquisition`], [`io`], [`noise`], [`metrics`]: shared data
//!   types, file formats, measurement noise and PSNR.
//! * [`phantom`]: disks, ellipses, hearts and polygons; potential/speed
//!   conversion; rotation.
//! * [`special`], [`greens`]: Bessel and Hankel functions, the outgoing
//!   Green's function and Born-series quadrature.
//! * [`helmholtz`]: finite-difference Helmholtz solver with a Robin absorbing
//!   boundary, plane-wave, point and line sources, dataset generation.
//! * [`fdt`]: Fourier diffraction theorem, k-space coverage, nonuniform DFT,
//!   CGNE inversion and Rytov preprocessing.
//! * [`fwi`]: adjoint-state full waveform inversion with frequency continuation.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acquisition;
pub mod error;
pub mod fdt;
mod fft;
pub mod fwi;
pub mod greens;
pub mod grid;
pub mod helmholtz;
pub mod io;
pub mod metrics;
pub mod noise;
pub mod phantom;
pub mod special;

pub use acquisition::{AcquisitionConfig, DataKind, Dataset, SourceGeometry, Trace};
pub use error::{Error, Result};
pub use grid::{ComplexField, Field, Grid, RealField};
pub use num_complex::Complex64;
