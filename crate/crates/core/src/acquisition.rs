//! Acquisition geometry, receiver traces and multi-angle datasets.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{ensure, Result};

/// Angular frequency at which potentials are specified (`omega / 2 pi = 1`).
pub const REFERENCE_OMEGA: f64 = 2.0 * PI;

/// Rotation by `alpha`: `(x1 cos a - x2 sin a, x1 sin a + x2 cos a)`.
#[inline]
pub fn rotate(alpha: f64, x: [f64; 2]) -> [f64; 2] {
    let (s, c) = alpha.sin_cos();
    [c * x[0] - s * x[1], s * x[0] + c * x[1]]
}

/// Sources that illuminate the object, in the unrotated frame where the
/// incident field travels along `+x2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SourceGeometry {
    /// Ideal plane wave `exp(i k0 x2)`; data are generated from the
    /// scattered-field equation with contrast source `f exp(i k0 x2)`.
    PlaneWave,
    Point { position: [f64; 2] },
    /// `count` equispaced point sources on `x2 = height`, `|x1| <= half_length`.
    Line { height: f64, half_length: f64, count: usize },
    Points { positions: Vec<[f64; 2]> },
}

impl SourceGeometry {
    /// Point-source positions (empty for a plane wave).
    pub fn positions(&self) -> Vec<[f64; 2]> {
        match self {
            SourceGeometry::PlaneWave => Vec::new(),
            SourceGeometry::Point { position } => vec![*position],
            SourceGeometry::Line { height, half_length, count } => {
                if *count == 1 {
                    return vec![[0.0, *height]];
                }
                let step = 2.0 * half_length / (*count - 1) as f64;
                (0..*count).map(|j| [-half_length + step * j as f64, *height]).collect()
            }
            SourceGeometry::Points { positions } => positions.clone(),
        }
    }

    pub fn is_plane_wave(&self) -> bool {
        matches!(self, SourceGeometry::PlaneWave)
    }

    /// Largest distance of a source from the origin.
    pub fn extent(&self) -> f64 {
        self.positions().iter().map(|p| p[0].hypot(p[1])).fold(0.0, f64::max)
    }

    fn validate(&self) -> Result<()> {
        match self {
            SourceGeometry::PlaneWave => {}
            SourceGeometry::Point { position } => {
                ensure!(position.iter().all(|v| v.is_finite()), "non-finite point source");
            }
            SourceGeometry::Line { height, half_length, count } => {
                ensure!(*count >= 1, "line source needs at least one point");
                ensure!(
                    height.is_finite() && half_length.is_finite() && *half_length >= 0.0,
                    "invalid line source geometry"
                );
            }
            SourceGeometry::Points { positions } => {
                ensure!(!positions.is_empty(), "source list is empty");
                ensure!(
                    positions.iter().flatten().all(|v| v.is_finite()),
                    "non-finite source position"
                );
            }
        }
        Ok(())
    }
}

/// Angles, wavenumbers, sources and receivers of one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcquisitionConfig {
    /// Number of equispaced rotation angles on `[0, 2 pi)`.
    pub n_angles: usize,
    /// Background wavenumbers `k0 = omega / c0`.
    pub wavenumbers: Vec<f64>,
    /// Background wave speed.
    #[serde(default = "one")]
    pub c0: f64,
    pub source: SourceGeometry,
    /// Height `r_M` of the measurement line.
    pub receiver_height: f64,
    /// Half-width `l_M` of the measurement line.
    pub receiver_half_width: f64,
    /// Number of receivers `m` (even).
    pub receiver_count: usize,
    /// Signal-to-noise ratio of the added noise, if any.
    #[serde(default)]
    pub noise_snr_db: Option<f64>,
    #[serde(default)]
    pub seed: u64,
}

fn one() -> f64 {
    1.0
}

impl AcquisitionConfig {
    pub fn validate(&self) -> Result<()> {
        ensure!(self.n_angles >= 1, "at least one angle is required");
        ensure!(!self.wavenumbers.is_empty(), "at least one wavenumber is required");
        ensure!(
            self.wavenumbers.iter().all(|k| k.is_finite() && *k > 0.0),
            "wavenumbers must be positive"
        );
        ensure!(self.c0.is_finite() && self.c0 > 0.0, "background speed must be positive");
        ensure!(
            self.receiver_half_width.is_finite() && self.receiver_half_width > 0.0,
            "receiver half-width must be positive"
        );
        ensure!(self.receiver_height.is_finite(), "receiver height must be finite");
        ensure!(
            self.receiver_count >= 2 && self.receiver_count.is_multiple_of(2),
            "receiver count must be even and >= 2"
        );
        if let Some(snr) = self.noise_snr_db {
            ensure!(snr.is_finite(), "noise SNR must be finite");
        }
        self.source.validate()
    }

    /// `alpha_j = 2 pi j / n_A`.
    pub fn angles(&self) -> Vec<f64> {
        (0..self.n_angles).map(|j| 2.0 * PI * j as f64 / self.n_angles as f64).collect()
    }

    /// Receiver abscissae `(2 l_M / m) * I_m`.
    pub fn receiver_x(&self) -> Vec<f64> {
        let m = self.receiver_count;
        let dx = 2.0 * self.receiver_half_width / m as f64;
        (0..m).map(|j| (j as f64 - (m / 2) as f64) * dx).collect()
    }

    pub fn receiver_spacing(&self) -> f64 {
        2.0 * self.receiver_half_width / self.receiver_count as f64
    }

    pub fn omega(&self, k0: f64) -> f64 {
        k0 * self.c0
    }

    /// Factor `(omega / omega_ref)^2` that converts a potential given at the
    /// reference frequency to wavenumber `k0`.
    pub fn potential_scale(&self, k0: f64) -> f64 {
        (self.omega(k0) / REFERENCE_OMEGA).powi(2)
    }

    pub fn trace_count(&self) -> usize {
        self.n_angles * self.wavenumbers.len()
    }

    /// Position of trace `(k index, angle index)` in a [`Dataset`].
    pub fn trace_index(&self, k_index: usize, angle_index: usize) -> usize {
        k_index * self.n_angles + angle_index
    }

    /// Largest distance from the origin of any receiver or source.
    pub fn extent(&self) -> f64 {
        let rx = self.receiver_half_width.hypot(self.receiver_height);
        rx.max(self.source.extent())
    }
}

/// Complex samples on a measurement line `x2 = height`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub receiver_x: Vec<f64>,
    pub height: f64,
    pub values: Vec<Complex64>,
}

impl Trace {
    pub fn new(receiver_x: Vec<f64>, height: f64, values: Vec<Complex64>) -> Result<Self> {
        ensure!(
            receiver_x.len() == values.len(),
            "trace has {} positions but {} values",
            receiver_x.len(),
            values.len()
        );
        ensure!(
            receiver_x.windows(2).all(|w| w[1] > w[0]),
            "receiver positions must be strictly increasing"
        );
        Ok(Self { receiver_x, height, values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Mean of `|u|^2`.
    pub fn power(&self) -> f64 {
        if self.values.is_empty() {
            return 0.0;
        }
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() / self.values.len() as f64
    }

    pub fn scaled(&self, alpha: Complex64) -> Trace {
        Trace {
            receiver_x: self.receiver_x.clone(),
            height: self.height,
            values: self.values.iter().map(|v| v * alpha).collect(),
        }
    }

    pub fn with_values(&self, values: Vec<Complex64>) -> Trace {
        assert_eq!(values.len(), self.values.len());
        Trace { receiver_x: self.receiver_x.clone(), height: self.height, values }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataKind {
    /// Total field `u_tot` as recorded.
    Total,
    /// Field of the sources in the homogeneous background.
    Incident,
    /// Calibrated `alpha (u_tot - u_inc)`.
    Scattered,
    /// Scattered data converted by the Rytov preprocessing.
    BornEquivalent,
}

/// One trace per `(angle, wavenumber)` pair, ordered wavenumber-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub acquisition: AcquisitionConfig,
    pub kind: DataKind,
    pub traces: Vec<Trace>,
    /// Complex scale applied (or to be applied) to each trace so that the
    /// incident field matches a unit plane wave on the measurement line.
    pub calibration: Vec<Complex64>,
}

impl Dataset {
    pub fn new(
        acquisition: AcquisitionConfig,
        kind: DataKind,
        traces: Vec<Trace>,
        calibration: Vec<Complex64>,
    ) -> Result<Self> {
        acquisition.validate()?;
        ensure!(
            traces.len() == acquisition.trace_count(),
            "dataset has {} traces, acquisition declares {}",
            traces.len(),
            acquisition.trace_count()
        );
        ensure!(calibration.len() == traces.len(), "one calibration scalar per trace is required");
        let rx = acquisition.receiver_x();
        for t in &traces {
            ensure!(
                t.receiver_x.len() == rx.len()
                    && t.receiver_x.iter().zip(&rx).all(|(a, b)| (a - b).abs() < 1e-9)
                    && (t.height - acquisition.receiver_height).abs() < 1e-12,
                "trace receiver geometry differs from the acquisition"
            );
        }
        Ok(Self { acquisition, kind, traces, calibration })
    }

    pub fn trace(&self, k_index: usize, angle_index: usize) -> &Trace {
        &self.traces[self.acquisition.trace_index(k_index, angle_index)]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn acq() -> AcquisitionConfig {
        AcquisitionConfig {
            n_angles: 40,
            wavenumbers: vec![2.0 * PI],
            c0: 1.0,
            source: SourceGeometry::Line { height: -15.0, half_length: 22.0, count: 441 },
            receiver_height: 10.0,
            receiver_half_width: 10.0,
            receiver_count: 200,
            noise_snr_db: Some(50.0),
            seed: 1,
        }
    }

    #[test]
    fn receivers_follow_centered_index_set() {
        let a = acq();
        let x = a.receiver_x();
        assert_eq!(x.len(), 200);
        assert!((x[0] + 10.0).abs() < 1e-12);
        assert!((x[100]).abs() < 1e-12);
        assert!((x[199] - 9.9).abs() < 1e-12);
    }

    #[test]
    fn nine_degree_angles() {
        let a = acq();
        let ang = a.angles();
        assert_eq!(ang.len(), 40);
        assert!((ang[1].to_degrees() - 9.0).abs() < 1e-12);
        assert!((ang[39].to_degrees() - 351.0).abs() < 1e-9);
    }

    #[test]
    fn line_source_positions() {
        let p = acq().source.positions();
        assert_eq!(p.len(), 441);
        assert!((p[0][0] + 22.0).abs() < 1e-12 && (p[440][0] - 22.0).abs() < 1e-12);
        assert!((p[1][0] - p[0][0] - 0.1).abs() < 1e-12);
    }

    #[test]
    fn validation_catches_bad_configs() {
        let mut a = acq();
        a.n_angles = 0;
        assert!(a.validate().is_err());
        let mut a = acq();
        a.wavenumbers = vec![-1.0];
        assert!(a.validate().is_err());
        let mut a = acq();
        a.receiver_count = 201;
        assert!(a.validate().is_err());
    }

    #[test]
    fn trace_requires_increasing_positions() {
        assert!(Trace::new(vec![0.0, 0.0], 1.0, vec![Complex64::default(); 2]).is_err());
        assert!(Trace::new(vec![0.0, 1.0], 1.0, vec![Complex64::default(); 1]).is_err());
    }

    #[test]
    fn rotation_quarter_turn() {
        let r = rotate(PI / 2.0, [1.0, 0.0]);
        assert!((r[0]).abs() < 1e-15 && (r[1] - 1.0).abs() < 1e-15);
    }
}
