use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{assemble, calibrate_incident, rhs_for, sample_points, MediumOperator, SourceSpec};
use crate::acquisition::{rotate, AcquisitionConfig, DataKind, Dataset, Trace};
use crate::error::{ensure, Error, Result};
use crate::grid::{ComplexField, RealField};
use crate::noise::{add_noise, trace_seed};
use crate::phantom::rotate_potential;

/// How the angle `alpha` of the acquisition is realised.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RotationMode {
    /// Rotate sources and receivers by `R_alpha` and keep the medium fixed;
    /// one factorisation per wavenumber.
    #[default]
    Acquisition,
    /// Resample the medium as `f(R_alpha x)` and keep the acquisition fixed;
    /// one factorisation per angle and wavenumber.
    Medium,
}

/// Physics used to produce the scattered field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ForwardModel {
    /// Full Helmholtz equation in the heterogeneous medium.
    #[default]
    Full,
    /// First-order Born approximation solved with the background operator.
    Born,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ForwardOptions {
    #[serde(default)]
    pub rotation: RotationMode,
    #[serde(default)]
    pub model: ForwardModel,
}

#[derive(Debug, Clone)]
pub struct ForwardOutput {
    /// Recorded total field, including noise when configured.
    pub total: Dataset,
    /// Noise-free incident field of the same sources.
    pub incident: Dataset,
    /// `alpha (u_tot - u_inc)` with the per-trace calibration `alpha`.
    pub scattered: Dataset,
    /// Smallest points-per-wavelength of each wavenumber's medium.
    pub points_per_wavelength: Vec<f64>,
}

struct Traces {
    total: Vec<Complex64>,
    incident: Vec<Complex64>,
}

/// Simulates the acquisition for the potential `f` (given at the reference
/// frequency) on `f`'s grid.
///
/// At wavenumber `k0` the medium is `k^2 = k0^2 + s f` with
/// `s = (omega / omega_ref)^2`.
pub fn forward_dataset(f: &RealField, acq: &AcquisitionConfig, options: ForwardOptions) -> Result<ForwardOutput> {
    acq.validate()?;
    let grid = *f.grid();
    let h = grid.spacing();
    ensure!(
        acq.extent() <= grid.half_width() - h,
        "sources/receivers reach radius {:.3}, beyond the grid interior {:.3}",
        acq.extent(),
        grid.half_width() - h
    );
    let rx = acq.receiver_x();
    let angles = acq.angles();
    let mut total = Vec::with_capacity(acq.trace_count());
    let mut incident = Vec::with_capacity(acq.trace_count());
    let mut ppw = Vec::with_capacity(acq.wavenumbers.len());
    for &k0 in &acq.wavenumbers {
        let s = acq.potential_scale(k0);
        let medium = |f: &RealField| -> Result<RealField> {
            let mut k = Vec::with_capacity(f.values().len());
            for &v in f.values() {
                let k2 = k0 * k0 + s * v;
                ensure!(k2 > 0.0, "k0^2 + f = {k2} is not positive at k0 = {k0}");
                k.push(k2.sqrt());
            }
            RealField::new(grid, k)
        };
        let k_field = medium(f)?;
        let resolved = super::points_per_wavelength(&k_field);
        if resolved < super::WARN_POINTS_PER_WAVELENGTH {
            log::warn!("k0 = {k0:.4}: only {resolved:.1} points per wavelength");
        }
        ppw.push(resolved);
        let traces = if acq.source.is_plane_wave() {
            plane_wave_traces(f, &k_field, k0, s, acq, &angles, &rx, options, &medium)?
        } else {
            point_source_traces(f, &k_field, k0, s, acq, &angles, &rx, options, &medium)?
        };
        for t in traces {
            total.push(Trace::new(rx.clone(), acq.receiver_height, t.total)?);
            incident.push(Trace::new(rx.clone(), acq.receiver_height, t.incident)?);
        }
    }

    let mut calibration = Vec::with_capacity(total.len());
    let mut scattered = Vec::with_capacity(total.len());
    for (ki, &k0) in acq.wavenumbers.iter().enumerate() {
        for ai in 0..acq.n_angles {
            let idx = acq.trace_index(ki, ai);
            if let Some(snr) = acq.noise_snr_db {
                total[idx] = add_noise(&total[idx], snr, trace_seed(acq.seed, idx))?;
            }
            let alpha = if acq.source.is_plane_wave() {
                Complex64::new(1.0, 0.0)
            } else {
                calibrate_incident(&incident[idx], k0)?
            };
            calibration.push(alpha);
            let vals = total[idx].values.iter().zip(&incident[idx].values).map(|(t, i)| alpha * (t - i)).collect();
            scattered.push(total[idx].with_values(vals));
        }
    }
    Ok(ForwardOutput {
        total: Dataset::new(acq.clone(), DataKind::Total, total, calibration.clone())?,
        incident: Dataset::new(acq.clone(), DataKind::Incident, incident, calibration.clone())?,
        scattered: Dataset::new(acq.clone(), DataKind::Scattered, scattered, calibration)?,
        points_per_wavelength: ppw,
    })
}

fn receiver_points(rx: &[f64], height: f64, alpha: f64) -> Vec<[f64; 2]> {
    rx.iter().map(|&x| rotate(alpha, [x, height])).collect()
}

/// Angle-dependent geometry: rotation applied to sources/receivers and the
/// potential seen by the solver.
fn frame(mode: RotationMode, alpha: f64) -> f64 {
    match mode {
        RotationMode::Acquisition => alpha,
        RotationMode::Medium => 0.0,
    }
}

fn background(k0: f64, omega: f64, grid: crate::grid::Grid) -> Result<MediumOperator> {
    assemble(&RealField::constant(grid, k0), omega)
}

#[allow(clippy::too_many_arguments)]
fn plane_wave_traces(
    f: &RealField,
    k_field: &RealField,
    k0: f64,
    s: f64,
    acq: &AcquisitionConfig,
    angles: &[f64],
    rx: &[f64],
    options: ForwardOptions,
    medium: &(dyn Fn(&RealField) -> Result<RealField> + Sync),
) -> Result<Vec<Traces>> {
    let grid = *f.grid();
    let omega = acq.omega(k0);
    let ideal = Complex64::from_polar(1.0, k0 * acq.receiver_height);
    let shared = match (options.rotation, options.model) {
        (_, ForwardModel::Born) => Some(background(k0, omega, grid)?),
        (RotationMode::Acquisition, ForwardModel::Full) => Some(assemble(k_field, omega)?),
        (RotationMode::Medium, ForwardModel::Full) => None,
    };
    angles
        .par_iter()
        .map(|&alpha| {
            let beta = frame(options.rotation, alpha);
            let contrast = match options.rotation {
                RotationMode::Acquisition => f.map(|v| s * v),
                RotationMode::Medium => rotate_potential(f, alpha).map(|v| s * v),
            };
            let local;
            let op = match &shared {
                Some(op) => op,
                None => {
                    local = assemble(&medium(&rotate_potential(f, alpha))?, omega)?;
                    &local
                }
            };
            let src = SourceSpec::PlaneWaveContrast { contrast, k0, direction: rotate(beta, [0.0, 1.0]) };
            let u = op.solve(&[rhs_for(&src, &grid)?])?.remove(0);
            let sca = sample_points(&u, &receiver_points(rx, acq.receiver_height, beta))?;
            Ok(Traces { total: sca.iter().map(|v| v + ideal).collect(), incident: vec![ideal; rx.len()] })
        })
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn point_source_traces(
    f: &RealField,
    k_field: &RealField,
    k0: f64,
    s: f64,
    acq: &AcquisitionConfig,
    angles: &[f64],
    rx: &[f64],
    options: ForwardOptions,
    medium: &(dyn Fn(&RealField) -> Result<RealField> + Sync),
) -> Result<Vec<Traces>> {
    let grid = *f.grid();
    let omega = acq.omega(k0);
    let sources = acq.source.positions();
    let geometry = |alpha: f64| {
        let beta = frame(options.rotation, alpha);
        let src: Vec<[f64; 2]> = sources.iter().map(|&p| rotate(beta, p)).collect();
        (src, receiver_points(rx, acq.receiver_height, beta))
    };

    // Incident fields first; with a fixed acquisition they coincide for all angles.
    let bg = background(k0, omega, grid)?;
    let incident_angles: Vec<f64> = match options.rotation {
        RotationMode::Acquisition => angles.to_vec(),
        RotationMode::Medium => vec![0.0],
    };
    let need_fields = options.model == ForwardModel::Born;
    let inc: Vec<(Vec<Complex64>, Option<ComplexField>)> = incident_angles
        .par_iter()
        .map(|&alpha| {
            let (src, rec) = geometry(alpha);
            let u = bg.solve(&[rhs_for(&SourceSpec::Line(src), &grid)?])?.remove(0);
            let trace = sample_points(&u, &rec)?;
            Ok((trace, need_fields.then_some(u)))
        })
        .collect::<Result<_>>()?;
    let inc_for = |ai: usize| if inc.len() == 1 { &inc[0] } else { &inc[ai] };

    // at most one factorisation is alive at a time
    let (bg, full_op) = match (options.model, options.rotation) {
        (ForwardModel::Full, RotationMode::Acquisition) => (None, Some(bg.into_reassembled(k_field, omega)?)),
        _ => (Some(bg), None),
    };
    (0..angles.len())
        .into_par_iter()
        .map(|ai| {
            let alpha = angles[ai];
            let (src, rec) = geometry(alpha);
            let (inc_trace, inc_field) = inc_for(ai);
            let total = match options.model {
                ForwardModel::Born => {
                    let u_inc = inc_field.as_ref().ok_or_else(|| Error::numerical("missing incident field"))?;
                    let contrast = match options.rotation {
                        RotationMode::Acquisition => f.clone(),
                        RotationMode::Medium => rotate_potential(f, alpha),
                    };
                    let density: Vec<Complex64> =
                        contrast.values().iter().zip(u_inc.values()).map(|(&c, &u)| u * (s * c)).collect();
                    let bg = bg.as_ref().ok_or_else(|| Error::numerical("missing background operator"))?;
                    let sca = bg.solve(&[rhs_for(&SourceSpec::Density(density), &grid)?])?.remove(0);
                    sample_points(&sca, &rec)?.iter().zip(inc_trace).map(|(a, b)| a + b).collect()
                }
                ForwardModel::Full => {
                    let local;
                    let op = match &full_op {
                        Some(op) => op,
                        None => {
                            let bg = bg.as_ref().ok_or_else(|| Error::numerical("missing background operator"))?;
                            local = bg.reassemble(&medium(&rotate_potential(f, alpha))?, omega)?;
                            &local
                        }
                    };
                    let u = op.solve(&[rhs_for(&SourceSpec::Line(src), &grid)?])?.remove(0);
                    sample_points(&u, &rec)?
                }
            };
            Ok(Traces { total, incident: inc_trace.clone() })
        })
        .collect()
}
