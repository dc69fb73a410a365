//! Rytov preprocessing: `u_Born = u_inc (i unwrap(arg(u_tot / u_inc)) + ln|u_tot / u_inc|)`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::acquisition::{DataKind, Dataset, Trace};
use crate::error::{ensure, Error, Result};

/// Sequential unwrapping: every successive difference is brought into
/// `(-pi, pi]` by adding a multiple of `2 pi`.
pub fn unwrap_1d(phases: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(phases.len());
    // whole turns added so far; keeping them separate leaves smooth input untouched
    let mut turns = 0.0;
    for (j, &p) in phases.iter().enumerate() {
        if j > 0 {
            let d = p - phases[j - 1];
            let mut dd = (d + PI).rem_euclid(2.0 * PI) - PI;
            if dd == -PI && d > 0.0 {
                dd = PI;
            }
            turns += ((dd - d) / (2.0 * PI)).round();
        }
        out.push(p + 2.0 * PI * turns);
    }
    out
}

pub fn rytov_to_born(total: &Trace, incident: &Trace) -> Result<Trace> {
    ensure!(total.len() == incident.len(), "total and incident traces differ in length");
    let mut ratio = Vec::with_capacity(total.len());
    for (t, i) in total.values.iter().zip(&incident.values) {
        ensure!(i.norm() > 0.0, "incident field vanishes at a receiver");
        let z = t / i;
        if !(z.norm() > 0.0) {
            return Err(Error::numerical("total field vanishes at a receiver (log singularity)"));
        }
        ratio.push(z);
    }
    let phase = unwrap_1d(&ratio.iter().map(|z| z.arg()).collect::<Vec<_>>());
    let values = ratio
        .iter()
        .zip(&phase)
        .zip(&incident.values)
        .map(|((z, &ph), &i)| i * Complex64::new(z.norm().ln(), ph))
        .collect();
    Ok(incident.with_values(values))
}

/// Born-equivalent dataset from total and incident traces; each trace is
/// scaled by the total dataset's calibration.
pub fn rytov_dataset(total: &Dataset, incident: &Dataset) -> Result<Dataset> {
    ensure!(total.kind == DataKind::Total, "expected a total-field dataset");
    ensure!(incident.kind == DataKind::Incident, "expected an incident-field dataset");
    ensure!(total.traces.len() == incident.traces.len(), "datasets differ in size");
    let traces = total
        .traces
        .iter()
        .zip(&incident.traces)
        .zip(&total.calibration)
        .map(|((t, i), &a)| rytov_to_born(&t.scaled(a), &i.scaled(a)))
        .collect::<Result<Vec<_>>>()?;
    Dataset::new(total.acquisition.clone(), DataKind::BornEquivalent, traces, total.calibration.clone())
}
