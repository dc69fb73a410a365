//! Binary field files and dataset directories.
//!
//! Field file layout (all little-endian):
//!
//! | offset | size    | content                                         |
//! |--------|---------|-------------------------------------------------|
//! | 0      | 8       | magic `b"DIFFTOMO"`                             |
//! | 8      | 4       | format version (`u32`, currently 1)             |
//! | 12     | 4       | reserved, zero                                  |
//! | 16     | 8       | grid half-width `r_s` (`f64`)                   |
//! | 24     | 4       | grid resolution `N` (`u32`)                     |
//! | 28     | 1       | kind tag: 0 = real, 1 = complex                 |
//! | 29     | payload | `N^2` `f64`, or `2 N^2` `f64` as interleaved re/im |
//!
//! Payload order is row-major with `x2` as the slow index (see [`crate::grid`]).
//!
//! A dataset is stored as a JSON manifest `<kind>.json` next to a directory
//! `<kind>/` holding one blob per `(angle, wavenumber)` pair, each blob being
//! `m` complex samples as interleaved little-endian `f64` pairs.

use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::acquisition::{AcquisitionConfig, DataKind, Dataset, Trace};
use crate::error::{Error, Result};
use crate::grid::{ComplexField, Field, Grid, RealField};

pub const FIELD_MAGIC: &[u8; 8] = b"DIFFTOMO";
pub const FIELD_VERSION: u32 = 1;
const HEADER_LEN: usize = 29;

/// A field read from disk, real or complex.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyField {
    Real(RealField),
    Complex(ComplexField),
}

impl AnyField {
    pub fn grid(&self) -> &Grid {
        match self {
            AnyField::Real(f) => f.grid(),
            AnyField::Complex(f) => f.grid(),
        }
    }

    pub fn into_real(self) -> Result<RealField> {
        match self {
            AnyField::Real(f) => Ok(f),
            AnyField::Complex(_) => Err(Error::format("expected a real field, found complex")),
        }
    }
}

fn header(grid: &Grid, tag: u8, payload: usize) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + payload * 8);
    out.extend_from_slice(FIELD_MAGIC);
    out.extend_from_slice(&FIELD_VERSION.to_le_bytes());
    out.extend_from_slice(&0u32.to_le_bytes());
    out.extend_from_slice(&grid.half_width().to_le_bytes());
    out.extend_from_slice(&(grid.resolution() as u32).to_le_bytes());
    out.push(tag);
    out
}

pub fn real_field_to_bytes(field: &RealField) -> Vec<u8> {
    let mut out = header(field.grid(), 0, field.values().len());
    for v in field.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn complex_field_to_bytes(field: &ComplexField) -> Vec<u8> {
    let mut out = header(field.grid(), 1, 2 * field.values().len());
    for v in field.values() {
        out.extend_from_slice(&v.re.to_le_bytes());
        out.extend_from_slice(&v.im.to_le_bytes());
    }
    out
}

fn f64_at(bytes: &[u8], pos: usize) -> f64 {
    f64::from_le_bytes(bytes[pos..pos + 8].try_into().expect("8-byte slice"))
}

pub fn field_from_bytes(bytes: &[u8]) -> Result<AnyField> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::format("field file shorter than its header"));
    }
    if &bytes[0..8] != FIELD_MAGIC {
        return Err(Error::format("bad field file magic"));
    }
    let version = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
    if version != FIELD_VERSION {
        return Err(Error::format(format!("unsupported field file version {version}")));
    }
    let half_width = f64_at(bytes, 16);
    let n = u32::from_le_bytes(bytes[24..28].try_into().unwrap()) as usize;
    let grid = Grid::new(half_width, n).map_err(|e| Error::format(format!("bad grid header: {e}")))?;
    let tag = bytes[28];
    let per_node = match tag {
        0 => 1,
        1 => 2,
        t => return Err(Error::format(format!("unknown field kind tag {t}"))),
    };
    let expected = HEADER_LEN + grid.len() * per_node * 8;
    if bytes.len() != expected {
        return Err(Error::format(format!(
            "field payload has {} bytes, header implies {}",
            bytes.len() - HEADER_LEN,
            expected - HEADER_LEN
        )));
    }
    let payload = &bytes[HEADER_LEN..];
    if tag == 0 {
        let values = (0..grid.len()).map(|i| f64_at(payload, 8 * i)).collect();
        Ok(AnyField::Real(Field::new(grid, values).map_err(|e| Error::format(e.to_string()))?))
    } else {
        let values = (0..grid.len())
            .map(|i| Complex64::new(f64_at(payload, 16 * i), f64_at(payload, 16 * i + 8)))
            .collect();
        Ok(AnyField::Complex(Field::new(grid, values).map_err(|e| Error::format(e.to_string()))?))
    }
}

pub fn write_real_field(path: impl AsRef<Path>, field: &RealField) -> Result<()> {
    fs::write(path, real_field_to_bytes(field))?;
    Ok(())
}

pub fn write_complex_field(path: impl AsRef<Path>, field: &ComplexField) -> Result<()> {
    fs::write(path, complex_field_to_bytes(field))?;
    Ok(())
}

pub fn read_field(path: impl AsRef<Path>) -> Result<AnyField> {
    field_from_bytes(&fs::read(path)?)
}

#[derive(Debug, Serialize, Deserialize)]
struct TraceEntry {
    k_index: usize,
    angle_index: usize,
    angle: f64,
    k0: f64,
    calibration: [f64; 2],
    file: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    format: String,
    version: u32,
    kind: DataKind,
    acquisition: AcquisitionConfig,
    angles: Vec<f64>,
    wavenumbers: Vec<f64>,
    traces: Vec<TraceEntry>,
}

const DATASET_FORMAT: &str = "difftomo-dataset";

fn kind_name(kind: DataKind) -> &'static str {
    match kind {
        DataKind::Total => "total",
        DataKind::Incident => "incident",
        DataKind::Scattered => "scattered",
        DataKind::BornEquivalent => "born_equivalent",
    }
}

pub fn trace_to_bytes(values: &[Complex64]) -> Vec<u8> {
    let mut out = Vec::with_capacity(values.len() * 16);
    for v in values {
        out.extend_from_slice(&v.re.to_le_bytes());
        out.extend_from_slice(&v.im.to_le_bytes());
    }
    out
}

/// Writes `<dir>/<kind>.json` and `<dir>/<kind>/*.bin`; returns the manifest path.
pub fn write_dataset(dir: impl AsRef<Path>, data: &Dataset) -> Result<PathBuf> {
    let dir = dir.as_ref();
    let name = kind_name(data.kind);
    fs::create_dir_all(dir.join(name))?;
    let acq = &data.acquisition;
    let angles = acq.angles();
    let mut entries = Vec::with_capacity(data.traces.len());
    for (ki, &k0) in acq.wavenumbers.iter().enumerate() {
        for (ai, &angle) in angles.iter().enumerate() {
            let idx = acq.trace_index(ki, ai);
            let file = format!("{name}/k{ki:03}_a{ai:04}.bin");
            fs::write(dir.join(&file), trace_to_bytes(&data.traces[idx].values))?;
            let c = data.calibration[idx];
            entries.push(TraceEntry { k_index: ki, angle_index: ai, angle, k0, calibration: [c.re, c.im], file });
        }
    }
    let manifest = Manifest {
        format: DATASET_FORMAT.into(),
        version: 1,
        kind: data.kind,
        acquisition: acq.clone(),
        angles,
        wavenumbers: acq.wavenumbers.clone(),
        traces: entries,
    };
    let path = dir.join(format!("{name}.json"));
    fs::write(&path, serde_json::to_vec_pretty(&manifest)?)?;
    Ok(path)
}

/// Reads a dataset from its manifest path.
pub fn read_dataset(manifest_path: impl AsRef<Path>) -> Result<Dataset> {
    let manifest_path = manifest_path.as_ref();
    let manifest: Manifest = serde_json::from_slice(&fs::read(manifest_path)?)?;
    if manifest.format != DATASET_FORMAT || manifest.version != 1 {
        return Err(Error::format(format!(
            "unsupported dataset format {} v{}",
            manifest.format, manifest.version
        )));
    }
    let acq = manifest.acquisition;
    acq.validate()?;
    let base = manifest_path.parent().unwrap_or(Path::new("."));
    let m = acq.receiver_count;
    let rx = acq.receiver_x();
    let mut traces: Vec<Option<Trace>> = vec![None; acq.trace_count()];
    let mut calibration = vec![Complex64::new(1.0, 0.0); acq.trace_count()];
    for e in &manifest.traces {
        if e.k_index >= acq.wavenumbers.len() || e.angle_index >= acq.n_angles {
            return Err(Error::format(format!("trace index out of range in {}", e.file)));
        }
        let bytes = fs::read(base.join(&e.file))?;
        if bytes.len() != 16 * m {
            return Err(Error::format(format!(
                "trace {} has {} bytes, expected {}",
                e.file,
                bytes.len(),
                16 * m
            )));
        }
        let values = (0..m).map(|i| Complex64::new(f64_at(&bytes, 16 * i), f64_at(&bytes, 16 * i + 8))).collect();
        let idx = acq.trace_index(e.k_index, e.angle_index);
        traces[idx] = Some(Trace::new(rx.clone(), acq.receiver_height, values)?);
        calibration[idx] = Complex64::new(e.calibration[0], e.calibration[1]);
    }
    let traces = traces
        .into_iter()
        .enumerate()
        .map(|(i, t)| t.ok_or_else(|| Error::format(format!("dataset is missing trace {i}"))))
        .collect::<Result<Vec<_>>>()?;
    Dataset::new(acq, manifest.kind, traces, calibration)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::acquisition::SourceGeometry;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn real_field_round_trip(vals in proptest::collection::vec(-1e6f64..1e6, 36), rs in 0.1f64..100.0) {
            let f = RealField::new(Grid::new(rs, 6).unwrap(), vals).unwrap();
            let back = field_from_bytes(&real_field_to_bytes(&f)).unwrap();
            prop_assert_eq!(back, AnyField::Real(f));
        }

        #[test]
        fn complex_field_round_trip(re in proptest::collection::vec(-1e3f64..1e3, 16), im in proptest::collection::vec(-1e3f64..1e3, 16)) {
            let v = re.iter().zip(&im).map(|(a, b)| Complex64::new(*a, *b)).collect();
            let f = ComplexField::new(Grid::new(2.5, 4).unwrap(), v).unwrap();
            let back = field_from_bytes(&complex_field_to_bytes(&f)).unwrap();
            prop_assert_eq!(back, AnyField::Complex(f));
        }
    }

    #[test]
    fn bad_magic_and_truncation() {
        let f = RealField::constant(Grid::new(1.0, 4).unwrap(), 0.5);
        let mut b = real_field_to_bytes(&f);
        let good = b.clone();
        b[0] = b'X';
        assert!(matches!(field_from_bytes(&b), Err(Error::Format(_))));
        let short = &good[..good.len() - 8];
        assert!(matches!(field_from_bytes(short), Err(Error::Format(_))));
        assert!(field_from_bytes(&good[..10]).is_err());
    }

    #[test]
    fn dataset_round_trip() {
        let acq = AcquisitionConfig {
            n_angles: 3,
            wavenumbers: vec![1.0, 2.0],
            c0: 1.0,
            source: SourceGeometry::PlaneWave,
            receiver_height: 4.0,
            receiver_half_width: 2.0,
            receiver_count: 4,
            noise_snr_db: None,
            seed: 0,
        };
        let rx = acq.receiver_x();
        let traces = (0..6)
            .map(|t| {
                let v = (0..4).map(|i| Complex64::new(t as f64 + 0.1 * i as f64, -(i as f64) / 3.0)).collect();
                Trace::new(rx.clone(), 4.0, v).unwrap()
            })
            .collect();
        let cal = (0..6).map(|t| Complex64::new(1.0, t as f64 / 7.0)).collect();
        let data = Dataset::new(acq, DataKind::Scattered, traces, cal).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = write_dataset(dir.path(), &data).unwrap();
        let back = read_dataset(&path).unwrap();
        assert_eq!(back, data);

        // truncate one blob
        let blob = dir.path().join("scattered/k001_a0002.bin");
        let bytes = fs::read(&blob).unwrap();
        fs::write(&blob, &bytes[..bytes.len() - 1]).unwrap();
        assert!(matches!(read_dataset(&path), Err(Error::Format(_))));
    }
}
