//! `forward` and `reconstruct` pipelines.
//!
//! Everything written next to the fields is deterministic for a fixed recipe;
//! wall-clock times go to a separate `timings.json`.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use difftomo::fdt::{fdt_samples, reconstruct, rytov_dataset, ReconstructionConfig};
use difftomo::fwi::{fwi_run, FwiReport, Truth};
use difftomo::helmholtz::{forward_dataset, ForwardOptions, ForwardOutput};
use difftomo::io::{read_dataset, write_dataset, write_real_field};
use difftomo::metrics::psnr;
use difftomo::phantom::render_scene;
use difftomo::{AcquisitionConfig, Dataset, Grid, RealField};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::recipe::{ExperimentRecipe, FourierSpec, ReconstructionSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridInfo {
    pub half_width: f64,
    pub resolution: usize,
    pub spacing: f64,
}

impl From<&Grid> for GridInfo {
    fn from(g: &Grid) -> Self {
        Self { half_width: g.half_width(), resolution: g.resolution(), spacing: g.spacing() }
    }
}

/// Contents of `forward.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForwardManifest {
    pub name: String,
    pub grid: GridInfo,
    pub options: ForwardOptions,
    pub trace_count: usize,
    pub receiver_count: usize,
    /// Smallest points per wavelength of the medium, per wavenumber.
    pub points_per_wavelength: Vec<f64>,
    pub potential: String,
    pub datasets: Vec<String>,
}

pub struct Simulation {
    pub grid: Grid,
    pub potential: RealField,
    pub output: ForwardOutput,
    pub seconds: f64,
}

/// Renders the phantom on the forward grid and simulates the acquisition.
pub fn simulate(recipe: &ExperimentRecipe) -> CliResult<Simulation> {
    let grid = recipe.grid.build()?;
    let potential = render_scene(&recipe.phantom.scene(), &grid)?;
    let started = Instant::now();
    let output = forward_dataset(&potential, &recipe.acquisition, recipe.forward)?;
    Ok(Simulation { grid, potential, output, seconds: started.elapsed().as_secs_f64() })
}

fn write_json(path: &Path, value: &impl Serialize) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn create_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

#[derive(Serialize)]
struct Timings<'a> {
    stage: &'a str,
    seconds: f64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    block_seconds: Vec<f64>,
}

/// Writes the datasets, the true potential and `forward.json` into `dir`.
pub fn write_simulation(recipe: &ExperimentRecipe, sim: &Simulation, dir: &Path) -> CliResult<ForwardManifest> {
    create_dir(dir)?;
    write_real_field(dir.join("potential.bin"), &sim.potential)?;
    let mut datasets = Vec::new();
    for data in [&sim.output.total, &sim.output.incident, &sim.output.scattered] {
        let path = write_dataset(dir, data)?;
        datasets.push(path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default());
    }
    let manifest = ForwardManifest {
        name: recipe.name.clone(),
        grid: GridInfo::from(&sim.grid),
        options: recipe.forward,
        trace_count: recipe.acquisition.trace_count(),
        receiver_count: recipe.acquisition.receiver_count,
        points_per_wavelength: sim.output.points_per_wavelength.clone(),
        potential: "potential.bin".into(),
        datasets,
    };
    write_json(&dir.join("forward.json"), &manifest)?;
    write_json(&dir.join("forward_timings.json"), &Timings { stage: "forward", seconds: sim.seconds, block_seconds: vec![] })?;
    Ok(manifest)
}

pub fn cmd_forward(recipe: &ExperimentRecipe, out: Option<&Path>) -> CliResult<(PathBuf, ForwardManifest)> {
    let dir = out.map(Path::to_path_buf).unwrap_or_else(|| recipe.output_dir());
    let sim = simulate(recipe)?;
    let manifest = write_simulation(recipe, &sim, &dir)?;
    Ok((dir, manifest))
}

/// Datasets consumed by the reconstruction methods.
pub struct ForwardData {
    pub total: Dataset,
    pub incident: Dataset,
    pub scattered: Dataset,
}

impl From<ForwardOutput> for ForwardData {
    fn from(o: ForwardOutput) -> Self {
        Self { total: o.total, incident: o.incident, scattered: o.scattered }
    }
}

pub fn read_forward_data(dir: &Path, recipe: &ExperimentRecipe) -> CliResult<ForwardData> {
    let read = |name: &str| -> CliResult<Dataset> {
        let path = dir.join(name);
        if !path.exists() {
            return Err(CliError::Io(format!("{} not found; run `forward` first", path.display())));
        }
        Ok(read_dataset(&path)?)
    };
    let data = ForwardData { total: read("total.json")?, incident: read("incident.json")?, scattered: read("scattered.json")? };
    if data.total.acquisition != recipe.acquisition {
        return Err(CliError::Validation(format!(
            "dataset in {} was generated with a different acquisition",
            dir.display()
        )));
    }
    Ok(data)
}

/// The traces of one wavenumber as a dataset of their own.
pub fn select_wavenumber(data: &Dataset, k_index: usize) -> CliResult<Dataset> {
    let acq = &data.acquisition;
    let k0 = *acq
        .wavenumbers
        .get(k_index)
        .ok_or_else(|| CliError::Validation(format!("wavenumber index {k_index} out of range")))?;
    let range = acq.trace_index(k_index, 0)..acq.trace_index(k_index, 0) + acq.n_angles;
    let single = AcquisitionConfig { wavenumbers: vec![k0], ..acq.clone() };
    Ok(Dataset::new(single, data.kind, data.traces[range.clone()].to_vec(), data.calibration[range].to_vec())?)
}

/// Contents of `report.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionReport {
    pub name: String,
    pub method: String,
    pub grid: GridInfo,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub psnr: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub psnr_window: Option<f64>,
    pub iterations: usize,
    /// Number of k-space samples (Fourier methods).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    /// CGNE residual norms, starting with the data norm.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residuals: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fwi: Option<FwiReport>,
}

pub struct Reconstruction {
    pub potential: RealField,
    pub speed: Option<RealField>,
    pub report: ReconstructionReport,
    pub seconds: f64,
    pub block_seconds: Vec<f64>,
}

fn fourier(recipe: &ExperimentRecipe, spec: &FourierSpec, data: &Dataset, method: &str) -> CliResult<Reconstruction> {
    let started = Instant::now();
    let grid = spec.grid.build()?;
    let data = match spec.wavenumber_index {
        Some(ki) => select_wavenumber(data, ki)?,
        None => data.clone(),
    };
    let samples = fdt_samples(&data)?;
    let config = ReconstructionConfig {
        grid,
        iterations: spec.iterations,
        method: spec.ndft,
        c0: recipe.acquisition.c0,
    };
    let result = reconstruct(&samples, &config)?;
    let truth = render_scene(&recipe.phantom.scene(), &grid)?;
    let report = ReconstructionReport {
        name: recipe.name.clone(),
        method: method.into(),
        grid: GridInfo::from(&grid),
        psnr: psnr(&truth, &result.field, recipe.psnr_window).ok(),
        psnr_window: recipe.psnr_window,
        iterations: spec.iterations,
        samples: Some(samples.len()),
        residuals: Some(result.residuals),
        fwi: None,
    };
    Ok(Reconstruction {
        potential: result.field,
        speed: None,
        report,
        seconds: started.elapsed().as_secs_f64(),
        block_seconds: Vec::new(),
    })
}

/// Runs the recipe's reconstruction method on in-memory data.
pub fn reconstruct_data(recipe: &ExperimentRecipe, data: &ForwardData) -> CliResult<Reconstruction> {
    let spec = recipe
        .reconstruction
        .as_ref()
        .ok_or_else(|| CliError::Validation(format!("recipe `{}` has no reconstruction block", recipe.name)))?;
    match spec {
        ReconstructionSpec::Born(s) => fourier(recipe, s, &data.scattered, "born"),
        ReconstructionSpec::Rytov(s) => {
            let born = rytov_dataset(&data.total, &data.incident)?;
            fourier(recipe, s, &born, "rytov")
        }
        ReconstructionSpec::Fwi(s) => {
            let started = Instant::now();
            let grid = match &s.grid {
                Some(g) => g.build()?,
                None => recipe.grid.build()?,
            };
            let c_init = s.initial_speed.unwrap_or(recipe.acquisition.c0);
            let truth = render_scene(&recipe.phantom.scene(), &grid)?;
            let outcome = fwi_run(
                &s.config,
                &RealField::constant(grid, c_init),
                &data.total,
                Some(Truth { potential: &truth, window: recipe.psnr_window }),
            )?;
            let report = ReconstructionReport {
                name: recipe.name.clone(),
                method: "fwi".into(),
                grid: GridInfo::from(&grid),
                psnr: psnr(&truth, &outcome.potential, recipe.psnr_window).ok(),
                psnr_window: recipe.psnr_window,
                iterations: outcome.report.total_iterations,
                samples: None,
                residuals: None,
                fwi: Some(outcome.report),
            };
            Ok(Reconstruction {
                potential: outcome.potential,
                speed: Some(outcome.speed),
                report,
                seconds: started.elapsed().as_secs_f64(),
                block_seconds: outcome.block_seconds,
            })
        }
    }
}

/// Writes `reconstruction.bin`, `speed.bin` (FWI), `report.json` and
/// `reconstruct_timings.json` into `dir`.
pub fn write_reconstruction(rec: &Reconstruction, dir: &Path) -> CliResult<()> {
    create_dir(dir)?;
    write_real_field(dir.join("reconstruction.bin"), &rec.potential)?;
    if let Some(c) = &rec.speed {
        write_real_field(dir.join("speed.bin"), c)?;
    }
    write_json(&dir.join("report.json"), &rec.report)?;
    write_json(
        &dir.join("reconstruct_timings.json"),
        &Timings { stage: "reconstruct", seconds: rec.seconds, block_seconds: rec.block_seconds.clone() },
    )
}

pub fn cmd_reconstruct(
    recipe: &ExperimentRecipe,
    data_dir: Option<&Path>,
    out: Option<&Path>,
) -> CliResult<(PathBuf, ReconstructionReport)> {
    let default_dir = recipe.output_dir();
    let data_dir = data_dir.unwrap_or(&default_dir);
    let out = out.unwrap_or(data_dir).to_path_buf();
    let data = read_forward_data(data_dir, recipe)?;
    let rec = reconstruct_data(recipe, &data)?;
    write_reconstruction(&rec, &out)?;
    Ok((out, rec.report))
}
