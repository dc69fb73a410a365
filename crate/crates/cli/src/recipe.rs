//! Experiment recipes.
//!
//! A recipe is a JSON document:
//!
//! ```json
//! {
//!   "name": "disk-born",
//!   "phantom": { "kind": "disk", "radius": 2.0, "amplitude": 1.0 },
//!   "grid": { "half_width": 30.0, "spacing": 0.1 },
//!   "acquisition": {
//!     "n_angles": 40, "wavenumbers": [6.283185307179586], "c0": 1.0,
//!     "source": { "kind": "line", "height": -15.0, "half_length": 22.0, "count": 441 },
//!     "receiver_height": 10.0, "receiver_half_width": 10.0, "receiver_count": 200,
//!     "noise_snr_db": 50.0, "seed": 1
//!   },
//!   "forward": { "rotation": "acquisition", "model": "full" },
//!   "reconstruction": {
//!     "method": "born",
//!     "grid": { "half_width": 10.0, "resolution": 240 },
//!     "iterations": 20
//!   },
//!   "psnr_window": 14.0,
//!   "output_dir": "out/disk-born"
//! }
//! ```
//!
//! `phantom.kind` is `disk`, `scene` (with a `primitives` list), `phantom_one`
//! or `phantom_two` (with `high_contrast`). `grid` takes either `spacing` or
//! `resolution`. `reconstruction.method` is `born`, `rytov` or `fwi`; the
//! FWI variant carries `frequencies`, `iterations`, and optionally `grid`,
//! `window_radius`, `line_search`, `parameter` and `initial_speed`.
//! An optional `compare` block configures `compare-forward`.

use std::fs;
use std::path::{Path, PathBuf};

use difftomo::acquisition::SourceGeometry;
use difftomo::fdt::NdftMethod;
use difftomo::fwi::FwiConfig;
use difftomo::helmholtz::ForwardOptions;
use difftomo::phantom::{phantom_one, phantom_two, SceneSpec};
use difftomo::{AcquisitionConfig, Grid};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub half_width: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spacing: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolution: Option<usize>,
}

impl GridSpec {
    pub fn build(&self) -> CliResult<Grid> {
        match (self.spacing, self.resolution) {
            (Some(h), None) => Ok(Grid::with_spacing(self.half_width, h)?),
            (None, Some(n)) => Ok(Grid::new(self.half_width, n)?),
            _ => Err(CliError::Validation("grid needs exactly one of `spacing` and `resolution`".into())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PhantomRef {
    Disk { radius: f64, amplitude: f64 },
    Scene(SceneSpec),
    PhantomOne { high_contrast: bool },
    PhantomTwo { high_contrast: bool },
}

impl PhantomRef {
    pub fn scene(&self) -> SceneSpec {
        match self {
            PhantomRef::Disk { radius, amplitude } => SceneSpec::disk(*radius, *amplitude),
            PhantomRef::Scene(s) => s.clone(),
            PhantomRef::PhantomOne { high_contrast } => phantom_one(*high_contrast),
            PhantomRef::PhantomTwo { high_contrast } => phantom_two(*high_contrast),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FourierSpec {
    pub grid: GridSpec,
    pub iterations: usize,
    #[serde(default)]
    pub ndft: NdftMethod,
    /// Restrict the data to one wavenumber of the acquisition.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wavenumber_index: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FwiSpec {
    /// Inversion grid; defaults to the forward grid.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    /// Constant starting speed; defaults to the background speed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_speed: Option<f64>,
    #[serde(flatten)]
    pub config: FwiConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum ReconstructionSpec {
    Born(FourierSpec),
    Rytov(FourierSpec),
    Fwi(FwiSpec),
}

impl ReconstructionSpec {
    pub fn method_name(&self) -> &'static str {
        match self {
            ReconstructionSpec::Born(_) => "born",
            ReconstructionSpec::Rytov(_) => "rytov",
            ReconstructionSpec::Fwi(_) => "fwi",
        }
    }
}

/// Forward models available to `compare-forward`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CompareModel {
    /// Scattered field of the full equation under plane-wave incidence.
    PdeScattered,
    /// First-order Born field solved with the background operator.
    BornPde,
    /// First-order Born field by quadrature with the Green's function.
    BornConvolution,
    /// Calibrated scattered field of the configured line source.
    LineSource,
    /// Calibrated scattered field of a single point source.
    PointSource,
}

impl CompareModel {
    pub fn label(&self) -> &'static str {
        match self {
            CompareModel::PdeScattered => "pde-scattered",
            CompareModel::BornPde => "born-pde",
            CompareModel::BornConvolution => "born-convolution",
            CompareModel::LineSource => "line-source",
            CompareModel::PointSource => "point-source",
        }
    }
}

fn default_line() -> SourceGeometry {
    SourceGeometry::Line { height: -15.0, half_length: 22.0, count: 441 }
}

fn default_point() -> [f64; 2] {
    [0.0, -15.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareSpec {
    pub models: Vec<CompareModel>,
    #[serde(default = "default_line")]
    pub line_source: SourceGeometry,
    #[serde(default = "default_point")]
    pub point_source: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentRecipe {
    pub name: String,
    pub phantom: PhantomRef,
    /// Grid of the forward simulation.
    pub grid: GridSpec,
    pub acquisition: AcquisitionConfig,
    #[serde(default)]
    pub forward: ForwardOptions,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reconstruction: Option<ReconstructionSpec>,
    /// Side of the centred square over which PSNR is evaluated.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub psnr_window: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compare: Option<CompareSpec>,
}

impl ExperimentRecipe {
    pub fn from_json(text: &str) -> CliResult<Self> {
        let recipe: Self = serde_json::from_str(text).map_err(|e| CliError::Validation(format!("recipe: {e}")))?;
        recipe.validate()?;
        Ok(recipe)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_json(&text).map_err(|e| match e {
            CliError::Validation(m) => CliError::Validation(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// Checks everything that can be checked without running a solver.
    pub fn validate(&self) -> CliResult<()> {
        if self.name.trim().is_empty() {
            return Err(CliError::Validation("recipe name is empty".into()));
        }
        let grid = self.grid.build()?;
        self.acquisition.validate()?;
        self.phantom.scene().validate(Some(grid.half_width()))?;
        if let Some(w) = self.psnr_window {
            grid.window_mask(Some(w))?;
        }
        match &self.reconstruction {
            Some(ReconstructionSpec::Born(s) | ReconstructionSpec::Rytov(s)) => {
                let g = s.grid.build()?;
                if s.iterations == 0 {
                    return Err(CliError::Validation("reconstruction needs at least one iteration".into()));
                }
                if let Some(ki) = s.wavenumber_index {
                    if ki >= self.acquisition.wavenumbers.len() {
                        return Err(CliError::Validation(format!("wavenumber index {ki} out of range")));
                    }
                }
                if let Some(w) = self.psnr_window {
                    g.window_mask(Some(w))?;
                }
            }
            Some(ReconstructionSpec::Fwi(s)) => {
                s.config.validate()?;
                if let Some(g) = &s.grid {
                    g.build()?;
                }
                if let Some(c) = s.initial_speed {
                    if !(c > 0.0) {
                        return Err(CliError::Validation("initial speed must be positive".into()));
                    }
                }
                if self.acquisition.source.is_plane_wave() {
                    return Err(CliError::Validation("FWI needs point or line sources".into()));
                }
            }
            None => {}
        }
        if let Some(c) = &self.compare {
            if c.models.len() < 2 {
                return Err(CliError::Validation("compare-forward needs at least two models".into()));
            }
        }
        Ok(())
    }

    /// Output directory, defaulting to `out/<name>`.
    pub fn output_dir(&self) -> PathBuf {
        self.output_dir.clone().unwrap_or_else(|| PathBuf::from("out").join(&self.name))
    }
}
