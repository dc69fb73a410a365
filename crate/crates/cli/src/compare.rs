//! `compare-forward`: receiver-line traces of several forward models.
//!
//! Every model is evaluated at angle zero and the first wavenumber of the
//! recipe, without noise. The CSV starts with `# calibration` comment lines
//! (one per model, the complex scale applied to its trace), followed by a
//! header `x1,<model>_re,<model>_im,...` and one row per receiver.

use std::fmt::Write as _;

use difftomo::acquisition::SourceGeometry;
use difftomo::greens::born_convolution;
use difftomo::helmholtz::{forward_dataset, ForwardModel, ForwardOptions};
use difftomo::phantom::render_scene;
use difftomo::{AcquisitionConfig, Complex64, RealField};

use crate::error::{CliError, CliResult};
use crate::recipe::{CompareModel, ExperimentRecipe};

#[derive(Debug, Clone)]
pub struct ModelTrace {
    pub model: CompareModel,
    pub calibration: Complex64,
    pub values: Vec<Complex64>,
}

#[derive(Debug, Clone)]
pub struct Comparison {
    pub receiver_x: Vec<f64>,
    pub traces: Vec<ModelTrace>,
}

/// `||a - b|| / ||a||`.
pub fn relative_difference(a: &[Complex64], b: &[Complex64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = a.iter().map(|x| x.norm_sqr()).sum();
    (num / den).sqrt()
}

impl Comparison {
    /// Relative differences of every later model with respect to the first.
    pub fn differences(&self) -> Vec<(String, f64)> {
        let reference = &self.traces[0];
        self.traces[1..]
            .iter()
            .map(|t| {
                (format!("{} vs {}", t.model.label(), reference.model.label()), relative_difference(&reference.values, &t.values))
            })
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for t in &self.traces {
            let _ = writeln!(out, "# calibration {} {} {}", t.model.label(), t.calibration.re, t.calibration.im);
        }
        out.push_str("x1");
        for t in &self.traces {
            let _ = write!(out, ",{0}_re,{0}_im", t.model.label());
        }
        out.push('\n');
        for (j, x) in self.receiver_x.iter().enumerate() {
            let _ = write!(out, "{x}");
            for t in &self.traces {
                let _ = write!(out, ",{},{}", t.values[j].re, t.values[j].im);
            }
            out.push('\n');
        }
        out
    }
}

fn single_shot(acq: &AcquisitionConfig, source: SourceGeometry) -> AcquisitionConfig {
    AcquisitionConfig {
        n_angles: 1,
        wavenumbers: vec![acq.wavenumbers[0]],
        source,
        noise_snr_db: None,
        ..acq.clone()
    }
}

fn pde_trace(f: &RealField, acq: AcquisitionConfig, model: ForwardModel) -> CliResult<(Complex64, Vec<Complex64>)> {
    let out = forward_dataset(f, &acq, ForwardOptions { model, ..ForwardOptions::default() })?;
    Ok((out.scattered.calibration[0], out.scattered.traces[0].values.clone()))
}

pub fn compare_forward(recipe: &ExperimentRecipe) -> CliResult<Comparison> {
    let spec = recipe
        .compare
        .as_ref()
        .ok_or_else(|| CliError::Validation(format!("recipe `{}` has no compare block", recipe.name)))?;
    let grid = recipe.grid.build()?;
    let f = render_scene(&recipe.phantom.scene(), &grid)?;
    let acq = &recipe.acquisition;
    let k0 = acq.wavenumbers[0];
    let receiver_x = acq.receiver_x();
    let mut traces = Vec::with_capacity(spec.models.len());
    for &model in &spec.models {
        let context = |e: CliError| match e {
            CliError::Validation(m) => CliError::Validation(format!("{}: {m}", model.label())),
            CliError::Numerical(m) => CliError::Numerical(format!("{}: {m}", model.label())),
            CliError::Io(m) => CliError::Io(format!("{}: {m}", model.label())),
        };
        let (calibration, values) = match model {
            CompareModel::PdeScattered => pde_trace(&f, single_shot(acq, SourceGeometry::PlaneWave), ForwardModel::Full),
            CompareModel::BornPde => pde_trace(&f, single_shot(acq, SourceGeometry::PlaneWave), ForwardModel::Born),
            CompareModel::BornConvolution => {
                let s = acq.potential_scale(k0);
                let points: Vec<[f64; 2]> = receiver_x.iter().map(|&x| [x, acq.receiver_height]).collect();
                born_convolution(&f.map(|v| s * v), k0, &points, false)
                    .map(|v| (Complex64::new(1.0, 0.0), v))
                    .map_err(CliError::from)
            }
            CompareModel::LineSource => pde_trace(&f, single_shot(acq, spec.line_source.clone()), ForwardModel::Full),
            CompareModel::PointSource => pde_trace(
                &f,
                single_shot(acq, SourceGeometry::Point { position: spec.point_source }),
                ForwardModel::Full,
            ),
        }
        .map_err(context)?;
        traces.push(ModelTrace { model, calibration, values });
    }
    Ok(Comparison { receiver_x, traces })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn recipe(models: &str) -> ExperimentRecipe {
        ExperimentRecipe::from_json(&format!(
            r#"{{
            "name": "cmp",
            "phantom": {{ "kind": "disk", "radius": 1.0, "amplitude": 0.2 }},
            "grid": {{ "half_width": 6.0, "resolution": 120 }},
            "acquisition": {{
                "n_angles": 1, "wavenumbers": [3.141592653589793],
                "source": {{ "kind": "plane_wave" }},
                "receiver_height": 3.0, "receiver_half_width": 3.0, "receiver_count": 24
            }},
            "compare": {{ "models": {models}, "line_source": {{ "kind": "line", "height": -4.0, "half_length": 4.0, "count": 81 }}, "point_source": [0.0, -4.0] }}
        }}"#
        ))
        .unwrap()
    }

    #[test]
    fn identical_models_agree_exactly() {
        let c = compare_forward(&recipe(r#"["born-pde", "born-pde"]"#)).unwrap();
        assert_eq!(c.differences()[0].1, 0.0);
    }

    #[test]
    fn weak_scatterer_models_are_close() {
        let c = compare_forward(&recipe(r#"["pde-scattered", "born-pde", "born-convolution"]"#)).unwrap();
        for (label, d) in c.differences() {
            assert!(d < 0.2, "{label}: {d}");
        }
        let csv = c.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert!(lines[0].starts_with("# calibration pde-scattered 1 0"));
        assert_eq!(lines[3], "x1,pde-scattered_re,pde-scattered_im,born-pde_re,born-pde_im,born-convolution_re,born-convolution_im");
        assert_eq!(lines.len(), 4 + 24);
    }
}
