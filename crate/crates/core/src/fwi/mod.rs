//! Adjoint-state full waveform inversion.
//!
//! For one angular frequency `omega` the misfit is
//!
//! ```text
//! J(m) = 1/2 sum_alpha w_q | R_alpha u_alpha(m) - d_alpha |^2,   A(m) u_alpha = b_alpha
//! ```
//!
//! with `w_q = 2 l_M / m` the receiver quadrature weight. Its gradient with
//! respect to the nodal parameters uses the discrete adjoint
//! `A^H lambda = R^T w_q (R u - d)`:
//!
//! ```text
//! dJ/dm_n = -Re sum_alpha conj(lambda_n) (dA_nn/dm_n) u_n
//! ```
//!
//! Angles are realised by rotating sources and receivers, so one
//! factorisation serves all angles of a frequency.

mod nlcg;

pub use nlcg::{armijo, polak_ribiere_plus, LineSearch, Nlcg, StepOutcome};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::acquisition::{rotate, DataKind, Dataset, REFERENCE_OMEGA};
use crate::error::{ensure, Error, Result};
use crate::grid::{ComplexField, Grid, RealField};
use crate::helmholtz::{assemble, boundary_weight, rhs_for, sample_points, spread_points, SourceSpec};
use crate::metrics::psnr;
use crate::phantom::{potential_to_speed, speed_to_potential};

const SOLVE_CHUNK: usize = 8;

/// Unknown of the inversion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parameter {
    /// Wave speed `c`; `k = omega / c`.
    #[default]
    Speed,
    /// Potential `f` at the reference frequency; `k^2 = k0^2 + (omega/omega_ref)^2 f`.
    Potential,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FwiConfig {
    /// Angular frequencies, ascending; each must match a wavenumber of the data.
    pub frequencies: Vec<f64>,
    /// NLCG iterations per frequency.
    pub iterations: usize,
    /// Radius of the ball in which the model may change. Defaults to the
    /// receiver height.
    #[serde(default)]
    pub window_radius: Option<f64>,
    #[serde(default)]
    pub line_search: LineSearch,
    #[serde(default)]
    pub parameter: Parameter,
}

impl FwiConfig {
    pub fn validate(&self) -> Result<()> {
        ensure!(!self.frequencies.is_empty(), "frequency schedule is empty");
        ensure!(
            self.frequencies.iter().all(|w| w.is_finite() && *w > 0.0),
            "frequencies must be positive"
        );
        ensure!(
            self.frequencies.windows(2).all(|w| w[1] > w[0]),
            "frequencies must be strictly ascending"
        );
        ensure!(self.iterations >= 1, "at least one iteration per frequency is required");
        if let Some(r) = self.window_radius {
            ensure!(r.is_finite() && r > 0.0, "window radius must be positive");
        }
        let ls = &self.line_search;
        ensure!(ls.c1 > 0.0 && ls.c1 < 1.0, "Armijo constant must lie in (0, 1)");
        ensure!(ls.max_trials >= 1, "line search needs at least one trial");
        ensure!(ls.initial_fraction > 0.0, "initial step fraction must be positive");
        Ok(())
    }
}

/// Misfit and, when requested, its gradient at one model.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub misfit: f64,
    pub gradient: Option<Vec<f64>>,
}

/// Misfit and gradient machinery for one frequency of a dataset.
pub struct FwiProblem<'a> {
    data: &'a Dataset,
    grid: Grid,
    k_index: usize,
    omega: f64,
    parameter: Parameter,
    mask: Vec<bool>,
    weight: f64,
    sources: Vec<Vec<Complex64>>,
    receivers: Vec<Vec<[f64; 2]>>,
}

impl<'a> FwiProblem<'a> {
    pub fn new(data: &'a Dataset, grid: Grid, omega: f64, config: &FwiConfig) -> Result<Self> {
        ensure!(data.kind == DataKind::Total, "FWI needs total-field data, got {:?}", data.kind);
        let acq = &data.acquisition;
        ensure!(!acq.source.is_plane_wave(), "FWI needs point or line sources");
        ensure!(
            acq.extent() <= grid.half_width() - grid.spacing(),
            "sources/receivers reach radius {:.3}, beyond the grid interior",
            acq.extent()
        );
        let k_index = acq
            .wavenumbers
            .iter()
            .position(|&k| (acq.omega(k) - omega).abs() <= 1e-9 * omega)
            .ok_or_else(|| Error::invalid(format!("dataset has no wavenumber for omega = {omega}")))?;
        let radius = config.window_radius.unwrap_or(acq.receiver_height.abs());
        let mask = (0..grid.len())
            .map(|idx| {
                let (i1, i2) = grid.unindex(idx);
                let x = grid.node(i1, i2);
                x[0].hypot(x[1]) < radius
            })
            .collect();
        let rx = acq.receiver_x();
        let positions = acq.source.positions();
        let mut sources = Vec::with_capacity(acq.n_angles);
        let mut receivers = Vec::with_capacity(acq.n_angles);
        for alpha in acq.angles() {
            let src = positions.iter().map(|&p| rotate(alpha, p)).collect();
            sources.push(rhs_for(&SourceSpec::Line(src), &grid)?);
            receivers.push(rx.iter().map(|&x| rotate(alpha, [x, acq.receiver_height])).collect());
        }
        Ok(Self {
            data,
            grid,
            k_index,
            omega,
            parameter: config.parameter,
            mask,
            weight: acq.receiver_spacing(),
            sources,
            receivers,
        })
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    fn k0(&self) -> f64 {
        self.omega / self.data.acquisition.c0
    }

    fn scale(&self) -> f64 {
        (self.omega / REFERENCE_OMEGA).powi(2)
    }

    /// Wavenumber field of the model, or `None` if the model is inadmissible.
    fn wavenumbers(&self, m: &[f64]) -> Option<RealField> {
        let k0 = self.k0();
        let s = self.scale();
        let mut k = Vec::with_capacity(m.len());
        for &v in m {
            let kv = match self.parameter {
                Parameter::Speed if v > 0.0 => self.omega / v,
                Parameter::Potential if k0 * k0 + s * v > 0.0 => (k0 * k0 + s * v).sqrt(),
                _ => return None,
            };
            k.push(kv);
        }
        RealField::new(self.grid, k).ok()
    }

    /// `dA_nn / dm_n` given `k_n`.
    fn sensitivity(&self, idx: usize, k: f64) -> Complex64 {
        let n = self.grid.resolution();
        let h = self.grid.spacing();
        let (i1, i2) = self.grid.unindex(idx);
        let (w, edge) = boundary_weight(n, i1, i2);
        let e = if edge { 1.0 } else { 0.0 };
        match self.parameter {
            Parameter::Speed => {
                let c = self.omega / k;
                Complex64::new(w * 2.0 * self.omega * self.omega / c.powi(3), e * self.omega / (c * c * h))
            }
            Parameter::Potential => {
                let s = self.scale();
                Complex64::new(-w * s, -e * s / (2.0 * k * h))
            }
        }
    }

    /// Misfit at `m`; the gradient is computed when `want_gradient(misfit)`
    /// holds. Returns `None` for inadmissible models.
    pub fn evaluate(&self, m: &[f64], want_gradient: impl Fn(f64) -> bool) -> Result<Option<Evaluation>> {
        ensure!(m.len() == self.grid.len(), "model has {} values, grid has {}", m.len(), self.grid.len());
        let Some(k) = self.wavenumbers(m) else {
            return Ok(None);
        };
        let op = match assemble(&k, self.omega) {
            Ok(op) => op,
            Err(Error::InvalidArgument(msg)) => {
                log::debug!("rejecting model: {msg}");
                return Ok(None);
            }
            Err(e) => return Err(e),
        };
        let n_angles = self.sources.len();
        let fields: Vec<ComplexField> = self
            .sources
            .par_chunks(SOLVE_CHUNK)
            .map(|chunk| op.solve(chunk))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .flatten()
            .collect();
        let mut residuals = Vec::with_capacity(n_angles);
        let mut misfit = 0.0;
        for (ai, u) in fields.iter().enumerate() {
            let observed = &self.data.trace(self.k_index, ai).values;
            let r: Vec<Complex64> = sample_points(u, &self.receivers[ai])?
                .iter()
                .zip(observed)
                .map(|(a, b)| a - b)
                .collect();
            misfit += 0.5 * self.weight * r.iter().map(|v| v.norm_sqr()).sum::<f64>();
            residuals.push(r);
        }
        if !misfit.is_finite() {
            return Err(Error::numerical("misfit is not finite"));
        }
        if !want_gradient(misfit) {
            return Ok(Some(Evaluation { misfit, gradient: None }));
        }

        let adjoint_rhs: Vec<Vec<Complex64>> = residuals
            .iter()
            .zip(&self.receivers)
            .map(|(r, rec)| {
                let wr: Vec<Complex64> = r.iter().map(|v| v * self.weight).collect();
                spread_points(&self.grid, rec, &wr)
            })
            .collect::<Result<_>>()?;
        let partial: Vec<Vec<Complex64>> = adjoint_rhs
            .par_chunks(SOLVE_CHUNK)
            .zip(fields.par_chunks(SOLVE_CHUNK))
            .map(|(rhs, us)| {
                let lambdas = op.solve_adjoint(rhs)?;
                let mut acc = vec![Complex64::default(); self.grid.len()];
                for (lambda, u) in lambdas.iter().zip(us) {
                    for ((a, l), v) in acc.iter_mut().zip(lambda.values()).zip(u.values()) {
                        *a += l.conj() * v;
                    }
                }
                Ok(acc)
            })
            .collect::<Result<_>>()?;
        let mut corr = vec![Complex64::default(); self.grid.len()];
        for p in &partial {
            for (c, v) in corr.iter_mut().zip(p) {
                *c += v;
            }
        }
        let gradient = corr
            .iter()
            .enumerate()
            .map(|(idx, c)| {
                if self.mask[idx] {
                    -(c * self.sensitivity(idx, k.values()[idx])).re
                } else {
                    0.0
                }
            })
            .collect();
        Ok(Some(Evaluation { misfit, gradient: Some(gradient) }))
    }
}

fn model_from_speed(c: &RealField, parameter: Parameter, c0: f64) -> Result<Vec<f64>> {
    match parameter {
        Parameter::Speed => {
            ensure!(c.values().iter().all(|&v| v > 0.0), "wave speed must be positive");
            Ok(c.values().to_vec())
        }
        Parameter::Potential => Ok(speed_to_potential(c, REFERENCE_OMEGA, c0)?.into_values()),
    }
}

fn speed_from_model(m: &[f64], grid: Grid, parameter: Parameter, c0: f64) -> Result<RealField> {
    let field = RealField::new(grid, m.to_vec())?;
    match parameter {
        Parameter::Speed => Ok(field),
        Parameter::Potential => potential_to_speed(&field, REFERENCE_OMEGA, c0),
    }
}

fn problem_for<'a>(c: &RealField, data: &'a Dataset, omega: f64, config: &FwiConfig) -> Result<(FwiProblem<'a>, Vec<f64>)> {
    let problem = FwiProblem::new(data, *c.grid(), omega, config)?;
    let m = model_from_speed(c, config.parameter, data.acquisition.c0)?;
    Ok((problem, m))
}

/// Misfit of the speed model `c` against the data at frequency `omega`.
pub fn misfit(c: &RealField, data: &Dataset, omega: f64, config: &FwiConfig) -> Result<f64> {
    let (problem, m) = problem_for(c, data, omega, config)?;
    problem
        .evaluate(&m, |_| false)?
        .map(|e| e.misfit)
        .ok_or_else(|| Error::invalid("model is not admissible"))
}

/// Gradient of [`misfit`] with respect to the configured parameter, zero
/// outside the inversion window.
pub fn gradient(c: &RealField, data: &Dataset, omega: f64, config: &FwiConfig) -> Result<RealField> {
    let (problem, m) = problem_for(c, data, omega, config)?;
    let g = problem
        .evaluate(&m, |_| true)?
        .and_then(|e| e.gradient)
        .ok_or_else(|| Error::invalid("model is not admissible"))?;
    RealField::new(*c.grid(), g)
}

/// Iteration state carried through the frequency loop.
#[derive(Debug, Clone)]
pub struct FwiState {
    pub model: Vec<f64>,
    /// Global iteration counter across all frequency blocks.
    pub iteration: usize,
    pub nlcg: Nlcg,
    pub misfits: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum BlockStatus {
    Completed,
    /// The gradient vanished.
    Stationary,
    LineSearchFailed,
    Error { message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockReport {
    pub omega: f64,
    /// Misfit before the first and after every accepted iteration.
    pub misfits: Vec<f64>,
    pub iterations: usize,
    #[serde(flatten)]
    pub status: BlockStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub psnr: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FwiReport {
    pub parameter: Parameter,
    pub blocks: Vec<BlockReport>,
    pub total_iterations: usize,
}

#[derive(Debug, Clone)]
pub struct FwiOutcome {
    pub speed: RealField,
    /// Potential at the reference frequency.
    pub potential: RealField,
    pub report: FwiReport,
    /// Wall-clock seconds per frequency block.
    pub block_seconds: Vec<f64>,
}

/// Ground truth for per-block PSNR.
#[derive(Debug, Clone, Copy)]
pub struct Truth<'a> {
    pub potential: &'a RealField,
    pub window: Option<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Runs the frequency continuation: each frequency of the schedule in turn,
/// `iterations` NLCG steps each, starting from `initial_speed`.
///
/// Numerical failures inside a block stop the run and are recorded in the
/// report; the model reached so far is returned.
pub fn fwi_run(
    config: &FwiConfig,
    initial_speed: &RealField,
    data: &Dataset,
    truth: Option<Truth<'_>>,
) -> Result<FwiOutcome> {
    config.validate()?;
    let grid = *initial_speed.grid();
    let c0 = data.acquisition.c0;
    let problems: Vec<FwiProblem<'_>> = config
        .frequencies
        .iter()
        .map(|&w| FwiProblem::new(data, grid, w, config))
        .collect::<Result<_>>()?;
    let mut state = FwiState {
        model: model_from_speed(initial_speed, config.parameter, c0)?,
        iteration: 0,
        nlcg: Nlcg::default(),
        misfits: Vec::new(),
    };
    let fallback_scale = match config.parameter {
        Parameter::Speed => 1.0,
        Parameter::Potential => (REFERENCE_OMEGA / c0).powi(2),
    };
    let mut blocks = Vec::with_capacity(problems.len());
    let mut block_seconds = Vec::with_capacity(problems.len());
    for problem in &problems {
        let started = std::time::Instant::now();
        let (misfits, iterations, status) = run_block(problem, config, &mut state, fallback_scale);
        block_seconds.push(started.elapsed().as_secs_f64());
        let psnr = match truth {
            Some(t) => {
                let f = speed_from_model(&state.model, grid, config.parameter, c0)
                    .and_then(|c| speed_to_potential(&c, REFERENCE_OMEGA, c0))?;
                psnr(t.potential, &f, t.window).ok()
            }
            None => None,
        };
        log::info!(
            "omega {:.4}: {} iterations, misfit {:.4e} -> {:.4e}",
            problem.omega(),
            iterations,
            misfits.first().copied().unwrap_or(f64::NAN),
            misfits.last().copied().unwrap_or(f64::NAN)
        );
        let stop = matches!(status, BlockStatus::Error { .. });
        blocks.push(BlockReport { omega: problem.omega(), misfits, iterations, status, psnr });
        if stop {
            break;
        }
    }
    let speed = speed_from_model(&state.model, grid, config.parameter, c0)?;
    let potential = speed_to_potential(&speed, REFERENCE_OMEGA, c0)?;
    Ok(FwiOutcome {
        speed,
        potential,
        report: FwiReport { parameter: config.parameter, blocks, total_iterations: state.iteration },
        block_seconds,
    })
}

fn run_block(
    problem: &FwiProblem<'_>,
    config: &FwiConfig,
    state: &mut FwiState,
    fallback_scale: f64,
) -> (Vec<f64>, usize, BlockStatus) {
    let mut misfits = Vec::new();
    let mut iterations = 0;
    let fail = |e: Error| BlockStatus::Error { message: e.to_string() };
    state.nlcg.restart();
    let mut current = match problem.evaluate(&state.model, |_| true) {
        Ok(Some(e)) => e,
        Ok(None) => return (misfits, 0, fail(Error::invalid("initial model is not admissible"))),
        Err(e) => return (misfits, 0, fail(e)),
    };
    misfits.push(current.misfit);
    state.misfits.push(current.misfit);
    let params = config.line_search;
    for _ in 0..config.iterations {
        let g = current.gradient.take().unwrap_or_default();
        if g.iter().all(|v| *v == 0.0) {
            return (misfits, iterations, BlockStatus::Stationary);
        }
        let d = state.nlcg.direction(&g);
        let slope = dot(&g, &d);
        let scale = match max_abs(&state.model) {
            s if s > 0.0 => s,
            _ => fallback_scale,
        };
        let t0 = params.initial_fraction * scale / max_abs(&d);
        let f0 = current.misfit;
        let model = &state.model;
        let outcome = armijo(&params, f0, slope, t0, |t| {
            let trial: Vec<f64> = model.iter().zip(&d).map(|(m, di)| m + t * di).collect();
            let armijo_ok = |v: f64| v <= f0 + params.c1 * t * slope;
            Ok(problem.evaluate(&trial, armijo_ok)?.map(|e| (e.misfit, (trial, e))))
        });
        match outcome {
            Ok(StepOutcome::Accepted { payload: (trial, eval), value, .. }) => {
                state.model = trial;
                current = eval;
                misfits.push(value);
                state.misfits.push(value);
                state.iteration += 1;
                iterations += 1;
            }
            Ok(StepOutcome::Failed) => return (misfits, iterations, BlockStatus::LineSearchFailed),
            Err(e) => return (misfits, iterations, fail(e)),
        }
    }
    (misfits, iterations, BlockStatus::Completed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::acquisition::{AcquisitionConfig, SourceGeometry};
    use crate::helmholtz::{forward_dataset, ForwardOptions};
    use crate::noise::GaussianSource;
    use crate::phantom::disk_potential;
    use std::f64::consts::PI;

    const OMEGA: f64 = PI;

    fn small_grid() -> Grid {
        Grid::new(4.0, 32).unwrap()
    }

    fn acq() -> AcquisitionConfig {
        AcquisitionConfig {
            n_angles: 4,
            wavenumbers: vec![OMEGA],
            c0: 1.0,
            source: SourceGeometry::Point { position: [0.0, -3.0] },
            receiver_height: 2.5,
            receiver_half_width: 2.0,
            receiver_count: 8,
            noise_snr_db: None,
            seed: 0,
        }
    }

    fn config() -> FwiConfig {
        FwiConfig {
            frequencies: vec![OMEGA],
            iterations: 3,
            window_radius: None,
            line_search: LineSearch::default(),
            parameter: Parameter::Speed,
        }
    }

    fn data_for(f: &RealField) -> Dataset {
        forward_dataset(f, &acq(), ForwardOptions::default()).unwrap().total
    }

    fn speed_of(f: &RealField) -> RealField {
        potential_to_speed(f, REFERENCE_OMEGA, 1.0).unwrap()
    }

    #[test]
    fn self_consistent_data_has_zero_misfit() {
        let f = disk_potential(1.0, 2.0, &small_grid()).unwrap();
        let data = data_for(&f);
        let j = misfit(&speed_of(&f), &data, OMEGA, &config()).unwrap();
        let dnorm: f64 = data.traces.iter().flat_map(|t| &t.values).map(|v| v.norm_sqr()).sum();
        assert!(j <= 1e-12 * dnorm, "{j}");
    }

    #[test]
    fn doubling_residuals_quadruples_misfit() {
        let g = small_grid();
        let f = disk_potential(1.0, 2.0, &g).unwrap();
        let c = RealField::constant(g, 1.0);
        let mut data = data_for(&f);
        let bg = data_for(&RealField::zeros(g));
        let j1 = misfit(&c, &data, OMEGA, &config()).unwrap();
        for (t, b) in data.traces.iter_mut().zip(&bg.traces) {
            for (v, w) in t.values.iter_mut().zip(&b.values) {
                *v = w + 2.0 * (*v - w);
            }
        }
        let j2 = misfit(&c, &data, OMEGA, &config()).unwrap();
        assert!((j2 / j1 - 4.0).abs() < 1e-9, "{}", j2 / j1);
    }

    fn directional_check(parameter: Parameter) {
        let g = small_grid();
        let f = disk_potential(1.2, 3.0, &g).unwrap();
        let data = data_for(&f);
        let cfg = FwiConfig { parameter, ..config() };
        let base = RealField::from_fn(g, |x| 1.0 - 0.01 * (-(x[0] * x[0] + x[1] * x[1]) / 4.0).exp());
        let problem = FwiProblem::new(&data, g, OMEGA, &cfg).unwrap();
        let m = model_from_speed(&base, parameter, 1.0).unwrap();
        let grad = problem.evaluate(&m, |_| true).unwrap().unwrap().gradient.unwrap();
        let mut rng = GaussianSource::new(11);
        let mnorm = dot(&m, &m).sqrt().max(1.0);
        for _ in 0..3 {
            let dir: Vec<f64> =
                problem.mask().iter().map(|&inside| if inside { rng.real() } else { 0.0 }).collect();
            let eps = 1e-6 * mnorm / dot(&dir, &dir).sqrt();
            let at = |s: f64| {
                let trial: Vec<f64> = m.iter().zip(&dir).map(|(a, b)| a + s * b).collect();
                problem.evaluate(&trial, |_| false).unwrap().unwrap().misfit
            };
            let fd = (at(eps) - at(-eps)) / (2.0 * eps);
            let an = dot(&grad, &dir);
            assert!(((fd - an) / an).abs() < 1e-5, "{parameter:?}: fd {fd} adjoint {an}");
        }
    }

    #[test]
    fn speed_gradient_matches_finite_differences() {
        directional_check(Parameter::Speed);
    }

    #[test]
    fn potential_gradient_matches_finite_differences() {
        directional_check(Parameter::Potential);
    }

    #[test]
    fn gradient_vanishes_outside_window() {
        let g = small_grid();
        let data = data_for(&disk_potential(1.0, 2.0, &g).unwrap());
        let cfg = FwiConfig { window_radius: Some(1.5), ..config() };
        let grad = gradient(&RealField::constant(g, 1.0), &data, OMEGA, &cfg).unwrap();
        let mut inside = 0.0f64;
        for (idx, v) in grad.values().iter().enumerate() {
            let (i1, i2) = g.unindex(idx);
            let x = g.node(i1, i2);
            if x[0].hypot(x[1]) >= 1.5 {
                assert_eq!(*v, 0.0);
            } else {
                inside = inside.max(v.abs());
            }
        }
        assert!(inside > 0.0);
    }

    #[test]
    fn gradient_at_truth_is_stationary() {
        let g = small_grid();
        let f = disk_potential(1.0, 2.0, &g).unwrap();
        let data = data_for(&f);
        let at_truth = gradient(&speed_of(&f), &data, OMEGA, &config()).unwrap();
        let away = gradient(&RealField::constant(g, 1.0), &data, OMEGA, &config()).unwrap();
        assert!(at_truth.max_abs() <= 1e-6 * away.max_abs(), "{} vs {}", at_truth.max_abs(), away.max_abs());
    }

    #[test]
    fn background_data_leave_background_unchanged() {
        let g = small_grid();
        let data = data_for(&RealField::zeros(g));
        let c = RealField::constant(g, 1.0);
        let out = fwi_run(&config(), &c, &data, None).unwrap();
        let drift = out.speed.values().iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max);
        assert!(drift <= 1e-8, "{drift}");
    }

    #[test]
    fn misfit_decreases_within_block() {
        let g = small_grid();
        let f = disk_potential(1.2, 2.0, &g).unwrap();
        let data = data_for(&f);
        let cfg = FwiConfig { iterations: 4, ..config() };
        let out = fwi_run(&cfg, &RealField::constant(g, 1.0), &data, Some(Truth { potential: &f, window: None })).unwrap();
        let block = &out.report.blocks[0];
        assert!(block.iterations >= 1);
        assert!(block.misfits.windows(2).all(|w| w[1] <= w[0] + 1e-12));
        assert!(block.misfits.last().unwrap() < &block.misfits[0]);
        assert!(block.psnr.is_some());
    }

    #[test]
    fn runs_are_deterministic() {
        let g = small_grid();
        let data = data_for(&disk_potential(1.2, 2.0, &g).unwrap());
        let cfg = FwiConfig { iterations: 2, ..config() };
        let c = RealField::constant(g, 1.0);
        let a = fwi_run(&cfg, &c, &data, None).unwrap();
        let b = fwi_run(&cfg, &c, &data, None).unwrap();
        assert_eq!(a.speed, b.speed);
        assert_eq!(a.report, b.report);
    }

    #[test]
    fn rejects_bad_schedules_and_plane_waves() {
        let g = small_grid();
        let data = data_for(&RealField::zeros(g));
        let c = RealField::constant(g, 1.0);
        let bad = FwiConfig { frequencies: vec![2.0, 1.0], ..config() };
        assert!(matches!(fwi_run(&bad, &c, &data, None), Err(Error::InvalidArgument(_))));
        let missing = FwiConfig { frequencies: vec![1.0], ..config() };
        assert!(matches!(fwi_run(&missing, &c, &data, None), Err(Error::InvalidArgument(_))));
        let mut pw = data.clone();
        pw.acquisition.source = SourceGeometry::PlaneWave;
        assert!(FwiProblem::new(&pw, g, OMEGA, &config()).is_err());
    }
}
