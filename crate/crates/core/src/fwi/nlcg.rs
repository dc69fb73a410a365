//! Polak-Ribiere+ nonlinear conjugate gradients with a backtracking Armijo
//! line search.
//!
//! Each line search first tries the initial step `t0`, then the minimiser of
//! the parabola through `J(0)`, `J'(0)` and `J(t0)` when it is convex. The
//! lower of the two values is taken if it satisfies the Armijo condition;
//! otherwise the step is halved from `t0`.

use serde::{Deserialize, Serialize};

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineSearch {
    /// Sufficient-decrease constant.
    pub c1: f64,
    pub max_trials: usize,
    /// Initial step: its largest nodal update is this fraction of the
    /// parameter scale.
    pub initial_fraction: f64,
}

impl Default for LineSearch {
    fn default() -> Self {
        Self { c1: 1e-4, max_trials: 20, initial_fraction: 0.01 }
    }
}

/// Direction memory of the conjugate-gradient iteration.
#[derive(Debug, Clone, Default)]
pub struct Nlcg {
    prev_grad: Option<Vec<f64>>,
    prev_dir: Option<Vec<f64>>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `beta = max(0, <g, g - g_prev> / |g_prev|^2)`.
pub fn polak_ribiere_plus(grad: &[f64], prev: &[f64]) -> f64 {
    let den = dot(prev, prev);
    if den == 0.0 {
        return 0.0;
    }
    let num: f64 = grad.iter().zip(prev).map(|(g, p)| g * (g - p)).sum();
    (num / den).max(0.0)
}

impl Nlcg {
    /// Forgets the previous direction; the next one is steepest descent.
    pub fn restart(&mut self) {
        self.prev_grad = None;
        self.prev_dir = None;
    }

    /// `d = -g + beta d_prev`, falling back to `-g` when that is not a
    /// descent direction.
    pub fn direction(&mut self, grad: &[f64]) -> Vec<f64> {
        let mut d: Vec<f64> = grad.iter().map(|g| -g).collect();
        if let (Some(pg), Some(pd)) = (&self.prev_grad, &self.prev_dir) {
            let beta = polak_ribiere_plus(grad, pg);
            for (di, pdi) in d.iter_mut().zip(pd) {
                *di += beta * pdi;
            }
            if dot(&d, grad) >= 0.0 {
                d = grad.iter().map(|g| -g).collect();
            }
        }
        self.prev_grad = Some(grad.to_vec());
        self.prev_dir = Some(d.clone());
        d
    }
}

/// Outcome of a line search.
#[derive(Debug, Clone, PartialEq)]
pub enum StepOutcome<T> {
    Accepted { step: f64, value: f64, payload: T },
    Failed,
}

/// Backtracking search along a direction with slope `slope = <g, d> < 0`.
///
/// `eval(t)` returns the objective at step `t` with a payload, or `None` if
/// the trial point is inadmissible.
pub fn armijo<T>(
    params: &LineSearch,
    f0: f64,
    slope: f64,
    t0: f64,
    mut eval: impl FnMut(f64) -> Result<Option<(f64, T)>>,
) -> Result<StepOutcome<T>> {
    if !(slope < 0.0) || !(t0 > 0.0) {
        return Ok(StepOutcome::Failed);
    }
    let ok = |t: f64, v: f64| v <= f0 + params.c1 * t * slope;
    let first = eval(t0)?;
    let mut best: Option<(f64, f64, T)> = None;
    if let Some((v0, p0)) = first {
        let curvature = v0 - f0 - slope * t0;
        if curvature > 0.0 {
            let t_star = -slope * t0 * t0 / (2.0 * curvature);
            if t_star.is_finite() && t_star > 0.0 && (t_star - t0).abs() > 1e-12 * t0 {
                if let Some((v1, p1)) = eval(t_star)? {
                    if ok(t_star, v1) && v1 <= v0 {
                        best = Some((t_star, v1, p1));
                    }
                }
            }
        }
        if best.is_none() && ok(t0, v0) {
            best = Some((t0, v0, p0));
        }
    }
    if let Some((step, value, payload)) = best {
        return Ok(StepOutcome::Accepted { step, value, payload });
    }
    let mut t = t0;
    for _ in 1..params.max_trials {
        t *= 0.5;
        if let Some((v, p)) = eval(t)? {
            if ok(t, v) {
                return Ok(StepOutcome::Accepted { step: t, value: v, payload: p });
            }
        }
    }
    Ok(StepOutcome::Failed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_direction_is_steepest_descent() {
        let mut cg = Nlcg::default();
        assert_eq!(cg.direction(&[1.0, -2.0]), vec![-1.0, 2.0]);
    }

    #[test]
    fn repeated_gradient_gives_zero_beta() {
        assert_eq!(polak_ribiere_plus(&[1.0, 2.0], &[1.0, 2.0]), 0.0);
        let mut cg = Nlcg::default();
        cg.direction(&[1.0, 2.0]);
        assert_eq!(cg.direction(&[1.0, 2.0]), vec![-1.0, -2.0]);
    }

    #[test]
    fn quadratic_converges_like_linear_cg() {
        // J(c) = 1/2 (c - c*)^T H (c - c*) with a fixed SPD H
        let dim = 10;
        let h: Vec<Vec<f64>> = (0..dim)
            .map(|i| (0..dim).map(|j| if i == j { 2.0 + i as f64 } else { 0.3 / (1.0 + (i as f64 - j as f64).abs()) }).collect())
            .collect();
        let target: Vec<f64> = (0..dim).map(|i| 1.0 + 0.1 * i as f64).collect();
        let value = |c: &[f64]| {
            let e: Vec<f64> = c.iter().zip(&target).map(|(a, b)| a - b).collect();
            let he: Vec<f64> = h.iter().map(|row| dot(row, &e)).collect();
            (0.5 * dot(&e, &he), he)
        };
        let mut c = vec![1.0; dim];
        let mut cg = Nlcg::default();
        let params = LineSearch::default();
        for _ in 0..3 * dim {
            let (f0, g) = value(&c);
            if dot(&g, &g).sqrt() < 1e-12 {
                break;
            }
            let d = cg.direction(&g);
            let dmax = d.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let t0 = params.initial_fraction * c.iter().fold(0.0f64, |m, v| m.max(v.abs())) / dmax;
            let out = armijo(&params, f0, dot(&g, &d), t0, |t| {
                let trial: Vec<f64> = c.iter().zip(&d).map(|(a, b)| a + t * b).collect();
                Ok(Some((value(&trial).0, trial)))
            })
            .unwrap();
            match out {
                StepOutcome::Accepted { payload, value: v, .. } => {
                    assert!(v <= f0);
                    c = payload;
                }
                StepOutcome::Failed => break,
            }
        }
        let err = c.iter().zip(&target).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-8, "{err}");
    }

    #[test]
    fn failure_when_no_decrease() {
        let out = armijo(&LineSearch::default(), 1.0, -1.0, 1.0, |_t| Ok(Some((2.0, ())))).unwrap();
        assert_eq!(out, StepOutcome::Failed);
        let out = armijo(&LineSearch::default(), 1.0, 1.0, 1.0, |_t| Ok(Some((0.0, ())))).unwrap();
        assert_eq!(out, StepOutcome::Failed);
    }

    #[test]
    fn backtracks_past_inadmissible_points() {
        let out = armijo(&LineSearch::default(), 1.0, -1.0, 8.0, |t| Ok((t <= 1.0).then_some((1.0 - 0.5 * t, ())))).unwrap();
        match out {
            StepOutcome::Accepted { step, .. } => assert_eq!(step, 1.0),
            StepOutcome::Failed => panic!("expected a step"),
        }
    }
}
