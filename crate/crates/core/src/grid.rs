//! Uniform square grids and the sampled fields that live on them.
//!
//! A grid of resolution `N` and half-width `r_s` has spacing `h = 2 r_s / N`
//! and nodes `h * (i - N/2)` for `i = 0..N` along each axis, so the origin is
//! the node `(N/2, N/2)` and the square `[-r_s, r_s)` is covered. Field values
//! are stored row-major with `x2` as the slow index: the value at node
//! `(i1, i2)` lives at `i2 * N + i1`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    half_width: f64,
    resolution: usize,
}

impl Grid {
    pub fn new(half_width: f64, resolution: usize) -> Result<Self> {
        ensure!(
            half_width.is_finite() && half_width > 0.0,
            "grid half-width must be positive, got {half_width}"
        );
        ensure!(
            resolution >= 2 && resolution.is_multiple_of(2),
            "grid resolution must be an even integer >= 2, got {resolution}"
        );
        Ok(Self { half_width, resolution })
    }

    /// Smallest grid with spacing at most `spacing` covering `[-half_width, half_width)`.
    pub fn with_spacing(half_width: f64, spacing: f64) -> Result<Self> {
        ensure!(spacing > 0.0, "grid spacing must be positive");
        let n = (2.0 * half_width / spacing - 1e-9).ceil() as usize;
        let n = n + n % 2;
        Grid::new(n as f64 * spacing / 2.0, n.max(2))
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.resolution as f64
    }

    /// Number of nodes, `N^2`.
    pub fn len(&self) -> usize {
        self.resolution * self.resolution
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Coordinate of node index `i` along one axis.
    #[inline]
    pub fn coord(&self, i: usize) -> f64 {
        (i as f64 - (self.resolution / 2) as f64) * self.spacing()
    }

    #[inline]
    pub fn node(&self, i1: usize, i2: usize) -> [f64; 2] {
        [self.coord(i1), self.coord(i2)]
    }

    #[inline]
    pub fn index(&self, i1: usize, i2: usize) -> usize {
        i2 * self.resolution + i1
    }

    /// Inverse of [`Grid::index`].
    #[inline]
    pub fn unindex(&self, idx: usize) -> (usize, usize) {
        (idx % self.resolution, idx / self.resolution)
    }

    pub fn coords(&self) -> Vec<f64> {
        (0..self.resolution).map(|i| self.coord(i)).collect()
    }

    /// Continuous index of coordinate `x` (node `i` sits at `i`).
    #[inline]
    pub fn fractional_index(&self, x: f64) -> f64 {
        x / self.spacing() + (self.resolution / 2) as f64
    }

    /// Node nearest to `x`, or `None` if `x` lies outside the node range.
    pub fn nearest_node(&self, x: [f64; 2]) -> Option<(usize, usize)> {
        let last = (self.resolution - 1) as f64;
        let f1 = self.fractional_index(x[0]).round();
        let f2 = self.fractional_index(x[1]).round();
        if (0.0..=last).contains(&f1) && (0.0..=last).contains(&f2) {
            Some((f1 as usize, f2 as usize))
        } else {
            None
        }
    }

    /// Bilinear stencil of `x`: four `(node index, weight)` pairs, or `None`
    /// outside the cell range `[coord(0), coord(N-1)]^2`.
    ///
    /// Weights within `1e-9` of an integer are snapped so that points on nodes
    /// touch exactly one node.
    pub fn bilinear_stencil(&self, x: [f64; 2]) -> Option<[(usize, f64); 4]> {
        let n = self.resolution;
        let last = (n - 1) as f64;
        let snap = |v: f64| {
            let r = v.round();
            if (v - r).abs() < 1e-9 {
                r
            } else {
                v
            }
        };
        let f1 = snap(self.fractional_index(x[0]));
        let f2 = snap(self.fractional_index(x[1]));
        if !(0.0..=last).contains(&f1) || !(0.0..=last).contains(&f2) {
            return None;
        }
        let i1 = (f1.floor() as usize).min(n - 2);
        let i2 = (f2.floor() as usize).min(n - 2);
        let t1 = f1 - i1 as f64;
        let t2 = f2 - i2 as f64;
        Some([
            (self.index(i1, i2), (1.0 - t1) * (1.0 - t2)),
            (self.index(i1 + 1, i2), t1 * (1.0 - t2)),
            (self.index(i1, i2 + 1), (1.0 - t1) * t2),
            (self.index(i1 + 1, i2 + 1), t1 * t2),
        ])
    }

    /// Mask of nodes inside the centred square of side `side`
    /// (all nodes when `side` is `None`).
    pub fn window_mask(&self, side: Option<f64>) -> Result<Vec<bool>> {
        let n = self.resolution;
        match side {
            None => Ok(vec![true; self.len()]),
            Some(s) => {
                ensure!(s > 0.0, "window side must be positive");
                ensure!(
                    s <= 2.0 * self.half_width + 1e-12,
                    "window side {s} exceeds grid extent {}",
                    2.0 * self.half_width
                );
                let half = s / 2.0 + 1e-12;
                let mut mask = vec![false; self.len()];
                for i2 in 0..n {
                    for i1 in 0..n {
                        let [x1, x2] = self.node(i1, i2);
                        mask[self.index(i1, i2)] = x1.abs() <= half && x2.abs() <= half;
                    }
                }
                Ok(mask)
            }
        }
    }
}

/// Samples of a scalar quantity on a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct Field<T> {
    grid: Grid,
    values: Vec<T>,
}

pub type RealField = Field<f64>;
pub type ComplexField = Field<Complex64>;

/// Scalars allowed in a [`Field`].
pub trait Sample: Copy + Default + PartialEq + std::fmt::Debug + Send + Sync {
    fn is_finite_sample(&self) -> bool;
}

impl Sample for f64 {
    fn is_finite_sample(&self) -> bool {
        self.is_finite()
    }
}

impl Sample for Complex64 {
    fn is_finite_sample(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

impl<T: Sample> Field<T> {
    pub fn new(grid: Grid, values: Vec<T>) -> Result<Self> {
        ensure!(
            values.len() == grid.len(),
            "field has {} values, grid needs {}",
            values.len(),
            grid.len()
        );
        if let Some(pos) = values.iter().position(|v| !v.is_finite_sample()) {
            return Err(Error::invalid(format!("non-finite field value at index {pos}")));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self { grid, values: vec![T::default(); grid.len()] }
    }

    pub fn constant(grid: Grid, value: T) -> Self {
        Self { grid, values: vec![value; grid.len()] }
    }

    /// Samples `func` at every node.
    pub fn from_fn(grid: Grid, mut func: impl FnMut([f64; 2]) -> T) -> Self {
        let n = grid.resolution();
        let mut values = Vec::with_capacity(grid.len());
        for i2 in 0..n {
            for i1 in 0..n {
                values.push(func(grid.node(i1, i2)));
            }
        }
        Self { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn at(&self, i1: usize, i2: usize) -> T {
        self.values[self.grid.index(i1, i2)]
    }

    pub fn map<U: Sample>(&self, func: impl Fn(T) -> U) -> Field<U> {
        Field { grid: self.grid, values: self.values.iter().map(|&v| func(v)).collect() }
    }

    pub(crate) fn check_same_grid<U>(&self, other: &Field<U>) -> Result<()> {
        ensure!(
            self.grid == other.grid,
            "grid mismatch: {:?} vs {:?}",
            self.grid,
            other.grid
        );
        Ok(())
    }
}

impl RealField {
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn to_complex(&self) -> ComplexField {
        self.map(|v| Complex64::new(v, 0.0))
    }
}

impl ComplexField {
    pub fn real_part(&self) -> RealField {
        self.map(|v| v.re)
    }

    /// Bilinear interpolation at an arbitrary point; `None` outside the node range.
    pub fn interpolate(&self, x: [f64; 2]) -> Option<Complex64> {
        self.grid
            .bilinear_stencil(x)
            .map(|st| st.iter().map(|&(i, w)| self.values[i] * w).sum())
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_grid_nodes() {
        let g = Grid::new(10.0, 4).unwrap();
        assert_eq!(g.coords(), vec![-10.0, -5.0, 0.0, 5.0]);
        assert_eq!(g.node(2, 2), [0.0, 0.0]);
    }

    #[test]
    fn spacing_from_half_width_and_resolution() {
        let n = 240;
        let rs = n as f64 / (8.0 * 2f64.sqrt());
        let g = Grid::new(rs, n).unwrap();
        assert!((g.spacing() - 1.0 / (4.0 * 2f64.sqrt())).abs() < 1e-12);
        assert!((g.spacing() - 0.17678).abs() < 1e-5);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(Grid::new(10.0, 3).is_err());
        assert!(Grid::new(10.0, 0).is_err());
        assert!(Grid::new(0.0, 4).is_err());
        assert!(Grid::new(-1.0, 4).is_err());
    }

    #[test]
    fn with_spacing_rounds_up_to_even() {
        let g = Grid::with_spacing(20.0, 0.1).unwrap();
        assert_eq!(g.resolution(), 400);
        assert!((g.spacing() - 0.1).abs() < 1e-12);
        let g = Grid::with_spacing(1.05, 0.1).unwrap();
        assert_eq!(g.resolution(), 22);
    }

    #[test]
    fn bilinear_reproduces_linear_functions() {
        let g = Grid::new(2.0, 16).unwrap();
        let f = ComplexField::from_fn(g, |x| Complex64::new(3.0 * x[0] - x[1] + 0.5, x[1]));
        for p in [[0.13, -0.71], [1.2, 1.1], [-2.0, 0.0]] {
            let v = f.interpolate(p).unwrap();
            assert!((v - Complex64::new(3.0 * p[0] - p[1] + 0.5, p[1])).norm() < 1e-12);
        }
        assert!(f.interpolate([2.0, 0.0]).is_none());
    }

    #[test]
    fn window_mask_counts() {
        let g = Grid::new(10.0, 20).unwrap();
        let m = g.window_mask(Some(4.0)).unwrap();
        // nodes -2, -1, 0, 1, 2 on each axis
        assert_eq!(m.iter().filter(|&&b| b).count(), 25);
        assert!(g.window_mask(Some(30.0)).is_err());
    }

    #[test]
    fn field_rejects_wrong_length_and_nan() {
        let g = Grid::new(1.0, 2).unwrap();
        assert!(RealField::new(g, vec![0.0; 3]).is_err());
        assert!(RealField::new(g, vec![0.0, 1.0, f64::NAN, 0.0]).is_err());
    }
}
