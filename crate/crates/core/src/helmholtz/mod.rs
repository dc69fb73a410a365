//! Finite-difference Helmholtz solver on a square grid.
//!
//! The operator is `A = -Laplace - k(x)^2` with the 5-point Laplacian inside
//! and the absorbing condition `-i k u + du/dn = 0` on the boundary. The
//! boundary condition eliminates the ghost value of the centred normal
//! difference; boundary rows are then scaled by 1/2 (edges) and 1/4 (corners),
//! which makes `A` complex symmetric:
//!
//! ```text
//! A_nn = w_n (4/h^2 - k_n^2) - i e_n k_n / h        w = 1, 1/2, 1/4
//! A_nm = -1/h^2, or -1/(2 h^2) when n and m lie on the same boundary side
//! ```
//!
//! with `e_n = 1` on boundary nodes and 0 elsewhere. Right-hand sides are
//! multiplied by the same `w_n`.

mod dataset;
mod receivers;
mod source;

pub use dataset::{forward_dataset, ForwardModel, ForwardOptions, ForwardOutput, RotationMode};
pub use receivers::{
    calibrate_incident, sample_points, sample_receivers, scattered_from_total, spread_points,
};
pub use source::{rhs_for, SourceSpec};

use faer::sparse::linalg::LuError;
use faer::sparse::linalg::solvers::{Lu, SymbolicLu};
use faer::sparse::{SparseColMat, SymbolicSparseColMat};
use faer::{Mat, MatRef};
use num_complex::Complex64;

use crate::error::{ensure, Error, Result};
use crate::grid::{ComplexField, Grid, RealField};

/// Points per wavelength below which assembly fails.
pub const MIN_POINTS_PER_WAVELENGTH: f64 = 5.0;
/// Points per wavelength below which assembly logs a warning.
pub const WARN_POINTS_PER_WAVELENGTH: f64 = 10.0;

const RESIDUAL_TOLERANCE: f64 = 1e-8;
const SOLVE_BATCH: usize = 16;

/// Assembled and factorised `A` for one wavenumber field.
#[derive(Debug)]
pub struct MediumOperator {
    grid: Grid,
    omega: f64,
    k: RealField,
    matrix: SparseColMat<usize, Complex64>,
    symbolic: SymbolicLu<usize>,
    lu: Lu<usize, Complex64>,
}

/// Row weight `w_n` and boundary flag `e_n` of node `(i1, i2)`.
#[inline]
pub fn boundary_weight(n: usize, i1: usize, i2: usize) -> (f64, bool) {
    let b1 = i1 == 0 || i1 == n - 1;
    let b2 = i2 == 0 || i2 == n - 1;
    match (b1, b2) {
        (false, false) => (1.0, false),
        (true, true) => (0.25, true),
        _ => (0.5, true),
    }
}

/// Smallest number of grid points per local wavelength `2 pi / k`.
pub fn points_per_wavelength(k: &RealField) -> f64 {
    let kmax = k.max_abs();
    2.0 * std::f64::consts::PI / (kmax * k.grid().spacing())
}

fn pattern(grid: &Grid) -> SymbolicSparseColMat<usize> {
    let n = grid.resolution();
    let mut col_ptr = Vec::with_capacity(grid.len() + 1);
    let mut row_idx = Vec::with_capacity(5 * grid.len());
    col_ptr.push(0);
    for i2 in 0..n {
        for i1 in 0..n {
            let c = grid.index(i1, i2);
            if i2 > 0 {
                row_idx.push(c - n);
            }
            if i1 > 0 {
                row_idx.push(c - 1);
            }
            row_idx.push(c);
            if i1 + 1 < n {
                row_idx.push(c + 1);
            }
            if i2 + 1 < n {
                row_idx.push(c + n);
            }
            col_ptr.push(row_idx.len());
        }
    }
    SymbolicSparseColMat::new_checked(grid.len(), grid.len(), col_ptr, None, row_idx)
}

fn values(grid: &Grid, k: &[f64]) -> Vec<Complex64> {
    let n = grid.resolution();
    let h = grid.spacing();
    let inv_h2 = 1.0 / (h * h);
    let coupling = |a: (usize, usize), b: (usize, usize)| {
        let same_side = (a.0 == b.0 && (a.0 == 0 || a.0 == n - 1))
            || (a.1 == b.1 && (a.1 == 0 || a.1 == n - 1));
        Complex64::new(if same_side { -0.5 * inv_h2 } else { -inv_h2 }, 0.0)
    };
    let mut val = Vec::with_capacity(5 * grid.len());
    for i2 in 0..n {
        for i1 in 0..n {
            let c = grid.index(i1, i2);
            let here = (i1, i2);
            if i2 > 0 {
                val.push(coupling(here, (i1, i2 - 1)));
            }
            if i1 > 0 {
                val.push(coupling(here, (i1 - 1, i2)));
            }
            let (w, edge) = boundary_weight(n, i1, i2);
            let kc = k[c];
            let absorb = if edge { kc / h } else { 0.0 };
            val.push(Complex64::new(w * (4.0 * inv_h2 - kc * kc), -absorb));
            if i1 + 1 < n {
                val.push(coupling(here, (i1 + 1, i2)));
            }
            if i2 + 1 < n {
                val.push(coupling(here, (i1, i2 + 1)));
            }
        }
    }
    val
}

fn lu_error(e: LuError) -> Error {
    Error::numerical(format!("sparse LU factorisation failed: {e:?}"))
}

fn check_wavenumbers(k: &RealField) -> Result<()> {
    ensure!(
        k.values().iter().all(|&v| v > 0.0),
        "wavenumber must be positive everywhere"
    );
    let ppw = points_per_wavelength(k);
    ensure!(
        ppw >= MIN_POINTS_PER_WAVELENGTH,
        "grid resolves the shortest wavelength with {ppw:.2} points, at least {MIN_POINTS_PER_WAVELENGTH} are required"
    );
    if ppw < WARN_POINTS_PER_WAVELENGTH {
        log::debug!("only {ppw:.1} points per wavelength");
    }
    Ok(())
}

/// Assembles and factorises the operator for wavenumber field `k` at
/// angular frequency `omega`.
pub fn assemble(k: &RealField, omega: f64) -> Result<MediumOperator> {
    check_wavenumbers(k)?;
    ensure!(omega > 0.0, "angular frequency must be positive");
    let grid = *k.grid();
    let symbolic_matrix = pattern(&grid);
    let symbolic = SymbolicLu::try_new(symbolic_matrix.as_ref())
        .map_err(|e| Error::numerical(format!("symbolic factorisation failed: {e:?}")))?;
    MediumOperator::build(grid, omega, k.clone(), symbolic_matrix, symbolic)
}

impl MediumOperator {
    fn build(
        grid: Grid,
        omega: f64,
        k: RealField,
        pattern: SymbolicSparseColMat<usize>,
        symbolic: SymbolicLu<usize>,
    ) -> Result<Self> {
        let matrix = SparseColMat::new(pattern, values(&grid, k.values()));
        let lu = Lu::try_new_with_symbolic(symbolic.clone(), matrix.as_ref()).map_err(lu_error)?;
        Ok(Self { grid, omega, k, matrix, symbolic, lu })
    }

    /// Operator for a new wavenumber field on the same grid, reusing the
    /// symbolic factorisation.
    pub fn reassemble(&self, k: &RealField, omega: f64) -> Result<MediumOperator> {
        check_wavenumbers(k)?;
        k.check_same_grid(&self.k)?;
        let pattern = self.matrix.symbolic().to_owned().map_err(|e| Error::numerical(format!("{e:?}")))?;
        Self::build(self.grid, omega, k.clone(), pattern, self.symbolic.clone())
    }

    /// Like [`MediumOperator::reassemble`], releasing this factorisation first.
    pub fn into_reassembled(self, k: &RealField, omega: f64) -> Result<MediumOperator> {
        check_wavenumbers(k)?;
        k.check_same_grid(&self.k)?;
        let MediumOperator { grid, matrix, symbolic, lu, .. } = self;
        drop(lu);
        let (pattern, _) = matrix.into_parts();
        Self::build(grid, omega, k.clone(), pattern, symbolic)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn wavenumber(&self) -> &RealField {
        &self.k
    }

    /// Number of rows, `N^2`.
    pub fn rows(&self) -> usize {
        self.grid.len()
    }

    /// Row weight of each node (see the module documentation).
    pub fn row_weights(&self) -> Vec<f64> {
        let n = self.grid.resolution();
        (0..self.grid.len())
            .map(|idx| {
                let (i1, i2) = self.grid.unindex(idx);
                boundary_weight(n, i1, i2).0
            })
            .collect()
    }

    /// `A u`.
    pub fn apply(&self, u: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::default(); u.len()];
        let (sym, val) = self.matrix.parts();
        for (col, &x) in u.iter().enumerate() {
            let range = sym.col_range(col);
            for (&row, &a) in sym.row_idx()[range.clone()].iter().zip(&val[range]) {
                out[row] += a * x;
            }
        }
        out
    }

    /// Solves `A u = b` for each right-hand side (already row-weighted,
    /// as produced by [`rhs_for`]).
    pub fn solve(&self, rhs: &[Vec<Complex64>]) -> Result<Vec<ComplexField>> {
        self.solve_impl(rhs, false)
    }

    /// Solves `A^H u = b`.
    pub fn solve_adjoint(&self, rhs: &[Vec<Complex64>]) -> Result<Vec<ComplexField>> {
        self.solve_impl(rhs, true)
    }

    fn solve_impl(&self, rhs: &[Vec<Complex64>], adjoint: bool) -> Result<Vec<ComplexField>> {
        use faer::linalg::solvers::Solve;
        let n = self.rows();
        for b in rhs {
            ensure!(b.len() == n, "right-hand side has length {}, expected {n}", b.len());
        }
        let mut out = Vec::with_capacity(rhs.len());
        for batch in rhs.chunks(SOLVE_BATCH) {
            let mut x = Mat::<Complex64>::from_fn(n, batch.len(), |i, j| batch[j][i]);
            if adjoint {
                self.lu.solve_adjoint_in_place(x.as_mut());
            } else {
                self.lu.solve_in_place(x.as_mut());
            }
            for (j, b) in batch.iter().enumerate() {
                let sol: Vec<Complex64> = column(x.as_ref(), j);
                self.check_residual(&sol, b, adjoint)?;
                out.push(
                    ComplexField::new(self.grid, sol)
                        .map_err(|_| Error::numerical("solver produced non-finite values"))?,
                );
            }
        }
        Ok(out)
    }

    fn check_residual(&self, x: &[Complex64], b: &[Complex64], adjoint: bool) -> Result<()> {
        let bnorm = b.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        if bnorm == 0.0 {
            return Ok(());
        }
        // A is symmetric, so A^H x = conj(A conj(x))
        let ax = if adjoint {
            let xc: Vec<Complex64> = x.iter().map(|v| v.conj()).collect();
            self.apply(&xc).into_iter().map(|v| v.conj()).collect()
        } else {
            self.apply(x)
        };
        let r = ax.iter().zip(b).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt() / bnorm;
        if !(r <= RESIDUAL_TOLERANCE) {
            return Err(Error::numerical(format!(
                "linear solve residual {r:.3e} exceeds {RESIDUAL_TOLERANCE:e}"
            )));
        }
        Ok(())
    }
}

fn column(m: MatRef<'_, Complex64>, j: usize) -> Vec<Complex64> {
    (0..m.nrows()).map(|i| m[(i, j)]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::GaussianSource;
    use std::f64::consts::PI;

    fn homogeneous(n: usize, half: f64, k0: f64) -> MediumOperator {
        let g = Grid::new(half, n).unwrap();
        assemble(&RealField::constant(g, k0), k0).unwrap()
    }

    #[test]
    fn operator_is_symmetric_with_expected_rows() {
        let op = homogeneous(8, 1.0, 3.0);
        assert_eq!(op.rows(), 64);
        let dense = op.matrix.to_dense();
        for i in 0..64 {
            for j in 0..64 {
                assert_eq!(dense[(i, j)], dense[(j, i)]);
            }
        }
        let h = op.grid.spacing();
        // corner (0,0)
        let d = dense[(0, 0)];
        assert!((d.re - 0.25 * (4.0 / (h * h) - 9.0)).abs() < 1e-9);
        assert!((d.im + 3.0 / h).abs() < 1e-12);
        assert!((dense[(0, 1)].re + 0.5 / (h * h)).abs() < 1e-9);
        // edge node (3,0): tangential and normal neighbours
        assert!((dense[(3, 4)].re + 0.5 / (h * h)).abs() < 1e-9);
        assert!((dense[(3, 11)].re + 1.0 / (h * h)).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_media() {
        let g = Grid::new(1.0, 8).unwrap();
        assert!(assemble(&RealField::constant(g, 0.0), 1.0).is_err());
        let mut k = RealField::constant(g, 1.0);
        k.values_mut()[5] = -1.0;
        assert!(assemble(&k, 1.0).is_err());
        // h = 0.25, 2 pi / (k h) < 5 for k = 6
        assert!(assemble(&RealField::constant(g, 6.0), 6.0).is_err());
    }

    #[test]
    fn recovers_known_field() {
        let op = homogeneous(40, 2.0, 2.0 * PI);
        let mut rng = GaussianSource::new(3);
        let x: Vec<Complex64> = (0..op.rows()).map(|_| rng.complex()).collect();
        let b = op.apply(&x);
        let sol = op.solve(&[b.clone(), b]).unwrap();
        let err: f64 = sol[0].values().iter().zip(&x).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        let xn: f64 = x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        assert!(err / xn < 1e-8);
        assert_eq!(sol[0], sol[1]);
    }

    #[test]
    fn adjoint_solve_inverts_conjugate_transpose() {
        let op = homogeneous(24, 1.5, 2.0 * PI);
        let mut rng = GaussianSource::new(9);
        let b: Vec<Complex64> = (0..op.rows()).map(|_| rng.complex()).collect();
        let y = op.solve_adjoint(std::slice::from_ref(&b)).unwrap().remove(0);
        let x = op.solve(std::slice::from_ref(&b)).unwrap().remove(0);
        // <A^-1 b, b> = <b, A^-H b>
        let lhs: Complex64 = x.values().iter().zip(&b).map(|(u, v)| u * v.conj()).sum();
        let rhs: Complex64 = b.iter().zip(y.values()).map(|(u, v)| u * v.conj()).sum();
        assert!((lhs - rhs).norm() < 1e-10 * lhs.norm());
    }

    #[test]
    fn plane_wave_residual_is_second_order() {
        let k0 = 2.0 * PI;
        let mut prev = None;
        for n in [40, 80, 160] {
            let op = homogeneous(n, 2.0, k0);
            let g = op.grid;
            let u = ComplexField::from_fn(g, |x| Complex64::from_polar(1.0, k0 * x[1]));
            let r = op.apply(u.values());
            let interior = (0..g.len())
                .filter(|&i| {
                    let (a, b) = g.unindex(i);
                    a > 0 && b > 0 && a < n - 1 && b < n - 1
                })
                .map(|i| r[i].norm())
                .fold(0.0, f64::max);
            let h = g.spacing();
            assert!(interior <= (k0 * h).powi(2) * k0 * k0 / 12.0 * 1.01);
            if let Some(p) = prev {
                let ratio: f64 = p / interior;
                assert!((ratio - 4.0).abs() < 0.1, "ratio {ratio}");
            }
            prev = Some(interior);
        }
    }

    #[test]
    fn reassembly_matches_fresh_assembly() {
        let g = Grid::new(1.0, 20).unwrap();
        let op = assemble(&RealField::constant(g, 4.0), 4.0).unwrap();
        let k = RealField::from_fn(g, |x| 4.0 + 0.5 * (x[0] * 2.0).sin());
        let a = op.reassemble(&k, 4.0).unwrap();
        let b = assemble(&k, 4.0).unwrap();
        let rhs = vec![Complex64::new(1.0, 0.5); g.len()];
        assert_eq!(a.solve(std::slice::from_ref(&rhs)).unwrap(), b.solve(&[rhs]).unwrap());
    }
}
