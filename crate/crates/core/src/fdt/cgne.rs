//! Conjugate gradients on the normal equations `A^H A f = A^H b`, started
//! from zero (CGLS form, which updates the data residual directly).

use num_complex::Complex64;

use super::ndft::Ndft;
use crate::error::{ensure, Error, Result};
use crate::grid::{ComplexField, RealField};

#[derive(Debug, Clone)]
pub struct CgneResult {
    /// Real part of the final iterate.
    pub field: RealField,
    pub complex: ComplexField,
    /// `|b - A f_j|` for `j = 0 ..= iterations`.
    pub residuals: Vec<f64>,
}

fn norm_sqr(v: &[Complex64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum()
}

/// Runs exactly `iterations` steps on `A f = b` (fewer only if the residual of
/// the normal equations vanishes).
pub fn cgne(op: &Ndft, b: &[Complex64], iterations: usize) -> Result<CgneResult> {
    ensure!(iterations >= 1, "at least one iteration is required");
    ensure!(!b.is_empty(), "no data samples");
    ensure!(b.len() == op.points().len(), "data length differs from the sample count");
    let grid = *op.grid();
    let mut x = vec![Complex64::default(); grid.len()];
    let mut r = b.to_vec();
    let mut s = op.adjoint(&r)?;
    let mut p = s.clone();
    let mut gamma = norm_sqr(&s);
    let mut residuals = vec![norm_sqr(&r).sqrt()];
    for it in 0..iterations {
        if gamma == 0.0 {
            break;
        }
        let q = op.forward(&p)?;
        let qq = norm_sqr(&q);
        if qq == 0.0 {
            break;
        }
        let alpha = gamma / qq;
        for (xi, pi) in x.iter_mut().zip(&p) {
            *xi += alpha * pi;
        }
        for (ri, qi) in r.iter_mut().zip(&q) {
            *ri -= alpha * qi;
        }
        s = op.adjoint(&r)?;
        let gamma_new = norm_sqr(&s);
        let res = norm_sqr(&r).sqrt();
        if !res.is_finite() || !gamma_new.is_finite() {
            return Err(Error::numerical(format!("CGNE diverged at iteration {}", it + 1)));
        }
        residuals.push(res);
        let beta = gamma_new / gamma;
        for (pi, si) in p.iter_mut().zip(&s) {
            *pi = si + beta * *pi;
        }
        gamma = gamma_new;
    }
    let complex = ComplexField::new(grid, x).map_err(|_| Error::numerical("CGNE produced non-finite values"))?;
    Ok(CgneResult { field: complex.real_part(), complex, residuals })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fdt::ndft::NdftMethod;
    use crate::grid::Grid;
    use crate::noise::GaussianSource;

    #[test]
    fn recovers_consistent_system() {
        let mut rng = GaussianSource::new(8);
        let g = Grid::new(4.0, 16).unwrap();
        let truth: Vec<Complex64> = (0..g.len()).map(|_| Complex64::new(rng.real(), 0.0)).collect();
        let lim = std::f64::consts::PI / g.spacing();
        // jittered 20 x 20 lattice: random but well spread
        let cell = 2.0 * lim / 20.0;
        let pts: Vec<[f64; 2]> = (0..400)
            .map(|i| {
                let (a, b) = ((i % 20) as f64, (i / 20) as f64);
                [-lim + cell * (a + rng.uniform()), -lim + cell * (b + rng.uniform())]
            })
            .collect();
        let op = Ndft::new(g, pts, NdftMethod::Direct).unwrap();
        let b = op.forward(&truth).unwrap();
        let res = cgne(&op, &b, 50).unwrap();
        let err: f64 = res.complex.values().iter().zip(&truth).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        let tn: f64 = truth.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        assert!(err / tn <= 1e-3, "{}", err / tn);
        for w in res.residuals.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-12));
        }
    }

    #[test]
    fn zero_data_gives_zero_field() {
        let g = Grid::new(2.0, 8).unwrap();
        let op = Ndft::new(g, vec![[0.1, 0.2], [1.0, -1.0]], NdftMethod::Direct).unwrap();
        let res = cgne(&op, &[Complex64::default(); 2], 5).unwrap();
        assert!(res.field.values().iter().all(|&v| v == 0.0));
        assert!(cgne(&op, &[Complex64::default(); 2], 0).is_err());
    }
}
