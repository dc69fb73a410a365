use num_complex::Complex64;

use super::boundary_weight;
use crate::error::{ensure, Error, Result};
use crate::grid::{Grid, RealField};

/// Source term of one solve.
#[derive(Debug, Clone)]
pub enum SourceSpec {
    /// Contrast source `s(x) exp(i k0 d . x)` of the scattered-field equation,
    /// where `s` is the (frequency-scaled) potential and `d` a unit direction.
    PlaneWaveContrast { contrast: RealField, k0: f64, direction: [f64; 2] },
    /// Discrete delta of unit strength.
    Point([f64; 2]),
    /// Simultaneous unit point sources.
    Line(Vec<[f64; 2]>),
    /// Arbitrary source density sampled at the nodes.
    Density(Vec<Complex64>),
}

/// Row-weighted right-hand side for [`super::MediumOperator::solve`].
///
/// Point sources are discrete deltas of mass one: `1/h^2` at a node, spread
/// bilinearly when the position falls between nodes.
pub fn rhs_for(source: &SourceSpec, grid: &Grid) -> Result<Vec<Complex64>> {
    let mut b = vec![Complex64::default(); grid.len()];
    match source {
        SourceSpec::PlaneWaveContrast { contrast, k0, direction } => {
            ensure!(contrast.grid() == grid, "contrast lives on a different grid");
            for (idx, (out, &s)) in b.iter_mut().zip(contrast.values()).enumerate() {
                if s != 0.0 {
                    let (i1, i2) = grid.unindex(idx);
                    let x = grid.node(i1, i2);
                    *out = Complex64::from_polar(s, k0 * (direction[0] * x[0] + direction[1] * x[1]));
                }
            }
        }
        SourceSpec::Point(p) => add_delta(&mut b, grid, *p)?,
        SourceSpec::Line(points) => {
            ensure!(!points.is_empty(), "line source has no points");
            for p in points {
                add_delta(&mut b, grid, *p)?;
            }
        }
        SourceSpec::Density(values) => {
            ensure!(values.len() == grid.len(), "source density has the wrong length");
            b.copy_from_slice(values);
        }
    }
    let n = grid.resolution();
    for (idx, v) in b.iter_mut().enumerate() {
        let (i1, i2) = grid.unindex(idx);
        *v *= boundary_weight(n, i1, i2).0;
    }
    Ok(b)
}

fn add_delta(b: &mut [Complex64], grid: &Grid, p: [f64; 2]) -> Result<()> {
    let h = grid.spacing();
    let stencil = grid.bilinear_stencil(p).ok_or_else(|| {
        Error::invalid(format!("source position ({}, {}) lies outside the grid", p[0], p[1]))
    })?;
    for (idx, w) in stencil {
        b[idx] += w / (h * h);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::acquisition::SourceGeometry;

    #[test]
    fn point_on_node_is_single_entry() {
        let g = Grid::new(2.0, 40).unwrap();
        let b = rhs_for(&SourceSpec::Point([0.3, -0.5]), &g).unwrap();
        let nz: Vec<_> = b.iter().enumerate().filter(|(_, v)| v.norm() != 0.0).collect();
        assert_eq!(nz.len(), 1);
        let h = g.spacing();
        assert!((nz[0].1.re - 1.0 / (h * h)).abs() < 1e-9);
        let (i, j) = g.nearest_node([0.3, -0.5]).unwrap();
        assert_eq!(nz[0].0, g.index(i, j));
    }

    #[test]
    fn off_node_point_keeps_unit_mass() {
        let g = Grid::new(2.0, 40).unwrap();
        let b = rhs_for(&SourceSpec::Point([0.33, -0.47]), &g).unwrap();
        let h = g.spacing();
        let mass: Complex64 = b.iter().sum::<Complex64>() * h * h;
        assert!((mass - 1.0).norm() < 1e-12);
        assert_eq!(b.iter().filter(|v| v.norm() != 0.0).count(), 4);
    }

    #[test]
    fn line_source_with_441_points() {
        let g = Grid::new(25.0, 500).unwrap();
        let pts = SourceGeometry::Line { height: -15.0, half_length: 22.0, count: 441 }.positions();
        let b = rhs_for(&SourceSpec::Line(pts), &g).unwrap();
        assert_eq!(b.iter().filter(|v| v.norm() != 0.0).count(), 441);
    }

    #[test]
    fn zero_contrast_and_outside_points() {
        let g = Grid::new(1.0, 10).unwrap();
        let src = SourceSpec::PlaneWaveContrast { contrast: RealField::zeros(g), k0: 3.0, direction: [0.0, 1.0] };
        assert!(rhs_for(&src, &g).unwrap().iter().all(|v| v.norm() == 0.0));
        assert!(rhs_for(&SourceSpec::Point([5.0, 0.0]), &g).is_err());
    }
}
