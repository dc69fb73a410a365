//! Scattering potentials: primitive shapes, scenes, speed conversion, rotation.
//!
//! Amplitudes are values of the potential `f = k^2 - k0^2` at the reference
//! frequency `omega / 2 pi = 1`. Shapes are sampled pointwise at grid nodes.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::acquisition::rotate;
use crate::error::{ensure, Error, Result};
use crate::grid::{Grid, RealField};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Shape {
    Disk { center: [f64; 2], radius: f64 },
    /// Ellipse with semi-axes along the axes rotated by `tilt` (radians).
    Ellipse { center: [f64; 2], semi_axes: [f64; 2], #[serde(default)] tilt: f64 },
    /// Classic parametric heart `(16 sin^3 t, 13 cos t - 5 cos 2t - 2 cos 3t - cos 4t)`
    /// scaled to total width `width` and centred at `center`.
    Heart { center: [f64; 2], width: f64 },
    Rectangle { center: [f64; 2], size: [f64; 2], #[serde(default)] tilt: f64 },
    /// Simple polygon (even-odd rule).
    Polygon { vertices: Vec<[f64; 2]> },
    /// Ring sector between two radii, for angles from `start` to `end`
    /// (radians, counter-clockwise).
    AnnulusSector { center: [f64; 2], inner_radius: f64, outer_radius: f64, start: f64, end: f64 },
}

const HEART_VERTICES: usize = 256;

fn heart_outline(center: [f64; 2], width: f64) -> Vec<[f64; 2]> {
    let s = width / 32.0;
    (0..HEART_VERTICES)
        .map(|i| {
            let t = 2.0 * PI * i as f64 / HEART_VERTICES as f64;
            let x = 16.0 * t.sin().powi(3);
            let y = 13.0 * t.cos() - 5.0 * (2.0 * t).cos() - 2.0 * (3.0 * t).cos() - (4.0 * t).cos();
            // raw y spans [-17, 12]
            [center[0] + s * x, center[1] + s * (y + 2.5)]
        })
        .collect()
}

fn polygon_contains(vertices: &[[f64; 2]], p: [f64; 2]) -> bool {
    let mut inside = false;
    let n = vertices.len();
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (vertices[i], vertices[j]);
        if (a[1] > p[1]) != (b[1] > p[1]) {
            let x = a[0] + (p[1] - a[1]) * (b[0] - a[0]) / (b[1] - a[1]);
            if p[0] < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

impl Shape {
    pub fn contains(&self, p: [f64; 2]) -> bool {
        match self {
            Shape::Disk { center, radius } => {
                (p[0] - center[0]).hypot(p[1] - center[1]) < *radius
            }
            Shape::Ellipse { center, semi_axes, tilt } => {
                let q = rotate(-tilt, [p[0] - center[0], p[1] - center[1]]);
                (q[0] / semi_axes[0]).powi(2) + (q[1] / semi_axes[1]).powi(2) < 1.0
            }
            Shape::Heart { center, width } => polygon_contains(&heart_outline(*center, *width), p),
            Shape::Rectangle { center, size, tilt } => {
                let q = rotate(-tilt, [p[0] - center[0], p[1] - center[1]]);
                q[0].abs() < size[0] / 2.0 && q[1].abs() < size[1] / 2.0
            }
            Shape::Polygon { vertices } => polygon_contains(vertices, p),
            Shape::AnnulusSector { center, inner_radius, outer_radius, start, end } => {
                let (dx, dy) = (p[0] - center[0], p[1] - center[1]);
                let r = dx.hypot(dy);
                if r < *inner_radius || r >= *outer_radius {
                    return false;
                }
                let span = (end - start).rem_euclid(2.0 * PI);
                let a = (dy.atan2(dx) - start).rem_euclid(2.0 * PI);
                a <= span
            }
        }
    }

    /// Radius of the smallest origin-centred disk containing the shape.
    pub fn extent(&self) -> f64 {
        let norm = |c: [f64; 2]| c[0].hypot(c[1]);
        match self {
            Shape::Disk { center, radius } => norm(*center) + radius,
            Shape::Ellipse { center, semi_axes, .. } => norm(*center) + semi_axes[0].max(semi_axes[1]),
            Shape::Heart { center, width } => {
                heart_outline(*center, *width).into_iter().map(norm).fold(0.0, f64::max)
            }
            Shape::Rectangle { center, size, .. } => norm(*center) + 0.5 * size[0].hypot(size[1]),
            Shape::Polygon { vertices } => vertices.iter().copied().map(norm).fold(0.0, f64::max),
            Shape::AnnulusSector { center, outer_radius, .. } => norm(*center) + outer_radius,
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match self {
            Shape::Disk { radius, .. } => *radius > 0.0,
            Shape::Ellipse { semi_axes, .. } => semi_axes[0] > 0.0 && semi_axes[1] > 0.0,
            Shape::Heart { width, .. } => *width > 0.0,
            Shape::Rectangle { size, .. } => size[0] > 0.0 && size[1] > 0.0,
            Shape::Polygon { vertices } => vertices.len() >= 3,
            Shape::AnnulusSector { inner_radius, outer_radius, .. } => {
                *inner_radius >= 0.0 && outer_radius > inner_radius
            }
        };
        ensure!(ok && self.extent().is_finite(), "degenerate shape {self:?}");
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Primitive {
    pub shape: Shape,
    pub amplitude: f64,
}

/// An ordered list of primitives; later ones overwrite earlier ones.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    pub primitives: Vec<Primitive>,
}

impl SceneSpec {
    pub fn new(primitives: Vec<Primitive>) -> Self {
        Self { primitives }
    }

    pub fn disk(radius: f64, amplitude: f64) -> Self {
        Self::new(vec![Primitive { shape: Shape::Disk { center: [0.0, 0.0], radius }, amplitude }])
    }

    /// Radius of the support of the scene (0 for an empty scene).
    pub fn extent(&self) -> f64 {
        self.primitives.iter().map(|p| p.shape.extent()).fold(0.0, f64::max)
    }

    pub fn max_amplitude(&self) -> f64 {
        self.primitives.iter().map(|p| p.amplitude.abs()).fold(0.0, f64::max)
    }

    /// Checks shapes, amplitudes and, when given, that the support lies in
    /// the open ball of radius `support_radius`.
    pub fn validate(&self, support_radius: Option<f64>) -> Result<()> {
        for p in &self.primitives {
            ensure!(p.amplitude.is_finite(), "non-finite amplitude");
            p.shape.validate()?;
        }
        if let Some(r) = support_radius {
            ensure!(
                self.extent() < r,
                "scene extends to radius {:.3}, beyond the allowed {r}",
                self.extent()
            );
        }
        Ok(())
    }

    pub fn value_at(&self, p: [f64; 2]) -> f64 {
        self.primitives
            .iter()
            .rev()
            .find(|prim| prim.shape.contains(p))
            .map_or(0.0, |prim| prim.amplitude)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self::new(
            self.primitives
                .iter()
                .map(|p| Primitive { shape: p.shape.clone(), amplitude: p.amplitude * factor })
                .collect(),
        )
    }
}

/// `amplitude` inside the centred disk of radius `radius`, zero outside.
pub fn disk_potential(radius: f64, amplitude: f64, grid: &Grid) -> Result<RealField> {
    ensure!(radius > 0.0, "disk radius must be positive");
    ensure!(radius < grid.half_width(), "disk of radius {radius} exceeds the grid");
    ensure!(amplitude.is_finite(), "amplitude must be finite");
    Ok(RealField::from_fn(*grid, |x| if x[0].hypot(x[1]) < radius { amplitude } else { 0.0 }))
}

pub fn render_scene(spec: &SceneSpec, grid: &Grid) -> Result<RealField> {
    spec.validate(None)?;
    Ok(RealField::from_fn(*grid, |x| spec.value_at(x)))
}

/// `c = sqrt(omega^2 / (k0^2 + f))` with `k0 = omega / c0`.
pub fn potential_to_speed(f: &RealField, omega: f64, c0: f64) -> Result<RealField> {
    ensure!(omega > 0.0 && c0 > 0.0, "omega and c0 must be positive");
    let k0sq = (omega / c0).powi(2);
    if let Some(v) = f.values().iter().find(|&&v| k0sq + v <= 0.0) {
        return Err(Error::invalid(format!(
            "k0^2 + f = {} is not positive (evanescent media are not modelled)",
            k0sq + v
        )));
    }
    Ok(f.map(|v| omega / (k0sq + v).sqrt()))
}

/// `f = (omega / c)^2 - (omega / c0)^2`.
pub fn speed_to_potential(c: &RealField, omega: f64, c0: f64) -> Result<RealField> {
    ensure!(omega > 0.0 && c0 > 0.0, "omega and c0 must be positive");
    ensure!(c.values().iter().all(|&v| v > 0.0), "wave speed must be positive");
    let k0sq = (omega / c0).powi(2);
    Ok(c.map(|v| (omega / v).powi(2) - k0sq))
}

/// `g(x) = f(R_alpha x)` by bilinear interpolation; zero where `R_alpha x`
/// falls outside the grid.
pub fn rotate_potential(f: &RealField, alpha: f64) -> RealField {
    let grid = *f.grid();
    let vals = f.values();
    RealField::from_fn(grid, |x| {
        grid.bilinear_stencil(rotate(alpha, x))
            .map_or(0.0, |st| st.iter().map(|&(i, w)| vals[i] * w).sum())
    })
}

/// Disk-and-heart-in-ellipse phantom (heart amplitude 0.5, or 2 for the
/// high-contrast variant).
pub fn phantom_one(high_contrast: bool) -> SceneSpec {
    let heart_amp = if high_contrast { 2.0 } else { 0.5 };
    SceneSpec::new(vec![
        Primitive {
            shape: Shape::Ellipse { center: [0.0, 0.0], semi_axes: [4.5, 3.5], tilt: 0.0 },
            amplitude: 0.25,
        },
        Primitive { shape: Shape::Disk { center: [-2.0, 0.8], radius: 0.9 }, amplitude: 0.5 },
        Primitive { shape: Shape::Heart { center: [1.6, -0.6], width: 2.5 }, amplitude: heart_amp },
    ])
}

/// Small convex and non-convex inclusions within radius 4 (peak amplitude
/// 0.5, or 2 for the high-contrast variant).
pub fn phantom_two(high_contrast: bool) -> SceneSpec {
    let base = SceneSpec::new(vec![
        Primitive { shape: Shape::Disk { center: [-2.0, 1.5], radius: 0.75 }, amplitude: 0.5 },
        Primitive {
            shape: Shape::Rectangle { center: [1.5, 2.0], size: [1.6, 0.8], tilt: 0.3 },
            amplitude: 0.35,
        },
        Primitive {
            shape: Shape::AnnulusSector {
                center: [1.5, -1.5],
                inner_radius: 0.5,
                outer_radius: 1.0,
                start: 0.0,
                end: 1.5 * PI,
            },
            amplitude: 0.5,
        },
        Primitive { shape: Shape::Disk { center: [-1.5, -2.0], radius: 0.4 }, amplitude: 0.25 },
        Primitive {
            shape: Shape::Polygon {
                vertices: vec![[-0.8, -0.5], [0.2, -0.5], [0.2, -0.2], [-0.5, -0.2], [-0.5, 0.6], [-0.8, 0.6]],
            },
            amplitude: 0.4,
        },
    ]);
    if high_contrast {
        base.scaled(4.0)
    } else {
        base
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Grid {
        Grid::new(10.0, 240).unwrap()
    }

    #[test]
    fn disk_samples() {
        let g = grid();
        let f = disk_potential(4.5, 1.0, &g).unwrap();
        assert_eq!(f.at(120, 120), 1.0);
        let (i, j) = g.nearest_node([5.0, 5.0]).unwrap();
        assert_eq!(f.at(i, j), 0.0);
        let f5 = disk_potential(2.0, 5.0, &g).unwrap();
        assert_eq!(f5.at(120, 120), 5.0);
        let z = disk_potential(1.0, 0.0, &g).unwrap();
        assert!(z.values().iter().all(|&v| v == 0.0));
        assert!(disk_potential(11.0, 1.0, &g).is_err());
    }

    #[test]
    fn scene_rules() {
        let g = Grid::new(5.0, 50).unwrap();
        let empty = render_scene(&SceneSpec::default(), &g).unwrap();
        assert!(empty.values().iter().all(|&v| v == 0.0));
        assert_eq!(render_scene(&SceneSpec::disk(2.0, 0.7), &g).unwrap(), disk_potential(2.0, 0.7, &g).unwrap());

        let spec = phantom_one(false);
        let f = render_scene(&spec, &g).unwrap();
        let (i, j) = g.nearest_node([1.6, -0.6]).unwrap();
        assert_eq!(f.at(i, j), 0.5, "heart overwrites ellipse");
        let (i, j) = g.nearest_node([0.0, 3.0]).unwrap();
        assert_eq!(f.at(i, j), 0.25);
        let (i, j) = g.nearest_node([-4.9, 0.0]).unwrap();
        assert_eq!(f.at(i, j), 0.0);
    }

    #[test]
    fn phantoms_fit_in_support() {
        for s in [phantom_one(false), phantom_one(true), phantom_two(false), phantom_two(true)] {
            s.validate(Some(6.0)).unwrap();
        }
        assert!(phantom_two(false).extent() < 4.0);
        assert_eq!(phantom_two(true).max_amplitude(), 2.0);
        assert_eq!(phantom_one(true).max_amplitude(), 2.0);
        assert!(SceneSpec::disk(5.0, 1.0).validate(Some(4.0)).is_err());
    }

    #[test]
    fn scene_json_round_trip() {
        let s = phantom_two(false);
        let text = serde_json::to_string(&s).unwrap();
        let back: SceneSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn speed_conversions() {
        let g = Grid::new(1.0, 2).unwrap();
        let w = 2.0 * PI;
        let c = potential_to_speed(&RealField::constant(g, 0.0), w, 1.0).unwrap();
        assert!(c.values().iter().all(|&v| (v - 1.0).abs() < 1e-15));
        let c = potential_to_speed(&RealField::constant(g, 5.0), w, 1.0).unwrap();
        assert!((c.values()[0] - 0.9421).abs() < 5e-5);
        let c = potential_to_speed(&RealField::constant(g, -5.0), w, 1.0).unwrap();
        assert!((c.values()[0] - 1.0701).abs() < 5e-5);
        let f = speed_to_potential(&RealField::constant(g, 0.9876), w, 1.0).unwrap();
        assert!((f.values()[0] - 1.0).abs() < 0.01);
        assert!(potential_to_speed(&RealField::constant(g, -50.0), w, 1.0).is_err());
        assert!(speed_to_potential(&RealField::constant(g, 0.0), w, 1.0).is_err());
    }

    #[test]
    fn speed_round_trip() {
        let g = Grid::new(3.0, 30).unwrap();
        let f = render_scene(&phantom_one(true), &g).unwrap();
        let back = speed_to_potential(&potential_to_speed(&f, 2.0 * PI, 1.0).unwrap(), 2.0 * PI, 1.0).unwrap();
        for (a, b) in f.values().iter().zip(back.values()) {
            assert!((a - b).abs() <= 1e-12 * (4.0 * PI * PI));
        }
    }

    #[test]
    fn rotation_identity_and_disk_interior() {
        let g = Grid::new(5.0, 64).unwrap();
        let f = disk_potential(2.0, 3.0, &g).unwrap();
        assert_eq!(rotate_potential(&f, 0.0), f);
        let r = rotate_potential(&f, 0.7);
        let h = g.spacing();
        for (i, (a, b)) in f.values().iter().zip(r.values()).enumerate() {
            let (i1, i2) = g.unindex(i);
            let [x1, x2] = g.node(i1, i2);
            let rad = x1.hypot(x2);
            if rad < 2.0 - 1.5 * h || rad > 2.0 + 1.5 * h {
                assert!((a - b).abs() < 1e-12, "node {x1},{x2}");
            } else {
                assert!((a - b).abs() <= 3.0);
            }
        }
    }

    #[test]
    fn quarter_turn_moves_square() {
        let g = Grid::new(4.0, 32).unwrap();
        // unit square centred at (2, 0.5)
        let f = RealField::from_fn(g, |x| if (1.5..2.5).contains(&x[0]) && (0.0..1.0).contains(&x[1]) { 1.0 } else { 0.0 });
        let r = rotate_potential(&f, PI / 2.0);
        // f(R x) = 1 where R x in square, i.e. x = R^T (2, 0.5) = (0.5, -2)
        let (i, j) = g.nearest_node([0.5, -2.0]).unwrap();
        assert!((r.at(i, j) - 1.0).abs() < 1e-12);
        let (i, j) = g.nearest_node([2.0, 0.5]).unwrap();
        assert_eq!(r.at(i, j), 0.0);
        let mass_f: f64 = f.values().iter().sum();
        let mass_r: f64 = r.values().iter().sum();
        assert!((mass_f - mass_r).abs() < 1e-9);
    }

    #[test]
    fn annulus_sector_is_nonconvex() {
        let s = Shape::AnnulusSector { center: [0.0, 0.0], inner_radius: 0.5, outer_radius: 1.0, start: 0.0, end: 1.5 * PI };
        assert!(s.contains([0.75, 0.0]));
        assert!(s.contains([-0.75, 0.0]));
        assert!(!s.contains([0.5, -0.5]));
        assert!(!s.contains([0.0, 0.0]));
    }
}
