use std::f64::consts::PI;

use difftomo::fdt::{band_contains, semicircle_point, Ndft, NdftMethod};
use difftomo::metrics::psnr;
use difftomo::phantom::{potential_to_speed, speed_to_potential};
use difftomo::{Complex64, Grid, RealField};
use proptest::prelude::*;

fn complex_vec(len: usize) -> impl Strategy<Value = Vec<Complex64>> {
    proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0).prop_map(|(a, b)| Complex64::new(a, b)), len)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn gridding_matches_direct_summation(
        pts in proptest::collection::vec((-3.0f64..3.0, -3.0f64..3.0), 1..20),
        f in complex_vec(256),
    ) {
        let grid = Grid::new(4.0, 16).unwrap();
        let pts: Vec<[f64; 2]> = pts.into_iter().map(|(a, b)| [a, b]).collect();
        let direct = Ndft::new(grid, pts.clone(), NdftMethod::Direct).unwrap().forward(&f).unwrap();
        let fast = Ndft::new(grid, pts, NdftMethod::Gridding).unwrap().forward(&f).unwrap();
        let scale: f64 = direct.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt().max(1e-12);
        for (a, b) in direct.iter().zip(&fast) {
            prop_assert!((a - b).norm() <= 1e-6 * scale);
        }
    }

    #[test]
    fn speed_potential_round_trip(vals in proptest::collection::vec(-0.9f64..5.0, 16), omega in 1.0f64..10.0) {
        let grid = Grid::new(1.0, 4).unwrap();
        let f = RealField::new(grid, vals).unwrap();
        let back = speed_to_potential(&potential_to_speed(&f, omega, 1.0).unwrap(), omega, 1.0).unwrap();
        for (a, b) in f.values().iter().zip(back.values()) {
            prop_assert!((a - b).abs() <= 1e-9 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn semicircles_stay_in_their_band(k0 in 1.0f64..10.0, t in -0.999f64..0.999, lo in 0.3f64..1.0) {
        let y = semicircle_point(t * k0, k0, 0.0).unwrap();
        prop_assert!(band_contains(y, lo * k0, k0 * (1.0 + 1e-12)));
        prop_assert!(y[0].hypot(y[1]) <= 2f64.sqrt() * k0 + 1e-12);
    }

    #[test]
    fn psnr_rises_as_the_error_shrinks(vals in proptest::collection::vec(-1.0f64..1.0, 64), e in 0.01f64..1.0) {
        let grid = Grid::new(2.0, 8).unwrap();
        let truth = RealField::from_fn(grid, |x| (x[0] * PI / 4.0).cos());
        let err = RealField::new(grid, vals).unwrap();
        prop_assume!(err.max_abs() > 1e-3);
        let cand = |s: f64| RealField::new(grid, truth.values().iter().zip(err.values()).map(|(t, v)| t + s * v).collect()).unwrap();
        let p1 = psnr(&truth, &cand(e), None).unwrap();
        let p2 = psnr(&truth, &cand(e / 2.0), None).unwrap();
        prop_assert!((p2 - p1 - 20.0 * 2f64.log10()).abs() < 1e-9);
    }
}
