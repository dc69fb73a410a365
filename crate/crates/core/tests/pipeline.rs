use std::f64::consts::PI;

use approx::assert_relative_eq;
use difftomo::fdt::{fdt_samples, reconstruct, rytov_dataset, NdftMethod, ReconstructionConfig};
use difftomo::fwi::{fwi_run, misfit, FwiConfig, LineSearch, Parameter, Truth};
use difftomo::helmholtz::{forward_dataset, ForwardOptions, RotationMode};
use difftomo::io::{read_dataset, read_field, write_dataset, write_real_field};
use difftomo::metrics::{psnr, relative_l2};
use difftomo::phantom::{disk_potential, potential_to_speed};
use difftomo::{AcquisitionConfig, Grid, RealField, SourceGeometry};

fn acquisition(source: SourceGeometry, n_angles: usize) -> AcquisitionConfig {
    AcquisitionConfig {
        n_angles,
        wavenumbers: vec![PI],
        c0: 1.0,
        source,
        receiver_height: 4.0,
        receiver_half_width: 4.0,
        receiver_count: 32,
        noise_snr_db: None,
        seed: 1,
    }
}

#[test]
fn weak_disk_born_and_rytov_agree_and_resemble_the_truth() {
    let grid = Grid::new(8.0, 128).unwrap();
    let f = disk_potential(1.5, 0.2, &grid).unwrap();
    let acq = acquisition(SourceGeometry::Line { height: -6.0, half_length: 5.0, count: 81 }, 16);
    let out = forward_dataset(&f, &acq, ForwardOptions::default()).unwrap();
    let config = ReconstructionConfig {
        grid: Grid::new(4.0, 48).unwrap(),
        iterations: 20,
        method: NdftMethod::Gridding,
        c0: 1.0,
    };
    let born = reconstruct(&fdt_samples(&out.scattered).unwrap(), &config).unwrap().field;
    let rytov_data = rytov_dataset(&out.total, &out.incident).unwrap();
    let rytov = reconstruct(&fdt_samples(&rytov_data).unwrap(), &config).unwrap().field;
    assert!(relative_l2(born.values(), rytov.values()) < 0.05);
    let truth = disk_potential(1.5, 0.2, &config.grid).unwrap();
    let p = psnr(&truth, &born, Some(6.0)).unwrap();
    assert!(p > 12.0, "PSNR {p}");
}

#[test]
fn rotation_modes_agree() {
    let grid = Grid::new(8.0, 128).unwrap();
    let f = disk_potential(1.0, 0.5, &grid).unwrap();
    let acq = acquisition(SourceGeometry::Point { position: [0.0, -6.0] }, 4);
    let a = forward_dataset(&f, &acq, ForwardOptions::default()).unwrap();
    let b = forward_dataset(&f, &acq, ForwardOptions { rotation: RotationMode::Medium, ..ForwardOptions::default() })
        .unwrap();
    // angle 0 needs no resampling
    let (ta, tb) = (&a.scattered.traces[0], &b.scattered.traces[0]);
    for (x, y) in ta.values.iter().zip(&tb.values) {
        assert_relative_eq!(x.re, y.re, epsilon = 1e-9);
        assert_relative_eq!(x.im, y.im, epsilon = 1e-9);
    }
    // the quarter turn maps grid nodes onto grid nodes up to the half-open node set
    let (ta, tb) = (&a.scattered.traces[1], &b.scattered.traces[1]);
    let diff: f64 = ta.values.iter().zip(&tb.values).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt();
    let norm: f64 = ta.values.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    assert!(diff / norm < 0.05, "{}", diff / norm);
}

#[test]
fn datasets_and_fields_survive_disk_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let grid = Grid::new(6.0, 64).unwrap();
    let f = disk_potential(1.0, 0.3, &grid).unwrap();
    let mut acq = acquisition(SourceGeometry::PlaneWave, 3);
    acq.noise_snr_db = Some(30.0);
    acq.receiver_height = 3.0;
    acq.receiver_half_width = 3.0;
    let out = forward_dataset(&f, &acq, ForwardOptions::default()).unwrap();
    let path = write_dataset(dir.path(), &out.total).unwrap();
    assert_eq!(read_dataset(&path).unwrap(), out.total);
    write_real_field(dir.path().join("f.bin"), &f).unwrap();
    assert_eq!(read_field(dir.path().join("f.bin")).unwrap().into_real().unwrap(), f);
}

#[test]
fn short_fwi_run_lowers_the_misfit_and_improves_the_image() {
    let grid = Grid::new(6.0, 60).unwrap();
    let f = disk_potential(1.0, 3.0, &grid).unwrap();
    let acq = AcquisitionConfig {
        receiver_height: 2.5,
        receiver_half_width: 2.5,
        receiver_count: 24,
        ..acquisition(SourceGeometry::Line { height: -3.5, half_length: 2.5, count: 21 }, 8)
    };
    let data = forward_dataset(&f, &acq, ForwardOptions::default()).unwrap().total;
    let config = FwiConfig {
        frequencies: vec![PI],
        iterations: 5,
        window_radius: Some(2.0),
        line_search: LineSearch::default(),
        parameter: Parameter::Speed,
    };
    let start = RealField::constant(grid, 1.0);
    let truth = potential_to_speed(&f, 2.0 * PI, 1.0).unwrap();
    let before = misfit(&start, &data, PI, &config).unwrap();
    let out = fwi_run(&config, &start, &data, Some(Truth { potential: &f, window: Some(5.0) })).unwrap();
    let after = misfit(&out.speed, &data, PI, &config).unwrap();
    assert!(after < 0.5 * before, "{before} -> {after}");
    assert!(relative_l2(truth.values(), out.speed.values()) < relative_l2(truth.values(), start.values()));
    let block = &out.report.blocks[0];
    assert_eq!(block.misfits.len(), block.iterations + 1);
    assert_relative_eq!(block.misfits[0], before, max_relative = 1e-12);
    assert!(block.psnr.is_some());
}
