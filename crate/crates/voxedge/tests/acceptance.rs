//! Acceptance suite: one test per release criterion.
//!
//! Every test prints a single `criterion N PASS` line with its measured
//! numbers (visible with `--nocapture`); a failed assertion fails the
//! criterion. Criteria with a runtime budget assert it.

mod common;

use std::time::Instant;

use common::*;
use voxedge::pipeline::{
    cmd_pipeline, GridSource, Method, PipelineConfig, Reference, SyntheticGrid,
};
use voxedge::{
    canny_edges, chamfer, completeness, extract_by_gradient, extract_by_mask, extract_by_threshold,
    log_edges, nn_distances, read_color_grid, read_grid, read_ply, sobel_gradient, sobel_kernels,
    write_color_grid, write_grid, write_ply, Border, CannyParams, ColorGrid, DensityGrid, Error,
    Geometry, LogMode, LogParams, PlyFormat, PointCloud, Shape, SyntheticSpec,
};

fn sphere_spec(noise_sigma: f64, seed: u64) -> SyntheticSpec {
    SyntheticSpec {
        shape: Shape::Sphere { radius: 10.0 },
        amplitude: 100.0,
        ramp_width: 0.5,
        noise_sigma,
        seed,
    }
}

fn sphere_geometry() -> Geometry {
    Geometry::new([96; 3], [0.5; 3], [0.0; 3]).unwrap()
}

/// Canny settings for the synthetic scenes: one-voxel smoothing and thresholds
/// wide enough to keep the full shell, with classical NMS thinning.
fn synthetic_canny() -> CannyParams {
    CannyParams {
        gaussian_sigma: 1.0,
        low_rel: 0.1,
        high_rel: 0.4,
        nms_enabled: true,
    }
}

#[test]
fn criterion_01_sobel_kernels_match_the_printed_stencils() {
    let start = Instant::now();
    let (kx, ky, kz) = sobel_kernels();

    // The x kernel element-for-element: derivative [-1,0,1] along x times
    // smoothing [1,2,1] along y and z. 27 integer assertions.
    let d = |o: isize| [-1.0, 0.0, 1.0][(o + 1) as usize];
    let s = |o: isize| [1.0, 2.0, 1.0][(o + 1) as usize];
    let mut checked = 0;
    for oz in -1..=1 {
        for oy in -1..=1 {
            for ox in -1..=1 {
                assert_eq!(kx.weight_at([ox, oy, oz]), d(ox) * s(oy) * s(oz));
                checked += 1;
            }
        }
    }
    assert_eq!(checked, 27);

    // Slice structure: x=-1 all negative with center -4, x=0 zero, x=+1 the
    // positive mirror.
    assert_eq!(kx.weight_at([-1, 0, 0]), -4.0);
    assert_eq!(kx.weight_at([1, 0, 0]), 4.0);
    for oz in -1..=1 {
        for oy in -1..=1 {
            assert!(kx.weight_at([-1, oy, oz]) < 0.0);
            assert_eq!(kx.weight_at([0, oy, oz]), 0.0);
            assert_eq!(kx.weight_at([1, oy, oz]), -kx.weight_at([-1, oy, oz]));
        }
    }

    // y and z kernels are axis permutations of the same stencil.
    for oz in -1..=1 {
        for oy in -1..=1 {
            for ox in -1..=1 {
                assert_eq!(ky.weight_at([ox, oy, oz]), s(ox) * d(oy) * s(oz));
                assert_eq!(kz.weight_at([ox, oy, oz]), s(ox) * s(oy) * d(oz));
            }
        }
    }

    for k in [&kx, &ky, &kz] {
        assert_eq!(k.weights().iter().sum::<f64>(), 0.0);
        assert!(k.factors().is_some(), "Sobel kernels carry factorizations");
        // Dense weights reproduce the factor outer product exactly.
        assert_eq!(k.factorization_error(), 0.0);
    }

    assert!(start.elapsed().as_secs_f64() < 1.0);
    println!("criterion 1 PASS: 27-entry stencils, zero sums, exact factorization");
}

#[test]
fn criterion_02_convolution_matches_the_triple_loop_oracle() {
    let start = Instant::now();
    let mut rng = rng(0xC2);
    let mut pairs = 0;

    for case in 0..120 {
        use rand::Rng;
        let dims = [
            rng.gen_range(3..=9),
            rng.gen_range(3..=11),
            rng.gen_range(3..=13),
        ];
        let size = [0, 1, 2].map(|a| {
            let max = 5usize.min(dims[a]);
            let choices: Vec<usize> = (1..=max).step_by(2).collect();
            choices[rng.gen_range(0..choices.len())]
        });
        let grid = random_grid(&mut rng, dims, 10.0);
        let border = if case % 2 == 0 {
            Border::Replicate
        } else {
            Border::Zero
        };

        if case % 2 == 0 {
            let kernel = random_separable_kernel(&mut rng, size);
            let expected = oracle_convolve(&grid, &kernel, border);
            let separable = voxedge::convolve(&grid, &kernel, border).unwrap();
            let dense = voxedge::convolve(&grid, &kernel.without_factorization(), border).unwrap();
            for (i, &e) in expected.iter().enumerate() {
                assert!(
                    close_rel(separable.values()[i], e, 1e-9),
                    "separable vs oracle at {i}: {} vs {e}",
                    separable.values()[i]
                );
                assert!(
                    close_rel(dense.values()[i], e, 1e-9),
                    "dense vs oracle at {i}: {} vs {e}",
                    dense.values()[i]
                );
            }
        } else {
            let kernel = random_dense_kernel(&mut rng, size);
            let expected = oracle_convolve(&grid, &kernel, border);
            let dense = voxedge::convolve(&grid, &kernel, border).unwrap();
            for (i, &e) in expected.iter().enumerate() {
                assert!(
                    close_rel(dense.values()[i], e, 1e-9),
                    "dense vs oracle at {i}: {} vs {e}",
                    dense.values()[i]
                );
            }
        }
        pairs += 1;
    }

    assert!(pairs >= 100);
    assert!(start.elapsed().as_secs_f64() < 30.0);
    println!("criterion 2 PASS: {pairs} random (grid, kernel) pairs within 1e-9 of the oracle");
}

#[test]
fn criterion_03_sobel_responses_on_analytic_fields() {
    let start = Instant::now();

    let constant = DensityGrid::constant(unit_geometry([16, 12, 10]), 7.25).unwrap();
    let field = sobel_gradient(&constant).unwrap();
    assert!(field.magnitude().iter().all(|&m| m == 0.0));

    let ramp_x = DensityGrid::from_fn(unit_geometry([16, 12, 10]), |[i, _, _]| i as f64).unwrap();
    let field = sobel_gradient(&ramp_x).unwrap();
    let geom = *field.geometry();
    for k in 1..9 {
        for j in 1..11 {
            for i in 1..15 {
                let lin = geom.linear([i, j, k]);
                assert_eq!(field.gx()[lin], 32.0);
                assert_eq!(field.gy()[lin], 0.0);
                assert_eq!(field.gz()[lin], 0.0);
                assert_eq!(field.magnitude()[lin], 32.0);
            }
        }
    }

    let ramp_xy =
        DensityGrid::from_fn(unit_geometry([16, 12, 10]), |[i, j, _]| (i + j) as f64).unwrap();
    let field = sobel_gradient(&ramp_xy).unwrap();
    let expected = 32.0 * 2.0_f64.sqrt();
    for k in 1..9 {
        for j in 1..11 {
            for i in 1..15 {
                let m = field.magnitude()[geom.linear([i, j, k])];
                assert!(
                    (m - expected).abs() <= 1e-9 * expected,
                    "magnitude {m} vs {expected}"
                );
            }
        }
    }

    assert!(start.elapsed().as_secs_f64() < 5.0);
    println!("criterion 3 PASS: constant -> 0, ramp i -> 32 exactly, ramp i+j -> 32*sqrt(2)");
}

#[test]
fn criterion_04_density_rescaling_changes_nothing() {
    let start = Instant::now();
    let params = synthetic_canny();

    for seed in 0..20u64 {
        let mut r = rng(1000 + seed);
        let grid = random_grid(&mut r, [12, 10, 9], 100.0);
        let base_mask = canny_edges(&grid, &params).unwrap();
        let base_points = extract_by_gradient(&sobel_gradient(&grid).unwrap(), 0.25).unwrap();

        for c in [0.01, 1000.0] {
            let scaled = DensityGrid::new(
                *grid.geometry(),
                grid.values().iter().map(|v| v * c).collect(),
            )
            .unwrap();
            let mask = canny_edges(&scaled, &params).unwrap();
            assert_eq!(
                mask.bits(),
                base_mask.bits(),
                "canny mask, seed {seed} c {c}"
            );

            let points = extract_by_gradient(&sobel_gradient(&scaled).unwrap(), 0.25).unwrap();
            assert_eq!(
                points.points(),
                base_points.points(),
                "gradient extraction, seed {seed} c {c}"
            );
        }
    }

    assert!(start.elapsed().as_secs_f64() < 60.0);
    println!(
        "criterion 4 PASS: identical masks and extractions for c in {{0.01, 1, 1000}} on 20 grids"
    );
}

#[test]
fn criterion_05_spatial_index_equals_brute_force() {
    let start = Instant::now();
    let mut r = rng(0xC5);
    let thresholds = [0.5, 1.0, 1.5, 7.5, 30.0];

    for pair in 0..50 {
        use rand::Rng;
        let na = r.gen_range(1..=1000);
        let nb = r.gen_range(1..=1000);
        let a = random_cloud(&mut r, na, 50.0);
        let b = random_cloud(&mut r, nb, 50.0);

        let fast = nn_distances(&a, &b).unwrap();
        let slow = oracle_nn_distances(a.points(), b.points());
        assert_eq!(fast.len(), slow.len());
        for (i, (f, s)) in fast.iter().zip(&slow).enumerate() {
            assert!((f - s).abs() <= 1e-9, "pair {pair} point {i}: {f} vs {s}");
        }

        let (d2r, r2d) = chamfer(&a, &b).unwrap();
        let slow_rev = oracle_nn_distances(b.points(), a.points());
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        assert!((d2r - mean(&slow)).abs() <= 1e-9);
        assert!((r2d - mean(&slow_rev)).abs() <= 1e-9);

        let entries = completeness(&a, &b, &thresholds).unwrap();
        let counts = oracle_completeness_counts(a.points(), b.points(), &thresholds);
        for (e, c) in entries.iter().zip(&counts) {
            assert_eq!(
                e.covered_count, *c,
                "pair {pair} threshold {}",
                e.threshold_mm
            );
        }
    }

    assert!(start.elapsed().as_secs_f64() < 60.0);
    println!("criterion 5 PASS: 50 cloud pairs, kd-tree == quadratic oracle");
}

#[test]
fn criterion_06_sphere_reconstruction_quality() {
    let start = Instant::now();
    let spec = sphere_spec(0.0, 0);
    let geometry = sphere_geometry();
    let grid = voxedge::generate_synthetic(&spec, geometry.dims, geometry.spacing, geometry.origin)
        .unwrap();
    let reference = voxedge::analytic_surface_points(&spec, &geometry, 100_000, 1).unwrap();

    let canny_cloud = extract_by_mask(&canny_edges(&grid, &synthetic_canny()).unwrap());
    assert!(!canny_cloud.is_empty());
    let canny_d2r = mean_of(&nn_distances(&canny_cloud, &reference).unwrap());
    let canny_complete = completeness(&canny_cloud, &reference, &[1.0]).unwrap()[0];
    assert!(
        canny_d2r <= 1.0,
        "canny data-to-reference mean {canny_d2r} mm exceeds 1.0 mm"
    );
    assert!(
        canny_complete.covered_percent >= 95.0,
        "canny completeness {}% below 95%",
        canny_complete.covered_percent
    );

    let thr_cloud = extract_by_threshold(&grid, 50.0);
    let thr_d2r = mean_of(&nn_distances(&thr_cloud, &reference).unwrap());
    let thr_complete = completeness(&thr_cloud, &reference, &[1.0]).unwrap()[0];
    assert!(
        thr_complete.covered_percent >= 99.0,
        "threshold completeness {}% below 99%",
        thr_complete.covered_percent
    );
    assert!(
        thr_d2r > canny_d2r,
        "interior points should inflate the threshold mean: {thr_d2r} vs {canny_d2r}"
    );

    assert!(start.elapsed().as_secs_f64() < 120.0);
    println!(
        "criterion 6 PASS: canny d2r {canny_d2r:.3} mm / completeness {:.2}%; \
         threshold d2r {thr_d2r:.3} mm / completeness {:.2}%",
        canny_complete.covered_percent, thr_complete.covered_percent
    );
}

#[test]
fn criterion_07_log_zero_crossings_localize_and_flat_fields_stay_empty() {
    let start = Instant::now();

    // Logistic step along x, width one voxel, midpoint between voxels 15 and
    // 16. Marks within one voxel of the plane means i in {15, 16}.
    let midpoint = 15.5;
    let step = DensityGrid::from_fn(unit_geometry([32, 24, 20]), |[i, _, _]| {
        100.0 / (1.0 + (i as f64 - midpoint).exp())
    })
    .unwrap();
    let step_params = LogParams {
        mask_size: 7,
        sigma: 1.4,
        mode: LogMode::Analytic,
        contrast_min: 0.0,
    };
    let mask = log_edges(&step, &step_params).unwrap();
    assert!(mask.count() > 0);
    let near = mask
        .true_indices()
        .filter(|&lin| {
            let [i, _, _] = mask.geometry().unravel(lin);
            (i as f64 - midpoint).abs() <= 1.0
        })
        .count();
    let fraction = near as f64 / mask.count() as f64;
    assert!(
        fraction >= 0.95,
        "only {near} of {} marks near the step plane",
        mask.count()
    );

    for params in [step_params, LogParams::default()] {
        let constant = DensityGrid::constant(unit_geometry([24, 20, 18]), 5.0).unwrap();
        assert_eq!(log_edges(&constant, &params).unwrap().count(), 0);

        let affine = DensityGrid::from_fn(unit_geometry([24, 20, 18]), |[i, j, k]| {
            2.0 + 0.5 * i as f64 + 0.25 * j as f64 - 2.0 * k as f64
        })
        .unwrap();
        assert_eq!(log_edges(&affine, &params).unwrap().count(), 0);
    }

    assert!(start.elapsed().as_secs_f64() < 30.0);
    println!(
        "criterion 7 PASS: {:.1}% of {} marks within 1 voxel of the plane; flat fields empty",
        100.0 * fraction,
        mask.count()
    );
}

#[test]
fn criterion_08_smoothing_beats_raw_gradients_under_noise() {
    let spec = sphere_spec(5.0, 42); // noise sigma = 0.05 * amplitude
    let geometry = sphere_geometry();
    let grid = voxedge::generate_synthetic(&spec, geometry.dims, geometry.spacing, geometry.origin)
        .unwrap();
    let reference = voxedge::analytic_surface_points(&spec, &geometry, 100_000, 1).unwrap();

    let canny_cloud = extract_by_mask(&canny_edges(&grid, &synthetic_canny()).unwrap());
    let sobel_cloud = extract_by_gradient(&sobel_gradient(&grid).unwrap(), 0.25).unwrap();
    assert!(!canny_cloud.is_empty() && !sobel_cloud.is_empty());

    let canny_d2r = mean_of(&nn_distances(&canny_cloud, &reference).unwrap());
    let sobel_d2r = mean_of(&nn_distances(&sobel_cloud, &reference).unwrap());
    assert!(
        canny_d2r <= sobel_d2r,
        "canny {canny_d2r} mm should not exceed raw sobel {sobel_d2r} mm"
    );
    println!("criterion 8 PASS: canny d2r {canny_d2r:.3} mm <= raw sobel d2r {sobel_d2r:.3} mm");
}

#[test]
fn criterion_09_io_round_trips_and_error_classes() {
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let mut r = rng(0xC9);

    // Grid round-trip: payload is f32, so draw f32 values to make the
    // DensityGrid itself round-trip bitwise.
    let geometry = Geometry::new([4, 5, 6], [0.5, 0.25, 1.5], [-1.5, 2.25, 0.125]).unwrap();
    let grid = DensityGrid::from_fn(geometry, |_| {
        use rand::Rng;
        r.gen_range(0.0f32..100.0) as f64
    })
    .unwrap();
    let grid_path = dir.path().join("grid.vxgd");
    write_grid(&grid, &grid_path).unwrap();
    let back = read_grid(&grid_path).unwrap();
    assert_eq!(back.geometry(), grid.geometry());
    assert_eq!(back.values(), grid.values());

    let colors = ColorGrid::new(
        geometry,
        (0..geometry.len())
            .map(|_| {
                use rand::Rng;
                [
                    r.gen_range(0.0..1.0),
                    r.gen_range(0.0..1.0),
                    r.gen_range(0.0..1.0),
                ]
            })
            .collect(),
    )
    .unwrap();
    let color_path = dir.path().join("colors.vxgd");
    write_color_grid(&colors, &color_path).unwrap();
    assert_eq!(
        read_color_grid(&color_path).unwrap().values(),
        colors.values()
    );

    // PLY round-trips, binary bitwise and ascii bitwise (shortest f32 strings).
    let cloud = PointCloud::new(
        (0..257)
            .map(|_| {
                use rand::Rng;
                [
                    r.gen_range(-50.0f32..50.0) as f64,
                    r.gen_range(-50.0f32..50.0) as f64,
                    r.gen_range(-50.0f32..50.0) as f64,
                ]
            })
            .collect(),
        Some(
            (0..257)
                .map(|i| [(i % 256) as u8, (i * 7 % 256) as u8, 9])
                .collect(),
        ),
    )
    .unwrap();
    for (name, format) in [
        ("cloud_bin.ply", PlyFormat::BinaryLittleEndian),
        ("cloud_ascii.ply", PlyFormat::Ascii),
    ] {
        let path = dir.path().join(name);
        write_ply(&cloud, &path, format).unwrap();
        let back = read_ply(&path).unwrap();
        assert_eq!(back.points(), cloud.points(), "{name}");
        assert_eq!(back.colors(), cloud.colors(), "{name}");
    }

    // Malformed grid files: each corruption reports its own error.
    let valid = std::fs::read(&grid_path).unwrap();

    let bad_magic = dir.path().join("magic.vxgd");
    let mut bytes = valid.clone();
    bytes[..4].copy_from_slice(b"XXXX");
    std::fs::write(&bad_magic, &bytes).unwrap();
    assert!(matches!(read_grid(&bad_magic), Err(Error::BadMagic { .. })));

    let bad_version = dir.path().join("version.vxgd");
    let mut bytes = valid.clone();
    bytes[4..6].copy_from_slice(&2u16.to_le_bytes());
    std::fs::write(&bad_version, &bytes).unwrap();
    assert!(matches!(
        read_grid(&bad_version),
        Err(Error::UnsupportedVersion { found: 2, .. })
    ));

    let truncated = dir.path().join("short.vxgd");
    std::fs::write(&truncated, &valid[..valid.len() - 4]).unwrap();
    assert!(matches!(
        read_grid(&truncated),
        Err(Error::TruncatedPayload { .. })
    ));

    assert!(matches!(
        read_grid(&color_path),
        Err(Error::ChannelMismatch {
            found: 3,
            expected: 1,
            ..
        })
    ));
    assert!(matches!(
        read_color_grid(&grid_path),
        Err(Error::ChannelMismatch {
            found: 1,
            expected: 3,
            ..
        })
    ));

    // Malformed PLY: missing coordinates, then a row shortfall.
    let no_y = dir.path().join("no_y.ply");
    std::fs::write(
        &no_y,
        "ply\nformat ascii 1.0\nelement vertex 1\nproperty float x\nend_header\n1.0\n",
    )
    .unwrap();
    assert!(matches!(read_ply(&no_y), Err(Error::MalformedPly { .. })));

    let short = dir.path().join("short.ply");
    std::fs::write(
        &short,
        "ply\nformat ascii 1.0\nelement vertex 3\nproperty float x\nproperty float y\nproperty float z\nend_header\n0 0 0\n1 1 1\n",
    )
    .unwrap();
    assert!(matches!(read_ply(&short), Err(Error::MalformedPly { .. })));

    assert!(start.elapsed().as_secs_f64() < 10.0);
    println!("criterion 9 PASS: bitwise round-trips; corrupt fixtures hit their error classes");
}

#[test]
fn criterion_10_pipeline_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let synthetic = SyntheticGrid {
        spec: SyntheticSpec {
            shape: Shape::Sphere { radius: 6.0 },
            amplitude: 100.0,
            ramp_width: 0.5,
            noise_sigma: 2.0,
            seed: 3,
        },
        dims: [32; 3],
        spacing: [0.5; 3],
        origin: [0.0; 3],
    };
    let config = |out: std::path::PathBuf| PipelineConfig {
        input: GridSource::Synthetic(synthetic.clone()),
        color_grid: None,
        methods: vec![
            Method::Threshold { delta_t: 50.0 },
            Method::Sobel {
                rel_threshold: 0.25,
            },
            Method::Canny(synthetic_canny()),
            Method::Log(LogParams {
                mask_size: 5,
                sigma: 1.2,
                mode: LogMode::Analytic,
                contrast_min: 0.0,
            }),
        ],
        reference: Some(Reference::Analytic { count: 5_000 }),
        evaluate: true,
        eval_thresholds_mm: vec![0.5, 1.0, 1.5],
        subsample_cap: 2_500_000,
        seed: 9,
        output_dir: out,
        ply_format: PlyFormat::BinaryLittleEndian,
    };

    let first = config(dir.path().join("run_a"));
    let second = config(dir.path().join("run_b"));
    let outcome_a = cmd_pipeline(&first).unwrap();
    let outcome_b = cmd_pipeline(&second).unwrap();
    assert_eq!(outcome_a.table, outcome_b.table);

    // Byte-identical reconstructions and reports. Metadata carries wall-clock
    // timings and is compared structurally elsewhere.
    for (a, b) in outcome_a.outcomes.iter().zip(&outcome_b.outcomes) {
        assert_eq!(a.label, b.label);
        let ply_a = std::fs::read(first.output_dir.join(format!("{}.ply", a.label))).unwrap();
        let ply_b = std::fs::read(second.output_dir.join(format!("{}.ply", b.label))).unwrap();
        assert_eq!(ply_a, ply_b, "{} reconstruction differs", a.label);

        let eval_a =
            std::fs::read(first.output_dir.join(format!("{}.eval.json", a.label))).unwrap();
        let eval_b =
            std::fs::read(second.output_dir.join(format!("{}.eval.json", b.label))).unwrap();
        assert_eq!(eval_a, eval_b, "{} report differs", a.label);
    }
    let table_a = std::fs::read(first.output_dir.join("comparison.txt")).unwrap();
    let table_b = std::fs::read(second.output_dir.join("comparison.txt")).unwrap();
    assert_eq!(table_a, table_b);

    println!(
        "criterion 10 PASS: {} methods, identical artifacts across runs",
        outcome_a.outcomes.len()
    );
}

fn mean_of(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}
