//! Worked examples for sketches and skeleton selection, each checked
//! against an independent oracle (SVD tail, direct residual, dense
//! materialization or a Monte Carlo mean).

use skelid::dense::{gemm, matmul, svd_tail_norm, DenseMatrix, Op};
use skelid::skeleton::{
    adaptive_init, adaptive_step, column_id, cur_decompose, rand_cpqr, rand_lupp, rand_lupp_adap,
    residual_ur_estimates, row_id_error, stable_row_id_error, two_sided_id, AdaptiveOptions,
};
use skelid::sketch::{apply_sketch, make_gaussian, RngStream, Scale, SketchKind, SketchSide, SketchSpec};
use skelid::zoo::{gen_exact_rank, gen_fast_decay};

fn unit_row_isometry(spec: SketchSpec, draws: u64) -> f64 {
    let mut x = DenseMatrix::zeros(1, spec.n);
    x.col_mut(3)[0] = 1.0;
    (0..draws)
        .map(|t| spec.draw(&RngStream::new(40, t)).unwrap().apply(&x).unwrap().frobenius_norm().powi(2))
        .sum::<f64>()
        / draws as f64
}

#[test]
fn gaussian_entries_have_zero_mean() {
    let n = 1000;
    let g = make_gaussian(&SketchSpec::gaussian(n, n).with_scale(Scale::Unit), &RngStream::new(1, 1)).unwrap();
    let mean = g.as_slice().iter().sum::<f64>() / (n * n) as f64;
    assert!(mean.abs() <= 4.0 / (n as f64), "{mean}");
}

#[test]
fn single_unit_row_is_preserved_on_average() {
    assert!((unit_row_isometry(SketchSpec::gaussian(64, 16), 10_000) - 1.0).abs() <= 0.05);
    assert!((unit_row_isometry(SketchSpec::srtt(256, 64), 10_000) - 1.0).abs() <= 0.10);
    assert!((unit_row_isometry(SketchSpec::sparse_sign(64, 16, 8), 10_000) - 1.0).abs() <= 0.10);
}

#[test]
fn full_width_trigonometric_sketch_is_orthogonal() {
    let n = 48;
    let omega = SketchSpec::srtt(n, n).draw(&RngStream::new(2, 2)).unwrap().to_dense();
    let gram = gemm(&omega, Op::Trans, &omega, Op::NoTrans).unwrap();
    assert!(gram.distance(&DenseMatrix::identity(n)).unwrap() <= 1e-10 * n as f64);
    let zero = DenseMatrix::zeros(5, n);
    let op = SketchSpec::srtt(n, 10).draw(&RngStream::new(2, 3)).unwrap();
    assert_eq!(op.apply(&zero).unwrap(), DenseMatrix::zeros(5, 10));
}

#[test]
fn saturated_sparse_sign_has_no_zeros() {
    let spec = SketchSpec::sparse_sign(30, 6, 6);
    let omega = spec.draw(&RngStream::new(3, 3)).unwrap().to_dense();
    let scale = omega.as_slice()[0].abs();
    assert!(omega.as_slice().iter().all(|v| (v.abs() - scale).abs() < 1e-15 && *v != 0.0));
}

#[test]
fn sparse_apply_matches_dense_product_closely() {
    let a = DenseMatrix::from_fn(9, 70, |i, j| ((i * 31 + j * 17) % 23) as f64 / 7.0 - 1.5);
    let op = SketchSpec::sparse_sign(70, 20, 8).draw(&RngStream::new(4, 4)).unwrap();
    let dense = matmul(&a, &op.to_dense()).unwrap();
    let diff = op.apply(&a).unwrap().distance(&dense).unwrap();
    assert!(diff <= 1e-13 * dense.frobenius_norm().max(1.0), "{diff}");
}

#[test]
fn rank_one_sketch_columns_are_parallel() {
    let u: Vec<f64> = (0..12).map(|i| (i as f64 - 5.5) / 3.0).collect();
    let v: Vec<f64> = (0..40).map(|j| ((j * 7) % 11) as f64 - 5.0).collect();
    let a = DenseMatrix::from_fn(12, 40, |i, j| u[i] * v[j]);
    for kind in [SketchKind::Gaussian, SketchKind::Srtt, SketchKind::SparseSign] {
        let y = SketchSpec::new(kind, 40, 10).draw(&RngStream::new(5, 5)).unwrap().apply(&a).unwrap();
        let un = u.iter().map(|x| x * x).sum::<f64>().sqrt();
        for j in 0..10 {
            let col = y.col(j);
            let dot: f64 = col.iter().zip(&u).map(|(c, x)| c * x).sum();
            let norm = col.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!((dot.abs() - norm * un).abs() <= 1e-10 * (norm * un).max(1e-300), "{}", kind.name());
        }
    }
}

#[test]
fn transposed_side_uses_the_transpose() {
    let a = DenseMatrix::from_fn(6, 4, |i, j| (i + 3 * j) as f64);
    let op = SketchSpec::gaussian(6, 3).draw(&RngStream::new(6, 6)).unwrap();
    let x = apply_sketch(&a, &op, SketchSide::TransposedRight).unwrap();
    assert_eq!(x.shape(), (4, 3));
    assert!(x.distance(&op.apply(&a.transpose()).unwrap()).unwrap() <= 1e-12 * x.frobenius_norm());
}

#[test]
fn distinct_streams_are_uncorrelated() {
    let spec = SketchSpec::gaussian(200, 50).with_scale(Scale::Unit);
    let a = spec.draw(&RngStream::new(7, 1)).unwrap().to_dense();
    let b = spec.draw(&RngStream::new(7, 2)).unwrap().to_dense();
    let n = a.as_slice().len() as f64;
    let corr = a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| x * y).sum::<f64>()
        / (a.frobenius_norm() * b.frobenius_norm());
    assert!(corr.abs() < 4.0 / n.sqrt(), "{corr}");
}

#[test]
fn fixed_rank_lu_ids_are_near_optimal() {
    let g = gen_fast_decay(300, 300, 1e-16, &RngStream::new(8, 1)).unwrap();
    let k = 150;
    let tail = svd_tail_norm(&g.sigma, k);
    let spec = SketchSpec::gaussian(300, k);
    let lu = rand_lupp(&g.a, k, &spec, &RngStream::new(8, 2)).unwrap();
    let qr = rand_cpqr(&g.a, k, &spec, &RngStream::new(8, 2)).unwrap();
    let lu_rows = lu.row_idx.as_ref().unwrap();
    let qr_rows = qr.row_idx.as_ref().unwrap();
    let s_lu = stable_row_id_error(&g.a, lu_rows).unwrap();
    let s_qr = stable_row_id_error(&g.a, qr_rows).unwrap();
    assert!(s_lu <= 10.0 * tail, "{s_lu} vs tail {tail}");
    assert!(s_qr <= 2.0 * s_lu, "{s_qr} vs {s_lu}");
    let mut sorted = qr_rows.clone();
    sorted.sort_unstable();
    sorted.dedup();
    assert_eq!(sorted.len(), k);
}

#[test]
fn exact_rank_inputs_are_reproduced() {
    let a = gen_exact_rank(90, 60, 15, &RngStream::new(9, 1)).unwrap();
    let tol = 1e-10 * a.frobenius_norm();
    for k in [15, 20] {
        let spec = SketchSpec::gaussian(60, k);
        for res in [
            rand_lupp(&a, k, &spec, &RngStream::new(9, 2)).unwrap(),
            rand_cpqr(&a, k, &spec, &RngStream::new(9, 2)).unwrap(),
        ] {
            let rows = res.row_idx.as_ref().unwrap();
            assert!(row_id_error(&a, rows, res.w.as_ref().unwrap()).unwrap() <= tol);
            assert!(stable_row_id_error(&a, rows).unwrap() <= tol);
        }
    }
    let spec = SketchSpec::gaussian(60, 5);
    let mut state = adaptive_init(&a, 5, &spec, &RngStream::new(9, 3)).unwrap();
    assert_eq!(state.lu().l1().shape(), (5, 5));
    for _ in 0..2 {
        adaptive_step(&mut state, &a).unwrap();
    }
    let (e, _) = adaptive_step(&mut state, &a).unwrap();
    assert!(e <= tol, "{e}");
}

#[test]
fn schur_estimate_is_unbiased_within_five_standard_errors() {
    let a = gen_fast_decay(100, 100, 1e-16, &RngStream::new(10, 1)).unwrap().a;
    let spec = SketchSpec::gaussian(100, 20);
    let state = adaptive_init(&a, 20, &spec, &RngStream::new(10, 2)).unwrap();
    let id = state.row_id().unwrap();
    let truth = row_id_error(&a, &id.rows, &id.w).unwrap().powi(2);
    let samples: Vec<f64> = (0..1000)
        .map(|t| {
            let y = spec.draw(&RngStream::new(11, t)).unwrap().apply(&a).unwrap();
            state.lu().schur(&y).unwrap().norm().powi(2)
        })
        .collect();
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1.0);
    assert!((mean - truth).abs() <= 5.0 * (var / n).sqrt(), "{mean} vs {truth}");
}

#[test]
fn ur_estimates_bound_the_optimal_error() {
    let g = gen_fast_decay(500, 500, 1e-16, &RngStream::new(12, 1)).unwrap();
    let tail = svd_tail_norm(&g.sigma, 100);
    let spec = SketchSpec::gaussian(500, 50);
    for seed in 0..5 {
        let mut state = adaptive_init(&g.a, 50, &spec, &RngStream::new(seed, 2)).unwrap();
        adaptive_step(&mut state, &g.a).unwrap();
        assert_eq!(state.rank(), 100);
        let unit = spec.with_scale(Scale::Unit);
        let est = residual_ur_estimates(&state, &g.a, 10, &unit, &RngStream::new(seed, 3)).unwrap();
        assert!(est.est_norm >= tail, "{} < {tail}", est.est_norm);
        assert!(est.est_max <= est.est_norm * 10f64.sqrt());
    }
    let low = gen_exact_rank(80, 60, 20, &RngStream::new(13, 1)).unwrap();
    let spec = SketchSpec::gaussian(60, 20);
    let state = adaptive_init(&low, 20, &spec, &RngStream::new(13, 2)).unwrap();
    let est = residual_ur_estimates(&state, &low, 5, &spec.with_scale(Scale::Unit), &RngStream::new(13, 3)).unwrap();
    assert!(est.norm_ur <= 1e-10 * low.frobenius_norm());
    assert!(residual_ur_estimates(&state, &low, 20, &spec, &RngStream::new(13, 3)).is_err());
}

#[test]
fn random_skeletons_rarely_beat_adaptive_ones() {
    use rand::seq::index::sample;
    let g = gen_fast_decay(200, 120, 1e-12, &RngStream::new(14, 1)).unwrap();
    let opts = AdaptiveOptions::new(10, 1e-6 * g.a.frobenius_norm());
    let mut wins = 0;
    for t in 0..50 {
        let res = rand_lupp_adap(&g.a, &opts, &SketchSpec::gaussian(120, 10), &RngStream::new(t, 2)).unwrap();
        let k = res.rank;
        let ours = stable_row_id_error(&g.a, res.row_idx.as_ref().unwrap()).unwrap();
        let random = sample(&mut RngStream::new(t, 3).rng(), 200, k).into_vec();
        if stable_row_id_error(&g.a, &random).unwrap() >= ours {
            wins += 1;
        }
    }
    assert!(wins >= 45, "{wins} of 50");
}

#[test]
fn error_trace_decreases_on_fast_decay() {
    let g = gen_fast_decay(200, 150, 1e-14, &RngStream::new(15, 1)).unwrap();
    let opts = AdaptiveOptions::new(10, 1e-10 * g.a.frobenius_norm());
    let mut monotone = 0;
    for seed in 0..40 {
        let res = rand_lupp_adap(&g.a, &opts, &SketchSpec::gaussian(150, 10), &RngStream::new(seed, 2)).unwrap();
        let e: Vec<f64> = res.trace.records.iter().map(|r| r.e_schur).collect();
        if e.windows(2).all(|w| w[1] <= w[0]) {
            monotone += 1;
        }
    }
    assert!(monotone >= 38, "{monotone} of 40 monotone");
}

#[test]
fn two_sided_and_column_ids_agree_on_exact_rank() {
    let a = gen_exact_rank(60, 45, 9, &RngStream::new(16, 1)).unwrap();
    let rng = RngStream::new(16, 2);
    let col = column_id(&a, 9, &SketchSpec::gaussian(60, 9), &rng).unwrap().reconstruction_error(&a).unwrap();
    let two = two_sided_id(&a, 9, &SketchSpec::gaussian(45, 9), &rng).unwrap().reconstruction_error(&a).unwrap();
    assert!((col - two).abs() <= 1e-10 * a.frobenius_norm());
}

#[test]
fn cur_error_is_within_a_constant_of_optimal() {
    let g = gen_fast_decay(300, 300, 1e-16, &RngStream::new(17, 1)).unwrap();
    let cur = cur_decompose(&g.a, 100, &SketchSpec::gaussian(300, 100), &RngStream::new(17, 2)).unwrap();
    let tail = svd_tail_norm(&g.sigma, 100);
    let err = cur.reconstruction_error(&g.a).unwrap();
    assert!(err <= 100.0 * tail, "{err} vs {tail}");
    assert_eq!(cur.c(&g.a), g.a.select_cols(&cur.col_idx));
    assert_eq!(cur.r(&g.a), g.a.select_rows(&cur.row_idx));
}
