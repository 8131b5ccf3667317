use skelid::sketch::SketchKind;
use skelid::zoo::MatrixRecipe;
use skelid_harness::bench::{self, Methods};
use skelid_harness::{accuracy, growth, ExperimentConfig, Prepared};

fn config(matrix: &str) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(matrix.parse::<MatrixRecipe>().unwrap());
    cfg.block = 10;
    cfg.p = 5;
    cfg.trials = 4;
    cfg.tau = 1e-10;
    cfg.relative = true;
    cfg
}

#[test]
fn optimal_error_bounds_every_measured_error() {
    for matrix in ["fastdecay:150x120", "kahan:100"] {
        let cfg = config(matrix);
        let mut prep = Prepared::load(&cfg.recipe, cfg.seed).unwrap();
        let report = accuracy::run(&cfg, &mut prep).unwrap();
        assert!(!report.rows.is_empty());
        for r in &report.rows {
            for e in [r.id_lupp, r.sid_lupp, r.id_cpqr, r.sid_cpqr] {
                assert!(r.svd_tail <= e + 1e-12, "{matrix} k={}: tail {} > {e}", r.k, r.svd_tail);
            }
        }
    }
}

#[test]
fn accuracy_and_growth_csv_are_reproducible() {
    let cfg = config("fastdecay:120x90");
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for d in &dirs {
        let mut prep = Prepared::load(&cfg.recipe, cfg.seed).unwrap();
        accuracy::write(&accuracy::run(&cfg, &mut prep).unwrap(), d.path()).unwrap();
        let rows = growth::run(&cfg, &mut prep).unwrap();
        growth::write(&rows, prep.orientation(), d.path()).unwrap();
    }
    for f in ["accuracy.csv", "accuracy_means.csv", "growth.csv", "growth_means.csv"] {
        let a = std::fs::read(dirs[0].path().join(f)).unwrap();
        let b = std::fs::read(dirs[1].path().join(f)).unwrap();
        assert_eq!(a, b, "{f}");
    }
}

#[test]
fn growth_ratios_are_finite_at_grid_endpoints() {
    let mut cfg = config("fastdecay:200");
    cfg.trials = 2;
    let mut prep = Prepared::load(&cfg.recipe, cfg.seed).unwrap();
    let rows = growth::run(&cfg, &mut prep).unwrap();
    let ks = growth::rank_grid(200, 200, cfg.p, cfg.grid);
    for kind in [SketchKind::Gaussian, SketchKind::Srtt, SketchKind::SparseSign] {
        for k in [ks[0], *ks.last().unwrap()] {
            let hits: Vec<_> = rows.iter().filter(|r| r.kind == kind && r.k == k).collect();
            assert_eq!(hits.len(), 2);
            for r in hits {
                for v in [r.ratio_norm, r.ratio_max, r.reference] {
                    assert!(v.is_finite() && v > 0.0, "{} k={k}: {v}", kind.name());
                }
            }
        }
    }
}

#[test]
fn adversarial_growth_departs_from_reference() {
    let mut cfg = config("chan:200");
    cfg.trials = 1;
    cfg.sketch = Some(SketchKind::Gaussian);
    let mut prep = Prepared::load(&cfg.recipe, cfg.seed).unwrap();
    let rows = growth::run(&cfg, &mut prep).unwrap();
    let over = rows.iter().filter(|r| r.ratio_norm > r.reference).count();
    eprintln!("chan: ratio above the reference at {over} of {} ranks", rows.len());
    assert!(rows.iter().all(|r| r.ratio_norm.is_finite()));
}

#[test]
fn adaptive_runtime_is_close_to_fixed_rank() {
    let mut cfg = config("fastdecay:1000");
    cfg.block = 128;
    cfg.p = 10;
    cfg.tau = 1e-6;
    let prep = Prepared::load(&cfg.recipe, cfg.seed).unwrap();
    let rows = bench::run(&cfg, &prep, Methods::All).unwrap();
    let t = |m: &str| rows.iter().find(|r| r.method == m).unwrap();
    assert!(rows.iter().all(|r| r.seconds > 0.0));
    let (adap, fixed) = (t("randLUPPadap"), t("randLUPP"));
    assert_eq!(adap.k, fixed.k);
    assert!(adap.seconds <= 3.0 * fixed.seconds, "{} vs {}", adap.seconds, fixed.seconds);
}
