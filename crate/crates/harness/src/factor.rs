//! Production entry point: adaptive row ID of a user matrix.

use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use skelid::skeleton::{
    rand_lupp_adap_observed, ur_estimates, AdaptiveOptions, SkeletonResult, Status, UrSample,
};
use skelid::sketch::Scale;
use skelid::zoo::{csv_writer, fmt_f64, write_csv_trace, write_raw_f64};

use crate::config::ExperimentConfig;
use crate::prepare::{absolute_tau, sketch_spec, trial_stream, Prepared};

/// Exit code for a finished run.
pub fn exit_code(status: Status) -> u8 {
    match status {
        Status::NotConverged => 2,
        Status::RankExhausted => 3,
        _ => 0,
    }
}

/// Runs the adaptive driver, filling the `U_r` estimates of every trace
/// record that has room for `p` oversampling rows.
pub fn run(cfg: &ExperimentConfig, prep: &Prepared) -> Result<SkeletonResult> {
    let a = &prep.a;
    let (m, n) = a.shape();
    let tau = absolute_tau(cfg, a)?;
    let spec = sketch_spec(cfg.sketch_kind(), cfg, n);
    let rng = trial_stream(cfg, 0);
    let ur = UrSample::draw(a, cfg.p, &spec.with_scale(Scale::Unit), &rng.fork(u64::MAX))?;
    let mut opts = AdaptiveOptions::new(cfg.block, tau);
    opts.max_rank = cfg.max_rank;
    let res = rand_lupp_adap_observed(a, &opts, &spec, &rng, |state, _, rec| {
        if state.rank() + cfg.p <= m {
            let e = ur_estimates(state.lu(), &ur)?;
            rec.est_norm = Some(e.est_norm);
            rec.est_max = Some(e.est_max);
        }
        Ok(())
    })?;
    Ok(res)
}

fn status_name(status: Status) -> &'static str {
    match status {
        Status::FixedRank => "fixed-rank",
        Status::Converged => "converged",
        Status::NotConverged => "not-converged",
        Status::RankExhausted => "rank-exhausted",
        Status::RankDeficient { .. } => "rank-deficient",
    }
}

/// Writes `skeleton.txt` (one row index per line), `w.bin` (raw
/// column-major `W`), `trace.csv` and `summary.csv` into `dir`.
pub fn write(res: &SkeletonResult, prep: &Prepared, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let rows = res.row_idx.as_deref().unwrap_or(&[]);
    let mut f = std::io::BufWriter::new(std::fs::File::create(dir.join("skeleton.txt"))?);
    for r in rows {
        writeln!(f, "{r}")?;
    }
    f.flush()?;
    if let Some(w) = &res.w {
        write_raw_f64(dir.join("w.bin"), w)?;
    }
    write_csv_trace(dir.join("trace.csv"), &res.trace)?;
    let mut s = csv_writer(dir.join("summary.csv"), "summary")?;
    s.write_record(["key", "value"])?;
    let w_shape = res.w.as_ref().map(|w| format!("{}x{}", w.rows(), w.cols())).unwrap_or_default();
    for (k, v) in [
        ("status", status_name(res.status).to_string()),
        ("rank", res.rank.to_string()),
        ("rows", prep.a.rows().to_string()),
        ("cols", prep.a.cols().to_string()),
        ("orientation", prep.orientation().to_string()),
        ("w_shape", w_shape),
        ("max_abs_w", fmt_f64(res.max_interp_entry())),
    ] {
        s.write_record([k, v.as_str()])?;
    }
    s.flush()?;
    Ok(())
}
