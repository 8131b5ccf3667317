//! Wall-clock comparison of full and randomized pivoted factorizations.

use std::path::Path;
use std::time::Instant;

use anyhow::Result;
use skelid::dense::{cpqr_r, lupp};
use skelid::skeleton::{rand_cpqr, rand_lupp, rand_lupp_adap, AdaptiveOptions};
use skelid::zoo::{csv_writer, fmt_f64};

use crate::config::ExperimentConfig;
use crate::prepare::{absolute_tau, sketch_spec, trial_stream, Prepared};

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub method: &'static str,
    pub m: usize,
    pub n: usize,
    pub k: usize,
    pub b: usize,
    pub seconds: f64,
}

/// Median wall time of `runs` calls after one discarded warm-up call.
pub fn time_median<T>(runs: usize, mut f: impl FnMut() -> Result<T>) -> Result<f64> {
    f()?;
    let mut times = Vec::with_capacity(runs);
    for _ in 0..runs {
        let t = Instant::now();
        std::hint::black_box(f()?);
        times.push(t.elapsed().as_secs_f64());
    }
    times.sort_by(f64::total_cmp);
    let mid = times.len() / 2;
    Ok(if times.len() % 2 == 1 {
        times[mid]
    } else {
        0.5 * (times[mid - 1] + times[mid])
    })
}

/// Which methods to time.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Methods {
    /// `lupp` and `cpqr` of the whole matrix.
    Full,
    /// Full factorizations plus the three randomized selectors.
    All,
}

pub fn run(cfg: &ExperimentConfig, prep: &Prepared, methods: Methods) -> Result<Vec<BenchRow>> {
    let a = &prep.a;
    let (m, n) = a.shape();
    let row = |method, k, b, seconds| BenchRow {
        method,
        m,
        n,
        k,
        b,
        seconds,
    };
    let mut rows = vec![
        row("lupp", n, 0, time_median(cfg.runs, || Ok(lupp(a)?))?),
        row("cpqr", n, 0, time_median(cfg.runs, || Ok(cpqr_r(a, None)?))?),
    ];
    if methods == Methods::Full {
        return Ok(rows);
    }
    let tau = absolute_tau(cfg, a)?;
    let spec = sketch_spec(cfg.sketch_kind(), cfg, n);
    let rng = trial_stream(cfg, 0);
    let mut opts = AdaptiveOptions::new(cfg.block, tau);
    opts.max_rank = cfg.max_rank;
    let k = rand_lupp_adap(a, &opts, &spec, &rng)?.rank;
    rows.push(row(
        "randLUPPadap",
        k,
        cfg.block,
        time_median(cfg.runs, || Ok(rand_lupp_adap(a, &opts, &spec, &rng)?))?,
    ));
    rows.push(row("randLUPP", k, 0, time_median(cfg.runs, || Ok(rand_lupp(a, k, &spec, &rng)?))?));
    rows.push(row("randCPQR", k, 0, time_median(cfg.runs, || Ok(rand_cpqr(a, k, &spec, &rng)?))?));
    Ok(rows)
}

pub fn write(rows: &[BenchRow], dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut w = csv_writer(dir.join("bench.csv"), "bench")?;
    w.write_record(["method", "m", "n", "k", "b", "seconds"])?;
    for r in rows {
        w.write_record([
            r.method.to_string(),
            r.m.to_string(),
            r.n.to_string(),
            r.k.to_string(),
            r.b.to_string(),
            fmt_f64(r.seconds),
        ])?;
    }
    w.flush()?;
    Ok(())
}
