//! Ratio of the optimal rank-`k` error to the size of `U_r`, against the
//! reference curve `(4 ln k / k) sqrt(m - k)`.
//!
//! `U_r` is reported in the unit-variance convention for every sketch
//! kind, so one reference curve applies to all of them.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Result};
use rayon::prelude::*;
use skelid::dense::{svd_tail_norm, BlockedLu};
use skelid::skeleton::{ur_estimates, UrSample};
use skelid::sketch::{Scale, SketchKind, SketchSpec};
use skelid::zoo::{csv_writer, fmt_f64};

use crate::config::ExperimentConfig;
use crate::prepare::{trial_stream, Prepared};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GrowthRow {
    pub kind: SketchKind,
    pub trial: usize,
    pub k: usize,
    pub svd_tail: f64,
    pub norm_ur: f64,
    pub max_ur: f64,
    pub ratio_norm: f64,
    pub ratio_max: f64,
    pub reference: f64,
}

pub fn reference(k: usize, m: usize) -> f64 {
    let kf = k as f64;
    4.0 * kf.ln() / kf * ((m - k) as f64).sqrt()
}

/// `grid` ranks spread evenly up to 90% of `min(m, n)`, leaving room for
/// `p` oversampling rows.
pub fn rank_grid(m: usize, n: usize, p: usize, grid: usize) -> Vec<usize> {
    let top = (m.min(n) * 9 / 10).min(m.saturating_sub(p));
    let mut ks: Vec<usize> = (1..=grid).map(|j| (j * top / grid).max(2)).collect();
    ks.dedup();
    ks
}

fn kinds(cfg: &ExperimentConfig) -> Vec<SketchKind> {
    match cfg.sketch {
        Some(k) => vec![k],
        None => vec![SketchKind::Gaussian, SketchKind::Srtt, SketchKind::SparseSign],
    }
}

fn run_trial(cfg: &ExperimentConfig, prep: &Prepared, sigma: &[f64], kind: SketchKind, ks: &[usize], trial: usize) -> Result<Vec<GrowthRow>> {
    let a = &prep.a;
    let (m, n) = a.shape();
    let top = *ks.last().unwrap();
    let mut spec = SketchSpec::new(kind, n, top).with_scale(Scale::Unit);
    spec.zeta = cfg.zeta;
    let spec = spec.resized(n, top);
    let rng = trial_stream(cfg, trial).fork(kind as u64);
    let y = spec.draw(&rng.fork(0))?.apply(a)?;
    let ur = UrSample::draw(a, cfg.p, &spec, &rng.fork(1))?;
    let mut lu = BlockedLu::new(m);
    let mut done = 0;
    let mut rows = Vec::with_capacity(ks.len());
    for &k in ks {
        lu.extend(&y.columns(done..k))?;
        done = k;
        let e = ur_estimates(&lu, &ur)?;
        let tail = svd_tail_norm(sigma, k.min(sigma.len()));
        rows.push(GrowthRow {
            kind,
            trial,
            k,
            svd_tail: tail,
            norm_ur: e.norm_ur,
            max_ur: e.max_ur,
            ratio_norm: tail / e.norm_ur,
            ratio_max: tail / e.max_ur,
            reference: reference(k, m),
        });
    }
    Ok(rows)
}

pub fn run(cfg: &ExperimentConfig, prep: &mut Prepared) -> Result<Vec<GrowthRow>> {
    let (m, n) = prep.a.shape();
    let ks = rank_grid(m, n, cfg.p, cfg.grid);
    if ks.is_empty() || ks[0] >= m.min(n) {
        bail!("matrix {m}x{n} too small for a rank grid");
    }
    let sigma = prep.sigma()?.to_vec();
    let prep = &*prep;
    let jobs: Vec<(SketchKind, usize)> = kinds(cfg)
        .into_iter()
        .flat_map(|k| (0..cfg.trials).map(move |t| (k, t)))
        .collect();
    let rows: Vec<Vec<GrowthRow>> = jobs
        .par_iter()
        .map(|&(kind, t)| run_trial(cfg, prep, &sigma, kind, &ks, t))
        .collect::<Result<_>>()?;
    Ok(rows.into_iter().flatten().collect())
}

/// Means over trials per `(sketch, k)`.
pub fn means(rows: &[GrowthRow]) -> Vec<GrowthRow> {
    let mut groups: BTreeMap<(&'static str, usize), (GrowthRow, usize)> = BTreeMap::new();
    for r in rows {
        let e = groups.entry((r.kind.name(), r.k)).or_insert((
            GrowthRow {
                trial: 0,
                svd_tail: 0.0,
                norm_ur: 0.0,
                max_ur: 0.0,
                ratio_norm: 0.0,
                ratio_max: 0.0,
                ..*r
            },
            0,
        ));
        e.0.svd_tail += r.svd_tail;
        e.0.norm_ur += r.norm_ur;
        e.0.max_ur += r.max_ur;
        e.0.ratio_norm += r.ratio_norm;
        e.0.ratio_max += r.ratio_max;
        e.1 += 1;
    }
    groups
        .into_values()
        .map(|(mut g, c)| {
            let c = c as f64;
            g.svd_tail /= c;
            g.norm_ur /= c;
            g.max_ur /= c;
            g.ratio_norm /= c;
            g.ratio_max /= c;
            g.trial = c as usize;
            g
        })
        .collect()
}

const HEADER: [&str; 9] = [
    "sketch", "trial", "k", "svdTail", "normUr", "maxUr", "svdTail/normUr", "svdTail/maxUr", "reference",
];

fn write_rows(path: &Path, tag: &str, rows: &[GrowthRow], second: &str) -> Result<()> {
    let mut w = csv_writer(path, tag)?;
    let mut header = HEADER;
    header[1] = second;
    w.write_record(header)?;
    for r in rows {
        w.write_record([
            r.kind.name().to_string(),
            r.trial.to_string(),
            r.k.to_string(),
            fmt_f64(r.svd_tail),
            fmt_f64(r.norm_ur),
            fmt_f64(r.max_ur),
            fmt_f64(r.ratio_norm),
            fmt_f64(r.ratio_max),
            fmt_f64(r.reference),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write(rows: &[GrowthRow], orientation: &str, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let tag = format!("growth orientation={orientation}");
    write_rows(&dir.join("growth.csv"), &tag, rows, "trial")?;
    write_rows(&dir.join("growth_means.csv"), &tag, &means(rows), "trials")?;
    Ok(())
}
