//! Per-iteration accuracy of the adaptive row ID against randomized CPQR
//! on the same sample, the SVD optimum and the `U_r` estimates.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::Result;
use rayon::prelude::*;
use skelid::dense::svd_tail_norm;
use skelid::skeleton::{
    rand_lupp_adap_observed, row_id_error, row_id_from_cpqr, stable_row_id_error, ur_estimates,
    AdaptiveOptions, UrSample,
};
use skelid::sketch::Scale;
use skelid::zoo::{csv_writer, fmt_f64};

use crate::config::ExperimentConfig;
use crate::prepare::{absolute_tau, sketch_spec, trial_stream, Prepared};

pub const COLUMNS: [&str; 9] = [
    "k_t",
    "svdTail",
    "eSchur",
    "idErrLUPP",
    "sIdErrLUPP",
    "idErrCPQR",
    "sIdErrCPQR",
    "estNormUr",
    "estMaxUr",
];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AccuracyRow {
    pub trial: usize,
    pub k: usize,
    pub svd_tail: f64,
    pub e_schur: f64,
    pub id_lupp: f64,
    pub sid_lupp: f64,
    pub id_cpqr: f64,
    pub sid_cpqr: f64,
    /// NaN when `k + p` exceeds the row count.
    pub est_norm: f64,
    pub est_max: f64,
}

impl AccuracyRow {
    fn values(&self) -> [f64; 8] {
        [
            self.svd_tail,
            self.e_schur,
            self.id_lupp,
            self.sid_lupp,
            self.id_cpqr,
            self.sid_cpqr,
            self.est_norm,
            self.est_max,
        ]
    }
}

/// Mean of every column over the trials that reached `k`.
#[derive(Clone, Debug, PartialEq)]
pub struct MeanRow {
    pub k: usize,
    pub count: usize,
    pub values: [f64; 8],
}

impl MeanRow {
    pub fn svd_tail(&self) -> f64 {
        self.values[0]
    }
    pub fn e_schur(&self) -> f64 {
        self.values[1]
    }
    pub fn id_lupp(&self) -> f64 {
        self.values[2]
    }
    pub fn sid_lupp(&self) -> f64 {
        self.values[3]
    }
    pub fn id_cpqr(&self) -> f64 {
        self.values[4]
    }
    pub fn sid_cpqr(&self) -> f64 {
        self.values[5]
    }
}

#[derive(Clone, Debug)]
pub struct AccuracyReport {
    pub rows: Vec<AccuracyRow>,
    pub means: Vec<MeanRow>,
    pub orientation: &'static str,
}

fn run_trial(cfg: &ExperimentConfig, prep: &Prepared, sigma: &[f64], tau: f64, trial: usize) -> Result<Vec<AccuracyRow>> {
    let a = &prep.a;
    let (m, n) = a.shape();
    let spec = sketch_spec(cfg.sketch_kind(), cfg, n);
    let rng = trial_stream(cfg, trial);
    let ur_spec = spec.with_scale(Scale::Unit);
    let ur = UrSample::draw(a, cfg.p, &ur_spec, &rng.fork(u64::MAX))?;
    let mut opts = AdaptiveOptions::new(cfg.block, tau);
    opts.max_rank = cfg.max_rank;
    let mut rows = Vec::new();
    rand_lupp_adap_observed(a, &opts, &spec, &rng, |state, _pending, rec| {
        let k = state.rank();
        let lu_id = state.row_id()?;
        let qr_id = row_id_from_cpqr(state.sample(), k)?;
        let (est_norm, est_max) = if k + cfg.p <= m {
            let e = ur_estimates(state.lu(), &ur)?;
            rec.est_norm = Some(e.est_norm);
            rec.est_max = Some(e.est_max);
            (e.est_norm, e.est_max)
        } else {
            (f64::NAN, f64::NAN)
        };
        rows.push(AccuracyRow {
            trial,
            k,
            svd_tail: svd_tail_norm(sigma, k.min(sigma.len())),
            e_schur: rec.e_schur,
            id_lupp: row_id_error(a, &lu_id.rows, &lu_id.w)?,
            sid_lupp: stable_row_id_error(a, &lu_id.rows)?,
            id_cpqr: row_id_error(a, &qr_id.rows, &qr_id.w)?,
            sid_cpqr: stable_row_id_error(a, &qr_id.rows)?,
            est_norm,
            est_max,
        });
        Ok(())
    })?;
    Ok(rows)
}

pub fn mean_rows(rows: &[AccuracyRow]) -> Vec<MeanRow> {
    let mut groups: BTreeMap<usize, (usize, [f64; 8])> = BTreeMap::new();
    for r in rows {
        let g = groups.entry(r.k).or_insert((0, [0.0; 8]));
        g.0 += 1;
        for (acc, v) in g.1.iter_mut().zip(r.values()) {
            *acc += v;
        }
    }
    groups
        .into_iter()
        .map(|(k, (count, sums))| MeanRow {
            k,
            count,
            values: sums.map(|s| s / count as f64),
        })
        .collect()
}

/// Runs all trials (in parallel, deterministic order) and aggregates.
pub fn run(cfg: &ExperimentConfig, prep: &mut Prepared) -> Result<AccuracyReport> {
    let tau = absolute_tau(cfg, &prep.a)?;
    let sigma = prep.sigma()?.to_vec();
    let prep = &*prep;
    let per_trial: Vec<Vec<AccuracyRow>> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| run_trial(cfg, prep, &sigma, tau, t))
        .collect::<Result<_>>()?;
    let rows: Vec<AccuracyRow> = per_trial.into_iter().flatten().collect();
    let means = mean_rows(&rows);
    Ok(AccuracyReport {
        rows,
        means,
        orientation: prep.orientation(),
    })
}

pub fn write(report: &AccuracyReport, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let tag = format!("accuracy orientation={}", report.orientation);
    let mut w = csv_writer(dir.join("accuracy.csv"), &tag)?;
    let mut header = vec!["trial"];
    header.extend(COLUMNS);
    w.write_record(&header)?;
    for r in &report.rows {
        let mut rec = vec![r.trial.to_string(), r.k.to_string()];
        rec.extend(r.values().map(fmt_f64));
        w.write_record(&rec)?;
    }
    w.flush()?;

    let mut w = csv_writer(dir.join("accuracy_means.csv"), &tag)?;
    let mut header = vec![COLUMNS[0], "trials"];
    header.extend(&COLUMNS[1..]);
    w.write_record(&header)?;
    for m in &report.means {
        let mut rec = vec![m.k.to_string(), m.count.to_string()];
        rec.extend(m.values.map(fmt_f64));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
