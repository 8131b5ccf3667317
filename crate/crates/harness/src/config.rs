//! Experiment configuration: a flat `key = value` file, overridden by
//! command-line flags. Both go through [`ExperimentConfig::from_pairs`].

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use skelid::sketch::SketchKind;
use skelid::zoo::{FileFormat, MatrixRecipe};

pub const DEFAULT_BLOCK: usize = 50;
pub const DEFAULT_P: usize = 10;
pub const DEFAULT_TAU: f64 = 1e-8;
pub const DEFAULT_TRIALS: usize = 50;
pub const DEFAULT_RUNS: usize = 5;
pub const DEFAULT_GRID: usize = 10;

/// Keys accepted in config files and as `--key value` flags.
pub const KEYS: &[&str] = &[
    "matrix", "format", "shape", "sketch", "zeta", "b", "p", "tau", "relative", "trials", "seed",
    "max-rank", "out", "threads", "runs", "grid",
];

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub recipe: MatrixRecipe,
    /// `None` lets commands that compare distributions use all three.
    pub sketch: Option<SketchKind>,
    pub zeta: usize,
    pub block: usize,
    pub p: usize,
    pub tau: f64,
    /// Interpret `tau` relative to an estimate of `||A||_F`.
    pub relative: bool,
    pub trials: usize,
    pub seed: u64,
    pub max_rank: Option<usize>,
    pub out: PathBuf,
    pub threads: Option<usize>,
    /// Timed repetitions per benchmark entry.
    pub runs: usize,
    /// Number of ranks on the growth-study grid.
    pub grid: usize,
}

impl ExperimentConfig {
    pub fn new(recipe: MatrixRecipe) -> Self {
        ExperimentConfig {
            recipe,
            sketch: None,
            zeta: skelid::sketch::DEFAULT_ZETA,
            block: DEFAULT_BLOCK,
            p: DEFAULT_P,
            tau: DEFAULT_TAU,
            relative: false,
            trials: DEFAULT_TRIALS,
            seed: 0,
            max_rank: None,
            out: PathBuf::from("results"),
            threads: None,
            runs: DEFAULT_RUNS,
            grid: DEFAULT_GRID,
        }
    }

    pub fn sketch_kind(&self) -> SketchKind {
        self.sketch.unwrap_or(SketchKind::Gaussian)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            bail!("trials must be at least 1");
        }
        if self.block == 0 {
            bail!("block size b must be at least 1");
        }
        if self.p == 0 || self.p >= self.block {
            bail!("oversampling must satisfy 1 <= p < b, got p={} b={}", self.p, self.block);
        }
        if self.tau.is_nan() || self.tau <= 0.0 {
            bail!("tau must be positive, got {}", self.tau);
        }
        if self.runs < 5 {
            bail!("timing needs at least 5 runs, got {}", self.runs);
        }
        if self.grid == 0 {
            bail!("grid must have at least one point");
        }
        self.recipe.validate()?;
        Ok(())
    }

    /// Builds a config from string pairs; unknown keys are rejected.
    pub fn from_pairs(pairs: &BTreeMap<String, String>) -> Result<Self> {
        if let Some(bad) = pairs.keys().find(|k| !KEYS.contains(&k.as_str())) {
            bail!("unknown configuration key '{bad}'");
        }
        let get = |k: &str| pairs.get(k).map(String::as_str);
        let matrix = get("matrix").ok_or_else(|| anyhow!("no matrix given (--matrix)"))?;
        let recipe = match get("format") {
            Some(fmt) => MatrixRecipe::FromFile {
                path: PathBuf::from(matrix),
                format: parse_format(fmt, get("shape"))?,
            },
            None => matrix.parse()?,
        };
        let mut cfg = ExperimentConfig::new(recipe);
        if let Some(s) = get("sketch") {
            cfg.sketch = Some(s.parse()?);
        }
        parse_into(get("zeta"), "zeta", &mut cfg.zeta)?;
        parse_into(get("b"), "b", &mut cfg.block)?;
        parse_into(get("p"), "p", &mut cfg.p)?;
        parse_into(get("tau"), "tau", &mut cfg.tau)?;
        parse_into(get("trials"), "trials", &mut cfg.trials)?;
        parse_into(get("seed"), "seed", &mut cfg.seed)?;
        parse_into(get("runs"), "runs", &mut cfg.runs)?;
        parse_into(get("grid"), "grid", &mut cfg.grid)?;
        if let Some(v) = get("relative") {
            cfg.relative = parse_bool(v)?;
        }
        if let Some(v) = get("max-rank") {
            cfg.max_rank = Some(v.parse().with_context(|| format!("max-rank: '{v}'"))?);
        }
        if let Some(v) = get("threads") {
            cfg.threads = Some(v.parse().with_context(|| format!("threads: '{v}'"))?);
        }
        if let Some(v) = get("out") {
            cfg.out = PathBuf::from(v);
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn parse_into<T: std::str::FromStr>(v: Option<&str>, key: &str, slot: &mut T) -> Result<()>
where
    T::Err: std::fmt::Display,
{
    if let Some(v) = v {
        *slot = v.parse().map_err(|e| anyhow!("{key}: '{v}': {e}"))?;
    }
    Ok(())
}

fn parse_bool(v: &str) -> Result<bool> {
    match v.to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" | "on" => Ok(true),
        "0" | "false" | "no" | "off" => Ok(false),
        _ => bail!("expected a boolean, got '{v}'"),
    }
}

pub fn parse_format(fmt: &str, shape: Option<&str>) -> Result<FileFormat> {
    Ok(match fmt.to_ascii_lowercase().as_str() {
        "mtx" | "matrixmarket" => FileFormat::MatrixMarket,
        "idx" => FileFormat::Idx,
        "csv" => FileFormat::Csv,
        "raw" | "bin" => {
            let shape = shape.ok_or_else(|| anyhow!("raw format needs --shape MxN"))?;
            let (r, c) = shape
                .split_once('x')
                .and_then(|(r, c)| Some((r.parse().ok()?, c.parse().ok()?)))
                .ok_or_else(|| anyhow!("shape must look like MxN, got '{shape}'"))?;
            FileFormat::Raw { rows: r, cols: c }
        }
        other => bail!("unknown format '{other}' (mtx, idx, raw, csv)"),
    })
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("line {}: expected key = value", n + 1))?;
        out.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(out)
}

pub fn read_config_file(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_config_text(&text).with_context(|| format!("in {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pairs(items: &[(&str, &str)]) -> BTreeMap<String, String> {
        items.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    #[test]
    fn defaults_and_overrides() {
        let cfg = ExperimentConfig::from_pairs(&pairs(&[("matrix", "fastdecay:100"), ("b", "20"), ("tau", "1e-6")]))
            .unwrap();
        assert_eq!(cfg.block, 20);
        assert_eq!(cfg.p, 10);
        assert_eq!(cfg.tau, 1e-6);
        assert_eq!(cfg.trials, 50);
        assert!(!cfg.relative);
    }

    #[test]
    fn rejects_invalid() {
        assert!(ExperimentConfig::from_pairs(&pairs(&[("matrix", "fastdecay:100"), ("p", "50")])).is_err());
        assert!(ExperimentConfig::from_pairs(&pairs(&[("matrix", "fastdecay:100"), ("trials", "0")])).is_err());
        assert!(ExperimentConfig::from_pairs(&pairs(&[("matrix", "fastdecay:100"), ("colour", "red")])).is_err());
        assert!(ExperimentConfig::from_pairs(&pairs(&[("b", "10")])).is_err());
    }

    #[test]
    fn config_text() {
        let m = parse_config_text("# experiment\nmatrix = kahan:50\n\nsketch=srtt # fast\n").unwrap();
        assert_eq!(m["matrix"], "kahan:50");
        assert_eq!(m["sketch"], "srtt");
        assert!(parse_config_text("novalue\n").is_err());
    }

    #[test]
    fn raw_format_needs_shape() {
        assert!(parse_format("raw", None).is_err());
        assert_eq!(parse_format("raw", Some("3x4")).unwrap(), FileFormat::Raw { rows: 3, cols: 4 });
    }
}
