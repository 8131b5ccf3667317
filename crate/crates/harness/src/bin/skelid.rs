use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use skelid::zoo::MatrixRecipe;
use skelid_harness::bench::{self, Methods};
use skelid_harness::config::read_config_file;
use skelid_harness::prepare::Prepared;
use skelid_harness::{accuracy, factor, gen, growth, ExperimentConfig};

/// Randomized row skeletonization and its experiments.
#[derive(Parser)]
#[command(name = "skelid", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Per-iteration error of the adaptive row ID against CPQR and the SVD.
    Accuracy(Common),
    /// Size of U_r against the optimal error, per sketch distribution.
    Growth(Common),
    /// Median wall time of full and randomized factorizations.
    Bench {
        #[command(flatten)]
        common: Common,
        /// Also time the randomized selectors at the detected rank.
        #[arg(long)]
        all: bool,
    },
    /// Adaptive row ID of one matrix; writes skeleton.txt, w.bin, trace.csv, summary.csv.
    Factor(Common),
    /// Write a generated matrix to a file (.csv, .mtx or .bin).
    Gen {
        /// Recipe such as `fastdecay:500` or `kahan:100:0.99`.
        recipe: String,
        output: PathBuf,
        #[arg(long)]
        format: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args)]
struct Common {
    /// `key = value` file; flags given here override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Recipe (`fastdecay:N[xM][:beta]`, `kahan:N[:zeta]`, `chan:N`, `lowrank:MxN:R`, `gaussian:MxN`) or a file.
    #[arg(long)]
    matrix: Option<String>,
    /// File format: mtx, idx, raw, csv.
    #[arg(long)]
    format: Option<String>,
    /// Shape `MxN` for raw files.
    #[arg(long)]
    shape: Option<String>,
    /// gaussian, srtt or sparse.
    #[arg(long)]
    sketch: Option<String>,
    /// Nonzeros per column of the sparse sign sketch.
    #[arg(long)]
    zeta: Option<String>,
    /// Block size.
    #[arg(long)]
    b: Option<String>,
    /// Oversampling for the U_r estimates.
    #[arg(long)]
    p: Option<String>,
    /// Stopping tolerance.
    #[arg(long)]
    tau: Option<String>,
    /// Scale tau by an estimate of the Frobenius norm.
    #[arg(long)]
    relative: bool,
    #[arg(long)]
    trials: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long = "max-rank")]
    max_rank: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<String>,
    #[arg(long)]
    threads: Option<String>,
    /// Timed repetitions per benchmark entry.
    #[arg(long)]
    runs: Option<String>,
    /// Ranks on the growth grid.
    #[arg(long)]
    grid: Option<String>,
}

impl Common {
    fn config(&self) -> Result<ExperimentConfig> {
        let mut pairs = match &self.config {
            Some(path) => read_config_file(path)?,
            None => BTreeMap::new(),
        };
        let flags = [
            ("matrix", &self.matrix),
            ("format", &self.format),
            ("shape", &self.shape),
            ("sketch", &self.sketch),
            ("zeta", &self.zeta),
            ("b", &self.b),
            ("p", &self.p),
            ("tau", &self.tau),
            ("trials", &self.trials),
            ("seed", &self.seed),
            ("max-rank", &self.max_rank),
            ("out", &self.out),
            ("threads", &self.threads),
            ("runs", &self.runs),
            ("grid", &self.grid),
        ];
        for (k, v) in flags {
            if let Some(v) = v {
                pairs.insert(k.to_string(), v.clone());
            }
        }
        if self.relative {
            pairs.insert("relative".into(), "true".into());
        }
        let cfg = ExperimentConfig::from_pairs(&pairs)?;
        if let Some(t) = cfg.threads {
            rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build_global()
                .context("configuring the thread pool")?;
        }
        Ok(cfg)
    }
}

fn prepare(cfg: &ExperimentConfig) -> Result<Prepared> {
    Prepared::load(&cfg.recipe, cfg.seed)
}

fn run(cli: Cli) -> Result<u8> {
    match cli.cmd {
        Command::Accuracy(c) => {
            let cfg = c.config()?;
            let mut prep = prepare(&cfg)?;
            let report = accuracy::run(&cfg, &mut prep)?;
            accuracy::write(&report, &cfg.out)?;
            for m in &report.means {
                println!(
                    "k={:<5} svdTail={:.3e} eSchur={:.3e} sIdLUPP={:.3e} sIdCPQR={:.3e}",
                    m.k,
                    m.svd_tail(),
                    m.e_schur(),
                    m.sid_lupp(),
                    m.sid_cpqr()
                );
            }
        }
        Command::Growth(c) => {
            let cfg = c.config()?;
            let mut prep = prepare(&cfg)?;
            let rows = growth::run(&cfg, &mut prep)?;
            growth::write(&rows, prep.orientation(), &cfg.out)?;
            for g in growth::means(&rows) {
                println!(
                    "{:<8} k={:<5} tail/normUr={:.3e} tail/maxUr={:.3e} reference={:.3e}",
                    g.kind.name(),
                    g.k,
                    g.ratio_norm,
                    g.ratio_max,
                    g.reference
                );
            }
        }
        Command::Bench { common, all } => {
            let cfg = common.config()?;
            let prep = prepare(&cfg)?;
            let methods = if all { Methods::All } else { Methods::Full };
            let rows = bench::run(&cfg, &prep, methods)?;
            bench::write(&rows, &cfg.out)?;
            for r in &rows {
                println!("{:<14} {}x{} k={} {:.4}s", r.method, r.m, r.n, r.k, r.seconds);
            }
        }
        Command::Factor(c) => {
            let cfg = c.config()?;
            let prep = prepare(&cfg)?;
            let res = factor::run(&cfg, &prep)?;
            factor::write(&res, &prep, &cfg.out)?;
            println!("rank {} status {:?}", res.rank, res.status);
            return Ok(factor::exit_code(res.status));
        }
        Command::Gen {
            recipe,
            output,
            format,
            seed,
        } => {
            let recipe: MatrixRecipe = recipe.parse()?;
            let prep_free = recipe.build(&skelid_harness::prepare::matrix_stream(seed))?;
            gen::write_matrix(&prep_free.0, &output, format.as_deref())?;
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
