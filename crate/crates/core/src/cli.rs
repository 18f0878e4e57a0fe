//! The `isinglab` command line.
//!
//! Exit status is 0 on success, 2 on a usage error and 1 on a runtime error.
//! Runtime errors are reported on stderr as one `error[Code]: message` line.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::datagen::{self, BaseDesign, DesignSpec, GibbsOptions};
use crate::error::{Error, Result};
use crate::eval::{self, set_agreement};
use crate::io::{self, CampaignConfig, StratumSpec};
use crate::methods::{self, MethodId};
use crate::selection::{self, make_grid};
use crate::solvers::SolverOptions;

#[derive(Debug, Parser)]
#[command(name = "isinglab", version, about = "Structure learning benchmarks for binary graphical models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Sampler {
    /// Exact per connected component when small enough, Gibbs otherwise.
    Auto,
    Exact,
    Gibbs,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Criterion {
    Bic,
    Oracle,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Draw datasets from a coefficient design.
    Simulate {
        #[arg(long, default_value = "T3")]
        design: BaseDesign,
        /// Seed of the random design pattern.
        #[arg(long, default_value_t = 1)]
        design_seed: u64,
        /// Copies of the design on the diagonal.
        #[arg(long, default_value_t = 1)]
        copies: usize,
        #[arg(short, long, default_value_t = 2500)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        replicates: usize,
        /// Seed of the sampling RNG; replicate r uses stream r.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "auto")]
        sampler: Sampler,
        #[arg(long, default_value_t = 1000)]
        burn_in: usize,
        #[arg(long, default_value_t = 10)]
        thinning: usize,
        /// Output directory (data_<r>.csv and truth.edges).
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Fit a regularization path and write one edge list per penalty.
    Fit {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        method: MethodId,
        #[arg(long, default_value_t = selection::DEFAULT_GRID_COUNT)]
        count: usize,
        #[arg(long, default_value_t = selection::DEFAULT_GRID_RATIO)]
        ratio: f64,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Fit a path and keep one model by BIC or against a known truth.
    Select {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        method: MethodId,
        #[arg(long, value_enum, default_value = "bic")]
        criterion: Criterion,
        /// True edge list, required by the oracle criterion.
        #[arg(long)]
        truth: Option<PathBuf>,
        #[arg(long, default_value_t = selection::DEFAULT_GRID_COUNT)]
        count: usize,
        #[arg(long, default_value_t = selection::DEFAULT_GRID_RATIO)]
        ratio: f64,
        /// Edge list of the selected model with un-shrunk coefficients.
        #[arg(short, long)]
        out: PathBuf,
        /// Optional table of BIC scores along the path.
        #[arg(long)]
        scores: Option<PathBuf>,
    },
    /// Run a simulation campaign described by a TOML file.
    Benchmark {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the configured output directory.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Tabulate approximate and exact deviances along a pseudo-likelihood path.
    Deviance {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value_t = selection::DEFAULT_GRID_COUNT)]
        count: usize,
        #[arg(long, default_value_t = selection::DEFAULT_GRID_RATIO)]
        ratio: f64,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Compare two edge lists.
    Agree { a: PathBuf, b: PathBuf },
    /// Validate an indicator table, optionally restricted to a stratum.
    Ingest {
        #[arg(long)]
        data: PathBuf,
        /// Row filter `column=value`; repeatable.
        #[arg(long = "filter")]
        filters: Vec<String>,
        /// Non-indicator column to ignore; repeatable.
        #[arg(long = "stratum-col")]
        stratum_columns: Vec<String>,
        #[arg(long, default_value_t = StratumSpec::DEFAULT_MIN_POSITIVES)]
        min_positives: usize,
        #[arg(short, long)]
        out: PathBuf,
    },
}

/// Parses `argv` (program name first), runs the command and returns the exit status.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error[{}]: {}", e.code(), e.to_string().replace('\n', " "));
            1
        }
    }
}

fn grid_for(data: &crate::BinaryDataset, method: MethodId, count: usize, ratio: f64) -> Result<selection::LambdaGrid> {
    make_grid(methods::lambda_max(data, method)?, count, ratio)
}

fn execute(command: Command) -> Result<()> {
    let opts = SolverOptions::default();
    match command {
        Command::Simulate { design, design_seed, copies, n, replicates, seed, sampler, burn_in, thinning, out } => {
            let d = datagen::build_theta(&DesignSpec::block(design, design_seed, copies))?;
            std::fs::create_dir_all(&out)?;
            let names = crate::data::default_names(d.p());
            io::write_edge_list(out.join("truth.edges"), &names, &d.truth, Some(&d.native))?;
            let gibbs = GibbsOptions { burn_in, thinning };
            for r in 0..replicates {
                let mut rng = datagen::replicate_rng(seed, r as u64);
                let data = match sampler {
                    Sampler::Auto => datagen::sample_auto(&d.theta, n, &gibbs, &mut rng)?,
                    Sampler::Exact => datagen::sample_exact(&d.theta, n, &mut rng)?,
                    Sampler::Gibbs => datagen::sample_gibbs(&d.theta, n, &gibbs, &mut rng)?,
                };
                io::write_binary_csv(&data, out.join(format!("data_{r}.csv")))?;
            }
            println!("{} true edges, p = {}, {replicates} dataset(s) in {}", d.truth.len(), d.p(), out.display());
        }
        Command::Fit { data, method, count, ratio, out } => {
            let data = io::load_binary_csv(&data)?;
            let grid = grid_for(&data, method, count, ratio)?;
            let path = methods::fit_path(&data, method, &grid, &opts)?;
            std::fs::create_dir_all(&out)?;
            let mut index = String::from("step,lambda,edges,file\n");
            for (i, est) in path.iter().enumerate() {
                let file = format!("step_{i:03}.edges");
                io::write_edge_list(out.join(&file), data.names(), &est.edges, est.theta_shrunk.as_ref())?;
                index.push_str(&format!("{i},{},{},{file}\n", est.lambda, est.edges.len()));
            }
            std::fs::write(out.join("path.csv"), index)?;
            println!("{} models written to {}", path.len(), out.display());
        }
        Command::Select { data, method, criterion, truth, count, ratio, out, scores } => {
            let data = io::load_binary_csv(&data)?;
            let grid = grid_for(&data, method, count, ratio)?;
            let path = methods::fit_path(&data, method, &grid, &opts)?;
            let chosen = match criterion {
                Criterion::Bic => {
                    let (chosen, table) = selection::bic_select(&data, &path, &opts)?;
                    if let Some(file) = scores {
                        let mut text = String::from("lambda,loglik,df,n,bic\n");
                        for s in table {
                            text.push_str(&format!("{},{},{},{},{}\n", s.lambda, s.loglik_term, s.df, s.n, s.score));
                        }
                        std::fs::write(file, text)?;
                    }
                    chosen
                }
                Criterion::Oracle => {
                    let file = truth.ok_or_else(|| Error::InvalidArgument("--truth is required for oracle".into()))?;
                    let truth = io::read_edge_list(file)?.to_edge_set(data.names())?;
                    let mut chosen = selection::oracle_select(&path, &truth)?;
                    chosen.theta_unshrunk = Some(selection::unshrunk_refit(&data, &chosen, &opts)?.theta);
                    chosen
                }
            };
            io::write_edge_list(&out, data.names(), &chosen.edges, chosen.theta_unshrunk.as_ref())?;
            println!("lambda = {}, {} edges", chosen.lambda, chosen.edges.len());
        }
        Command::Benchmark { config, out } => {
            let mut cfg = CampaignConfig::load(&config)?;
            if let Some(dir) = out {
                cfg.output_dir = dir;
            }
            let report = eval::run_benchmark(&cfg)?;
            let files = io::write_benchmark(&report, &cfg.output_dir)?;
            for f in files {
                println!("{}", f.display());
            }
        }
        Command::Deviance { data, count, ratio, out } => {
            let data = io::load_binary_csv(&data)?;
            let grid = grid_for(&data, MethodId::BmnPseudo, count, ratio)?;
            let rows = eval::deviance_curves(&data, Some(&grid), &opts)?;
            io::write_deviance_csv(&rows, &out)?;
            println!("{} rows written to {}", rows.len(), out.display());
        }
        Command::Agree { a, b } => {
            let (a, b) = (io::read_edge_list(a)?.pairs(), io::read_edge_list(b)?.pairs());
            let g = set_agreement(&a, &b);
            println!("kappa={} kappa_bar={}", g.kappa, g.kappa_bar);
        }
        Command::Ingest { data, filters, stratum_columns, min_positives, out } => {
            let spec = StratumSpec { filters: StratumSpec::parse_filters(&filters)?, stratum_columns, min_positives };
            let ing = io::ingest_stratified(&data, &spec)?;
            write_ingested(&ing, &out)?;
        }
    }
    Ok(())
}

fn write_ingested(ing: &io::Ingested, out: &Path) -> Result<()> {
    io::write_binary_csv(&ing.data, out)?;
    let constant = ing.data.constant_columns();
    println!("rows {} of {}, variables {}", ing.data.n(), ing.rows_total, ing.data.p());
    if !ing.dropped.is_empty() {
        println!("dropped (too few positives): {}", ing.dropped.join(","));
    }
    if !constant.is_empty() {
        let names: Vec<&str> = constant.iter().map(|&k| ing.data.names()[k].as_str()).collect();
        println!("constant columns: {}", names.join(","));
    }
    Ok(())
}
