use std::time::Instant;

use rayon::prelude::*;

use super::{agreement, confusion, odds_ratio_mse, ConfusionSummary};
use crate::data::BinaryDataset;
use crate::datagen::{build_theta, replicate_rng, sample_auto, Design};
use crate::error::{Error, Result};
use crate::graph::EdgeSet;
use crate::io::CampaignConfig;
use crate::methods::{fit_paths, GraphEstimate, MethodId};
use crate::selection::{bic_select, oracle_select, Refitter};
use crate::solvers::SolverOptions;

/// How one model is chosen from each fitted path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionMode {
    /// Best accuracy against the truth.
    Oracle,
    /// Largest BIC after un-shrunk refits.
    Bic,
    /// No selection: coefficients are refitted on the true pattern, which is
    /// what the coefficient-error comparison needs.
    TruePattern,
}

impl SelectionMode {
    pub fn as_str(self) -> &'static str {
        match self {
            SelectionMode::Oracle => "oracle",
            SelectionMode::Bic => "bic",
            SelectionMode::TruePattern => "true_pattern",
        }
    }
}

/// One method on one simulated dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkRow {
    pub design: String,
    pub n: usize,
    pub replicate: usize,
    pub method: MethodId,
    /// Penalty of the selected model (none in true-pattern mode).
    pub lambda: Option<f64>,
    pub summary: Option<ConfusionSummary>,
    /// Coefficient error on the design's own scale, when defined.
    pub mse: Option<f64>,
    /// Seconds spent fitting the penalty path.
    pub path_seconds: f64,
    /// Path plus selection (refits included).
    pub total_seconds: f64,
    pub error: Option<String>,
}

/// Agreement between the graphs two methods selected on the same dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct AgreementRow {
    pub design: String,
    pub n: usize,
    pub replicate: usize,
    pub method_a: MethodId,
    pub method_b: MethodId,
    pub kappa: f64,
    pub kappa_bar: usize,
}

/// Means and standard deviations over the successful replicates of one
/// design, sample size and method. The seven entries of `mean` and `sd`
/// follow [`crate::io::SUMMARY_HEADER`]: POS, FPR, TPR, PRE, ACC, F1, path time.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub design: String,
    pub n: usize,
    pub method: MethodId,
    pub mode: SelectionMode,
    pub count: usize,
    pub failures: usize,
    pub mean: [f64; 7],
    pub sd: [f64; 7],
    pub mean_total_time: f64,
    pub mse_mean: Option<f64>,
    pub mse_sd: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkReport {
    pub mode: SelectionMode,
    pub rows: Vec<BenchmarkRow>,
    pub aggregates: Vec<AggregateRow>,
    pub agreement: Vec<AgreementRow>,
}

impl BenchmarkReport {
    pub fn aggregate(&self, design: &str, n: usize, method: MethodId) -> Option<&AggregateRow> {
        self.aggregates.iter().find(|a| a.design == design && a.n == n && a.method == method)
    }
}

fn mean_sd(values: &[f64]) -> (f64, f64) {
    let m = values.len();
    if m == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / m as f64;
    if m < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (m - 1) as f64;
    (mean, var.sqrt())
}

/// Summarizes rows of one (design, n, method) cell, in replicate order.
pub(crate) fn aggregate_rows(rows: &[&BenchmarkRow], mode: SelectionMode) -> AggregateRow {
    let first = rows[0];
    let ok: Vec<&&BenchmarkRow> = rows.iter().filter(|r| r.summary.is_some()).collect();
    let mut mean = [0.0; 7];
    let mut sd = [0.0; 7];
    for j in 0..7 {
        let vals: Vec<f64> = ok
            .iter()
            .map(|r| {
                let c = r.summary.as_ref().expect("filtered");
                [c.pos as f64, c.fpr, c.tpr, c.precision, c.accuracy, c.f1, r.path_seconds][j]
            })
            .collect();
        (mean[j], sd[j]) = mean_sd(&vals);
    }
    let totals: Vec<f64> = ok.iter().map(|r| r.total_seconds).collect();
    let mses: Vec<f64> = ok.iter().filter_map(|r| r.mse).collect();
    let (mse_mean, mse_sd) = if mses.is_empty() {
        (None, None)
    } else {
        let (m, s) = mean_sd(&mses);
        (Some(m), Some(s))
    };
    AggregateRow {
        design: first.design.clone(),
        n: first.n,
        method: first.method,
        mode,
        count: ok.len(),
        failures: rows.len() - ok.len(),
        mean,
        sd,
        mean_total_time: mean_sd(&totals).0,
        mse_mean,
        mse_sd,
    }
}

fn thread_count(cfg: &CampaignConfig) -> Option<usize> {
    cfg.threads.or_else(|| std::env::var("ISINGLAB_THREADS").ok().and_then(|v| v.trim().parse().ok()))
}

/// Stream of the RNG used for one (design, sample size, replicate) cell.
fn cell_stream(design: usize, size: usize, replicate: usize) -> u64 {
    ((design as u64) << 48) | ((size as u64) << 32) | replicate as u64
}

struct Cell {
    design: usize,
    size: usize,
    replicate: usize,
}

/// Runs the whole campaign. Cells (design, sample size, replicate) run in
/// parallel, each on its own RNG stream; output order does not depend on
/// scheduling. Failures are recorded in the rows and do not stop the run.
pub fn run_benchmark(cfg: &CampaignConfig) -> Result<BenchmarkReport> {
    cfg.validate()?;
    let designs: Vec<Design> = cfg.designs.iter().map(build_theta).collect::<Result<_>>()?;
    let mut names: Vec<String> = Vec::with_capacity(designs.len());
    for d in &designs {
        let mut name = d.spec.name();
        if names.contains(&name) {
            name = format!("{name}#{}", d.spec.seed);
        }
        names.push(name);
    }
    let cells: Vec<Cell> = (0..designs.len())
        .flat_map(|design| {
            (0..cfg.sample_sizes.len())
                .flat_map(move |size| (0..cfg.replicates).map(move |replicate| Cell { design, size, replicate }))
        })
        .collect();

    let work = || -> Vec<(Vec<BenchmarkRow>, Vec<AgreementRow>)> {
        cells.par_iter().map(|c| run_cell(cfg, &designs[c.design], &names[c.design], c)).collect()
    };
    let results = match thread_count(cfg) {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?
            .install(work),
        None => work(),
    };

    let mut rows = Vec::new();
    let mut agreement_rows = Vec::new();
    for (r, a) in results {
        rows.extend(r);
        agreement_rows.extend(a);
    }
    let mut aggregates = Vec::new();
    for name in &names {
        for &n in &cfg.sample_sizes {
            for &method in &cfg.methods {
                let group: Vec<&BenchmarkRow> =
                    rows.iter().filter(|r| &r.design == name && r.n == n && r.method == method).collect();
                if !group.is_empty() {
                    aggregates.push(aggregate_rows(&group, cfg.mode));
                }
            }
        }
    }
    Ok(BenchmarkReport { mode: cfg.mode, rows, aggregates, agreement: agreement_rows })
}

fn run_cell(cfg: &CampaignConfig, design: &Design, name: &str, cell: &Cell) -> (Vec<BenchmarkRow>, Vec<AgreementRow>) {
    let n = cfg.sample_sizes[cell.size];
    let base = |method| BenchmarkRow {
        design: name.to_string(),
        n,
        replicate: cell.replicate,
        method,
        lambda: None,
        summary: None,
        mse: None,
        path_seconds: 0.0,
        total_seconds: 0.0,
        error: None,
    };
    let mut rng = replicate_rng(cfg.seed, cell_stream(cell.design, cell.size, cell.replicate));
    let data = match sample_auto(&design.theta, n, &cfg.gibbs, &mut rng) {
        Ok(d) => d,
        Err(e) => {
            let rows = cfg.methods.iter().map(|&m| BenchmarkRow { error: Some(e.to_string()), ..base(m) }).collect();
            return (rows, Vec::new());
        }
    };
    let opts = SolverOptions::default();
    let mut rows: Vec<BenchmarkRow> = cfg.methods.iter().map(|&m| base(m)).collect();
    let mut chosen: Vec<Option<EdgeSet>> = vec![None; rows.len()];

    if cfg.mode == SelectionMode::TruePattern {
        for (row, pick) in rows.iter_mut().zip(chosen.iter_mut()) {
            let start = Instant::now();
            match true_pattern_fit(&data, design, row.method, &opts) {
                Ok(mse) => {
                    let secs = start.elapsed().as_secs_f64();
                    row.summary = confusion(&design.truth, &design.truth).ok();
                    row.mse = mse;
                    row.path_seconds = secs;
                    row.total_seconds = secs;
                    *pick = Some(design.truth.clone());
                }
                Err(e) => row.error = Some(e.to_string()),
            }
        }
    } else {
        let paths = fit_paths(&data, &cfg.methods, cfg.grid.count, cfg.grid.ratio, &opts);
        for ((row, pick), path) in rows.iter_mut().zip(chosen.iter_mut()).zip(paths) {
            let path = match path {
                Ok(p) => p,
                Err(e) => {
                    row.error = Some(e.to_string());
                    continue;
                }
            };
            let start = Instant::now();
            let selected = match cfg.mode {
                SelectionMode::Oracle => oracle_select(&path.path, &design.truth),
                _ => bic_select(&data, &path.path, &opts).map(|(g, _)| g),
            };
            let select_secs = start.elapsed().as_secs_f64();
            match selected.and_then(|g| score(&g, design).map(|s| (g, s))) {
                Ok((g, (summary, mse))) => {
                    row.lambda = Some(g.lambda);
                    row.summary = Some(summary);
                    row.mse = mse;
                    row.path_seconds = path.seconds;
                    row.total_seconds = path.seconds + select_secs;
                    *pick = Some(g.edges);
                }
                Err(e) => row.error = Some(e.to_string()),
            }
        }
    }
    if !cfg.record_time {
        for row in &mut rows {
            row.path_seconds = 0.0;
            row.total_seconds = 0.0;
        }
    }

    let mut agree = Vec::new();
    for i in 0..rows.len() {
        for j in i + 1..rows.len() {
            if let (Some(a), Some(b)) = (&chosen[i], &chosen[j]) {
                if let Ok(g) = agreement(a, b) {
                    agree.push(AgreementRow {
                        design: name.to_string(),
                        n,
                        replicate: cell.replicate,
                        method_a: rows[i].method,
                        method_b: rows[j].method,
                        kappa: g.kappa,
                        kappa_bar: g.kappa_bar,
                    });
                }
            }
        }
    }
    (rows, agree)
}

fn score(g: &GraphEstimate, design: &Design) -> Result<(ConfusionSummary, Option<f64>)> {
    let summary = confusion(&g.edges, &design.truth)?;
    let mse = match &g.theta_unshrunk {
        Some(t) if !design.truth.is_empty() => {
            Some(odds_ratio_mse(&t.recode(g.method.coding(), design.coding), &design.native)?)
        }
        _ => None,
    };
    Ok((summary, mse))
}

/// Refit on the true pattern; returns the coefficient error.
fn true_pattern_fit(data: &BinaryDataset, design: &Design, method: MethodId, opts: &SolverOptions) -> Result<Option<f64>> {
    let refit = Refitter::new(data, method, opts)?.refit(&design.truth, None)?;
    if design.truth.is_empty() {
        return Ok(None);
    }
    let est = refit.theta.recode(method.coding(), design.coding);
    Ok(Some(odds_ratio_mse(&est, &design.native)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_sd_basics() {
        assert_eq!(mean_sd(&[2.0]), (2.0, 0.0));
        let (m, s) = mean_sd(&[1.0, 2.0, 3.0]);
        assert_eq!(m, 2.0);
        assert!((s - 1.0).abs() < 1e-15);
    }

    #[test]
    fn streams_are_distinct() {
        assert_ne!(cell_stream(0, 1, 0), cell_stream(1, 0, 0));
        assert_ne!(cell_stream(0, 0, 1), cell_stream(0, 1, 0));
    }
}
