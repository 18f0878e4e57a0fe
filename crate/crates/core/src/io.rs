//! File formats: binary datasets, edge lists, campaign configurations,
//! stratified ingestion of indicator tables, and report tables.
//!
//! Datasets are CSV with a header of unique variable names and `0`/`1`
//! cells. Edge lists have no header; each line is `name_k,name_l,theta`.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use crate::data::BinaryDataset;
use crate::datagen::{DesignSpec, GibbsOptions};
use crate::error::{Error, Result};
use crate::eval::SelectionMode;
use crate::graph::EdgeSet;
use crate::methods::MethodId;
use crate::selection::{DEFAULT_GRID_COUNT, DEFAULT_GRID_RATIO};

fn parse_header(line: &str) -> Result<Vec<String>> {
    let names: Vec<String> = line.split(',').map(|s| s.trim().to_string()).collect();
    let mut seen = BTreeSet::new();
    for (j, name) in names.iter().enumerate() {
        if name.is_empty() {
            return Err(Error::Parse { line: 1, column: j + 1, message: "empty column name".into() });
        }
        if !seen.insert(name.as_str()) {
            return Err(Error::DuplicateName(name.clone()));
        }
    }
    Ok(names)
}

/// Reads a table with a header row into column names and raw string cells.
/// Lines and columns in errors are 1-based and count the header.
fn read_table(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let mut lines = BufReader::new(File::open(path)?).lines();
    let header = match lines.next() {
        Some(l) => l?,
        None => return Err(Error::Parse { line: 1, column: 1, message: "missing header".into() }),
    };
    let names = parse_header(header.trim_end_matches('\r'))?;
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<String> = line.split(',').map(|s| s.trim().to_string()).collect();
        if cells.len() != names.len() {
            return Err(Error::Parse {
                line: i + 2,
                column: cells.len().min(names.len()) + 1,
                message: format!("expected {} fields, found {}", names.len(), cells.len()),
            });
        }
        rows.push(cells);
    }
    Ok((names, rows))
}

fn binary_cell(cell: &str, line: usize, column: usize) -> Result<u8> {
    match cell {
        "0" => Ok(0),
        "1" => Ok(1),
        other => Err(Error::NonBinaryValue { line, column, value: other.to_string() }),
    }
}

/// Loads a 0/1 dataset.
pub fn load_binary_csv(path: impl AsRef<Path>) -> Result<BinaryDataset> {
    let (names, rows) = read_table(path.as_ref())?;
    let p = names.len();
    let mut values = Vec::with_capacity(rows.len() * p);
    for (i, row) in rows.iter().enumerate() {
        for (j, cell) in row.iter().enumerate() {
            values.push(binary_cell(cell, i + 2, j + 1)?);
        }
    }
    BinaryDataset::new(rows.len(), p, values, names)
}

pub fn write_binary_csv(data: &BinaryDataset, path: impl AsRef<Path>) -> Result<()> {
    let mut out = std::io::BufWriter::new(File::create(path)?);
    writeln!(out, "{}", data.names().join(","))?;
    let mut line = String::with_capacity(2 * data.p());
    for row in data.rows() {
        line.clear();
        for (j, &v) in row.iter().enumerate() {
            if j > 0 {
                line.push(',');
            }
            line.push(if v == 1 { '1' } else { '0' });
        }
        writeln!(out, "{line}")?;
    }
    out.flush()?;
    Ok(())
}

/// Writes one `name_k,name_l,theta` line per edge, in edge order. Missing
/// coefficients are written as 0.
pub fn write_edge_list(
    path: impl AsRef<Path>,
    names: &[String],
    edges: &EdgeSet,
    theta: Option<&crate::ThetaMatrix>,
) -> Result<()> {
    if names.len() != edges.p() {
        return Err(Error::DimensionMismatch { expected: edges.p(), found: names.len() });
    }
    let mut out = std::io::BufWriter::new(File::create(path)?);
    for (k, l) in edges.iter() {
        let v = theta.map_or(0.0, |t| t.get(k, l));
        writeln!(out, "{},{},{}", names[k], names[l], v)?;
    }
    out.flush()?;
    Ok(())
}

/// Edges read from an edge-list file, keyed by variable names with each pair
/// ordered lexicographically.
#[derive(Debug, Clone, PartialEq)]
pub struct NamedEdges {
    pub edges: BTreeMap<(String, String), f64>,
}

impl NamedEdges {
    pub fn pairs(&self) -> BTreeSet<(String, String)> {
        self.edges.keys().cloned().collect()
    }

    /// Maps onto variable indices of `names`.
    pub fn to_edge_set(&self, names: &[String]) -> Result<EdgeSet> {
        let index: BTreeMap<&str, usize> = names.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
        let lookup = |n: &String| {
            index.get(n.as_str()).copied().ok_or_else(|| Error::InvalidArgument(format!("unknown variable {n:?}")))
        };
        let mut set = EdgeSet::empty(names.len());
        for (a, b) in self.edges.keys() {
            set.insert(lookup(a)?, lookup(b)?)?;
        }
        Ok(set)
    }
}

pub fn read_edge_list(path: impl AsRef<Path>) -> Result<NamedEdges> {
    let reader = BufReader::new(File::open(path)?);
    let mut edges = BTreeMap::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(Error::Parse {
                line: i + 1,
                column: fields.len().min(3) + 1,
                message: "expected name_k,name_l,theta".into(),
            });
        }
        let theta: f64 = fields[2]
            .parse()
            .map_err(|_| Error::Parse { line: i + 1, column: 3, message: format!("not a number: {:?}", fields[2]) })?;
        let (a, b) = (fields[0].to_string(), fields[1].to_string());
        if a == b {
            return Err(Error::Parse { line: i + 1, column: 2, message: "self loop".into() });
        }
        let key = if a < b { (a, b) } else { (b, a) };
        edges.insert(key, theta);
    }
    Ok(NamedEdges { edges })
}

fn default_replicates() -> usize {
    50
}

fn default_sizes() -> Vec<usize> {
    vec![500, 2500]
}

fn default_true() -> bool {
    true
}

fn default_output() -> PathBuf {
    PathBuf::from("results")
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default = "GridConfig::default_count")]
    pub count: usize,
    #[serde(default = "GridConfig::default_ratio")]
    pub ratio: f64,
}

impl GridConfig {
    fn default_count() -> usize {
        DEFAULT_GRID_COUNT
    }

    fn default_ratio() -> f64 {
        DEFAULT_GRID_RATIO
    }
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { count: DEFAULT_GRID_COUNT, ratio: DEFAULT_GRID_RATIO }
    }
}

/// A simulation campaign, read from TOML:
///
/// ```toml
/// seed = 2024
/// replicates = 50
/// mode = "bic"                 # "oracle", "bic" or "true_pattern"
/// methods = ["gauss_cor", "SepLogit OR"]
/// sample_sizes = [500, 2500]
/// output_dir = "results"
/// threads = 4                  # optional; ISINGLAB_THREADS also works
/// record_time = true           # false writes zero timings (byte-stable output)
///
/// [grid]
/// count = 50
/// ratio = 1000.0
///
/// [gibbs]
/// burn_in = 1000
/// thinning = 10
///
/// [[designs]]
/// base = "T3"
/// seed = 11
/// copies = 1
/// ```
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignConfig {
    pub designs: Vec<DesignSpec>,
    pub methods: Vec<MethodId>,
    #[serde(default = "default_sizes")]
    pub sample_sizes: Vec<usize>,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    pub mode: SelectionMode,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub gibbs: GibbsOptions,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub threads: Option<usize>,
    #[serde(default = "default_true")]
    pub record_time: bool,
}

impl CampaignConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::Config(m.to_string()));
        if self.designs.is_empty() {
            return fail("no designs");
        }
        if self.methods.is_empty() {
            return fail("no methods");
        }
        if self.sample_sizes.is_empty() || self.sample_sizes.contains(&0) {
            return fail("sample_sizes must be a nonempty list of positive sizes");
        }
        if self.replicates == 0 {
            return fail("replicates must be >= 1");
        }
        if self.grid.count < 2 || !(self.grid.ratio > 1.0) {
            return fail("grid needs count >= 2 and ratio > 1");
        }
        if self.designs.iter().any(|d| d.copies == 0) {
            return fail("design copies must be >= 1");
        }
        if self.threads == Some(0) {
            return fail("threads must be >= 1");
        }
        Ok(())
    }
}

/// Row filter and variable-inclusion guard for stratified analyses.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct StratumSpec {
    /// `(column, value)` pairs that a row must all match.
    pub filters: Vec<(String, String)>,
    /// Columns that are not binary indicators (e.g. sex, age band); they
    /// are used for filtering only.
    pub stratum_columns: Vec<String>,
    /// Indicators with fewer positives than this inside the stratum are dropped.
    pub min_positives: usize,
}

impl StratumSpec {
    pub const DEFAULT_MIN_POSITIVES: usize = 5;

    /// Parses `column=value` filters.
    pub fn parse_filters(items: &[String]) -> Result<Vec<(String, String)>> {
        items
            .iter()
            .map(|s| {
                s.split_once('=')
                    .map(|(a, b)| (a.trim().to_string(), b.trim().to_string()))
                    .ok_or_else(|| Error::InvalidArgument(format!("filter {s:?} is not column=value")))
            })
            .collect()
    }
}

/// Result of a stratified ingest.
#[derive(Debug, Clone)]
pub struct Ingested {
    pub data: BinaryDataset,
    /// Indicator names dropped by the minimum-positives guard.
    pub dropped: Vec<String>,
    pub rows_total: usize,
}

/// Reads an indicator table with optional stratification columns, keeps
/// rows matching every filter, and drops indicators with too few positives.
pub fn ingest_stratified(path: impl AsRef<Path>, spec: &StratumSpec) -> Result<Ingested> {
    let (names, rows) = read_table(path.as_ref())?;
    let col = |name: &str| {
        names.iter().position(|n| n == name).ok_or_else(|| Error::InvalidArgument(format!("no column {name:?}")))
    };
    let filters: Vec<(usize, &str)> =
        spec.filters.iter().map(|(c, v)| col(c).map(|j| (j, v.as_str()))).collect::<Result<_>>()?;
    let mut skip: BTreeSet<usize> = spec.stratum_columns.iter().map(|c| col(c)).collect::<Result<_>>()?;
    skip.extend(filters.iter().map(|&(j, _)| j));
    let indicators: Vec<usize> = (0..names.len()).filter(|j| !skip.contains(j)).collect();

    let mut kept_rows: Vec<Vec<u8>> = Vec::new();
    for (i, row) in rows.iter().enumerate() {
        if !filters.iter().all(|&(j, v)| row[j] == v) {
            continue;
        }
        let values = indicators.iter().map(|&j| binary_cell(&row[j], i + 2, j + 1)).collect::<Result<Vec<u8>>>()?;
        kept_rows.push(values);
    }
    let mut positives = vec![0usize; indicators.len()];
    for r in &kept_rows {
        for (c, &v) in positives.iter_mut().zip(r) {
            *c += v as usize;
        }
    }
    let keep: Vec<usize> = (0..indicators.len()).filter(|&j| positives[j] >= spec.min_positives).collect();
    let dropped = (0..indicators.len())
        .filter(|&j| positives[j] < spec.min_positives)
        .map(|j| names[indicators[j]].clone())
        .collect();
    let n = kept_rows.len();
    let mut values = Vec::with_capacity(n * keep.len());
    for r in &kept_rows {
        values.extend(keep.iter().map(|&j| r[j]));
    }
    let kept_names = keep.iter().map(|&j| names[indicators[j]].clone()).collect();
    let data = BinaryDataset::new(n, keep.len(), values, kept_names)?;
    Ok(Ingested { data, dropped, rows_total: rows.len() })
}

/// Column names of the summary table, in order.
pub const SUMMARY_HEADER: [&str; 7] = ["POS", "FPR", "TPR", "PRE", "ACC", "F1", "time_s"];

fn csv_writer(path: &Path) -> Result<csv::Writer<File>> {
    Ok(csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_path(path)?)
}

/// Shortest representation that reads back to the same value.
fn num(v: f64) -> String {
    format!("{v}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

/// Writes the aggregated benchmark table: one row per design, sample size
/// and method, with means followed by standard deviations.
pub fn write_summary_csv(report: &crate::eval::BenchmarkReport, path: impl AsRef<Path>) -> Result<()> {
    let mut w = csv_writer(path.as_ref())?;
    let mut header = vec!["design", "n", "method", "mode", "replicates", "failures"];
    header.extend(SUMMARY_HEADER);
    header.extend(["time_total_s", "MSE", "POS_sd", "FPR_sd", "TPR_sd", "PRE_sd", "ACC_sd", "F1_sd", "time_s_sd"]);
    header.push("MSE_sd");
    w.write_record(&header)?;
    for a in &report.aggregates {
        let mut rec = vec![
            a.design.clone(),
            a.n.to_string(),
            a.method.label().to_string(),
            a.mode.as_str().to_string(),
            a.count.to_string(),
            a.failures.to_string(),
        ];
        rec.extend(a.mean.iter().map(|&v| num(v)));
        rec.push(num(a.mean_total_time));
        rec.push(opt(a.mse_mean));
        rec.extend(a.sd.iter().map(|&v| num(v)));
        rec.push(opt(a.mse_sd));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes one row per design, sample size, replicate and method.
pub fn write_replicates_csv(report: &crate::eval::BenchmarkReport, path: impl AsRef<Path>) -> Result<()> {
    let mut w = csv_writer(path.as_ref())?;
    let mut header = vec!["design", "n", "replicate", "method", "lambda", "TP", "FP", "FN", "TN"];
    header.extend(SUMMARY_HEADER);
    header.extend(["time_total_s", "MSE", "error"]);
    w.write_record(&header)?;
    for r in &report.rows {
        let mut rec = vec![r.design.clone(), r.n.to_string(), r.replicate.to_string(), r.method.label().to_string()];
        match &r.summary {
            Some(c) => {
                rec.push(opt(r.lambda));
                rec.extend([c.tp, c.fp, c.fn_, c.tn].map(|v| v.to_string()));
                rec.extend([c.pos as f64, c.fpr, c.tpr, c.precision, c.accuracy, c.f1].map(num));
            }
            None => rec.extend(std::iter::repeat_n(String::new(), 11)),
        }
        rec.push(num(r.path_seconds));
        rec.push(num(r.total_seconds));
        rec.push(opt(r.mse));
        rec.push(r.error.clone().unwrap_or_default());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes pairwise agreement between methods' selected graphs.
pub fn write_agreement_csv(report: &crate::eval::BenchmarkReport, path: impl AsRef<Path>) -> Result<()> {
    let mut w = csv_writer(path.as_ref())?;
    w.write_record(["design", "n", "replicate", "method_a", "method_b", "kappa", "kappa_bar"])?;
    for a in &report.agreement {
        w.write_record([
            a.design.clone(),
            a.n.to_string(),
            a.replicate.to_string(),
            a.method_a.label().to_string(),
            a.method_b.label().to_string(),
            num(a.kappa),
            a.kappa_bar.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes a deviance table with columns `lambda,edges,L_Ps,L_Ps_half,L_Po,L_G1,L_G2,L_G3`.
pub fn write_deviance_csv(rows: &[crate::eval::DevianceRow], path: impl AsRef<Path>) -> Result<()> {
    let mut w = csv_writer(path.as_ref())?;
    w.write_record(["lambda", "edges", "L_Ps", "L_Ps_half", "L_Po", "L_G1", "L_G2", "L_G3"])?;
    for r in rows {
        w.write_record([
            num(r.lambda),
            r.edges.to_string(),
            num(r.pseudo),
            num(r.pseudo_half),
            num(r.exact),
            num(r.gauss[0]),
            num(r.gauss[1]),
            num(r.gauss[2]),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes every output table of a benchmark into `dir`; returns the file paths.
pub fn write_benchmark(report: &crate::eval::BenchmarkReport, dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    let files = [dir.join("summary.csv"), dir.join("replicates.csv"), dir.join("agreement.csv")];
    write_summary_csv(report, &files[0])?;
    write_replicates_csv(report, &files[1])?;
    write_agreement_csv(report, &files[2])?;
    Ok(files.to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        let d = BinaryDataset::from_rows(&[vec![0, 1], vec![1, 1], vec![0, 0]]).unwrap();
        write_binary_csv(&d, &path).unwrap();
        assert_eq!(load_binary_csv(&path).unwrap(), d);
    }

    #[test]
    fn non_binary_value_location() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        std::fs::write(&path, "a,b\n0,1\n1,2\n").unwrap();
        match load_binary_csv(&path) {
            Err(Error::NonBinaryValue { line, column, value }) => assert_eq!((line, column, value.as_str()), (3, 2, "2")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn header_errors() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        std::fs::write(&path, "a,a\n0,1\n").unwrap();
        assert!(matches!(load_binary_csv(&path), Err(Error::DuplicateName(n)) if n == "a"));
        std::fs::write(&path, "a,b\n0,1,1\n").unwrap();
        assert!(matches!(load_binary_csv(&path), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn edge_list_normalizes_order() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("e.edges");
        std::fs::write(&path, "V3,V1,0.5\nV1,V2,-1\n").unwrap();
        let e = read_edge_list(&path).unwrap();
        let names = crate::data::default_names(3);
        let set = e.to_edge_set(&names).unwrap();
        assert_eq!(set, EdgeSet::from_pairs(3, [(0, 2), (0, 1)]).unwrap());
        let out = dir.path().join("f.edges");
        write_edge_list(&out, &names, &set, None).unwrap();
        assert_eq!(read_edge_list(&out).unwrap().pairs(), e.pairs());
    }

    #[test]
    fn config_defaults_and_validation() {
        let cfg = CampaignConfig::from_toml(
            "methods = [\"GaussCor\"]\nmode = \"oracle\"\n[[designs]]\nbase = \"T3\"\nseed = 4\n",
        )
        .unwrap();
        assert_eq!(cfg.replicates, 50);
        assert_eq!(cfg.grid, GridConfig::default());
        assert_eq!(cfg.designs[0].copies, 1);
        assert_eq!(CampaignConfig::from_toml(&cfg.to_toml().unwrap()).unwrap(), cfg);
        let bad = "methods = []\nmode = \"oracle\"\n[[designs]]\nbase = \"T3\"\nseed = 4\n";
        assert!(matches!(CampaignConfig::from_toml(bad), Err(Error::Config(_))));
        assert!(CampaignConfig::from_toml("methods = [\"nope\"]\nmode = \"bic\"\ndesigns = []").is_err());
    }
}
