//! The seven named graph-selection methods behind one interface.
//!
//! Every method turns a dataset and a decreasing grid of penalties into a path
//! of [`GraphEstimate`]s. Methods that share a fit share it here as well:
//! SepLogit AND/OR combine the same node-wise regressions, and the two
//! pseudo-likelihood variants have the identical path (they only differ in how
//! BIC scores a model, see [`crate::selection`]).

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use nalgebra::DMatrix;

use crate::data::BinaryDataset;
use crate::error::{Error, Result};
use crate::graph::EdgeSet;
use crate::ising::{gaussian_surrogate, Coding, SurrogateKind, ThetaMatrix};
use crate::selection::{make_grid, LambdaGrid, DEFAULT_GRID_COUNT, DEFAULT_GRID_RATIO};
use crate::solvers::{glasso, pseudo, LogisticFit, LogisticProblem, PenaltySpec, SolverOptions};

/// Coefficients of magnitude at or below this count as zero when reading an
/// edge set off a fitted model.
pub const EDGE_THRESHOLD: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum MethodId {
    SepLogitAnd,
    SepLogitOr,
    BmnPseudo,
    BmnPseudoHalf,
    GaussCov13,
    GaussCov,
    GaussCor,
}

/// How a method fits its path.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    SepLogit,
    Pseudo,
    Gaussian,
}

impl MethodId {
    pub const ALL: [MethodId; 7] = [
        MethodId::SepLogitAnd,
        MethodId::SepLogitOr,
        MethodId::BmnPseudo,
        MethodId::BmnPseudoHalf,
        MethodId::GaussCov13,
        MethodId::GaussCov,
        MethodId::GaussCor,
    ];

    pub fn family(self) -> Family {
        match self {
            MethodId::SepLogitAnd | MethodId::SepLogitOr => Family::SepLogit,
            MethodId::BmnPseudo | MethodId::BmnPseudoHalf => Family::Pseudo,
            _ => Family::Gaussian,
        }
    }

    pub fn surrogate_kind(self) -> Option<SurrogateKind> {
        match self {
            MethodId::GaussCov13 => Some(SurrogateKind::CovPlusThird),
            MethodId::GaussCov => Some(SurrogateKind::Cov),
            MethodId::GaussCor => Some(SurrogateKind::Cor),
            _ => None,
        }
    }

    /// Coding of the coefficients a method estimates. Logistic and
    /// pseudo-likelihood fits work on `{0,1}` data; the Gaussian methods work
    /// on spin data, where `-M_kl` plays the role of `theta_kl`.
    pub fn coding(self) -> Coding {
        match self.family() {
            Family::Gaussian => Coding::Spin,
            _ => Coding::ZeroOne,
        }
    }

    /// Display name, e.g. `GaussCov 1/3`.
    pub fn label(self) -> &'static str {
        match self {
            MethodId::SepLogitAnd => "SepLogit AND",
            MethodId::SepLogitOr => "SepLogit OR",
            MethodId::BmnPseudo => "BMNPseudo",
            MethodId::BmnPseudoHalf => "BMNPseudo 1/2",
            MethodId::GaussCov13 => "GaussCov 1/3",
            MethodId::GaussCov => "GaussCov",
            MethodId::GaussCor => "GaussCor",
        }
    }

    /// Identifier for file names and configuration files.
    pub fn slug(self) -> &'static str {
        match self {
            MethodId::SepLogitAnd => "seplogit_and",
            MethodId::SepLogitOr => "seplogit_or",
            MethodId::BmnPseudo => "bmn_pseudo",
            MethodId::BmnPseudoHalf => "bmn_pseudo_half",
            MethodId::GaussCov13 => "gauss_cov13",
            MethodId::GaussCov => "gauss_cov",
            MethodId::GaussCor => "gauss_cor",
        }
    }
}

impl fmt::Display for MethodId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for MethodId {
    type Err = Error;

    /// Accepts labels and slugs, ignoring case, spaces, `_`, `-` and `/`.
    fn from_str(s: &str) -> Result<Self> {
        let key: String = s.chars().filter(|c| c.is_ascii_alphanumeric()).map(|c| c.to_ascii_lowercase()).collect();
        Ok(match key.as_str() {
            "seplogitand" => MethodId::SepLogitAnd,
            "seplogitor" => MethodId::SepLogitOr,
            "bmnpseudo" => MethodId::BmnPseudo,
            "bmnpseudo12" | "bmnpseudohalf" => MethodId::BmnPseudoHalf,
            "gausscov13" => MethodId::GaussCov13,
            "gausscov" => MethodId::GaussCov,
            "gausscor" => MethodId::GaussCor,
            _ => return Err(Error::InvalidArgument(format!("unknown method {s:?}"))),
        })
    }
}

impl TryFrom<String> for MethodId {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<MethodId> for String {
    fn from(m: MethodId) -> Self {
        m.slug().to_string()
    }
}

/// One point of a regularization path.
#[derive(Debug, Clone)]
pub struct GraphEstimate {
    pub method: MethodId,
    pub lambda: f64,
    pub edges: EdgeSet,
    /// Penalized coefficients in the coding given by [`MethodId::coding`].
    /// For SepLogit each entry is the mean of the two directed coefficients
    /// and the diagonal holds the node-wise intercepts; the Gaussian methods
    /// leave the diagonal at zero.
    pub theta_shrunk: Option<ThetaMatrix>,
    /// SepLogit only: row `k` holds the regression of node `k` on the others,
    /// with its intercept on the diagonal.
    pub directed: Option<DMatrix<f64>>,
    /// Gaussian methods only: the penalized precision matrix.
    pub precision: Option<DMatrix<f64>>,
    /// Refitted coefficients without shrinkage under the same zero pattern.
    pub theta_unshrunk: Option<ThetaMatrix>,
}

impl GraphEstimate {
    fn bare(method: MethodId, lambda: f64, edges: EdgeSet) -> Self {
        Self { method, lambda, edges, theta_shrunk: None, directed: None, precision: None, theta_unshrunk: None }
    }

    pub fn p(&self) -> usize {
        self.edges.p()
    }
}

/// Smallest penalty at which the method returns the empty graph.
pub fn lambda_max(data: &BinaryDataset, method: MethodId) -> Result<f64> {
    Ok(match method.family() {
        Family::Gaussian => {
            let s = gaussian_surrogate(data, method.surrogate_kind().expect("gaussian method"))?.values;
            let p = s.nrows();
            (0..p).flat_map(|k| (k + 1..p).map(move |l| (k, l))).map(|(k, l)| s[(k, l)].abs()).fold(0.0, f64::max)
        }
        Family::Pseudo => pseudo::pseudo_lambda_max(data),
        Family::SepLogit => {
            let mut best: f64 = 0.0;
            for k in 0..data.p() {
                best = best.max(node_problem(data, k)?.lambda_max());
            }
            best
        }
    })
}

/// The default 50-point grid from `lambda_max` down to `lambda_max / 1000`.
pub fn default_grid(data: &BinaryDataset, method: MethodId) -> Result<LambdaGrid> {
    make_grid(lambda_max(data, method)?, DEFAULT_GRID_COUNT, DEFAULT_GRID_RATIO)
}

pub fn fit_default_path(data: &BinaryDataset, method: MethodId, opts: &SolverOptions) -> Result<Vec<GraphEstimate>> {
    fit_path(data, method, &default_grid(data, method)?, opts)
}

/// Fits the method at every penalty of `grid`, in order, warm-starting each
/// fit from the previous one.
pub fn fit_path(
    data: &BinaryDataset,
    method: MethodId,
    grid: &LambdaGrid,
    opts: &SolverOptions,
) -> Result<Vec<GraphEstimate>> {
    match method.family() {
        Family::Gaussian => gaussian_path(data, method, grid, opts),
        Family::Pseudo => pseudo_path(data, method, grid, opts),
        Family::SepLogit => Ok(combine_nodes(&seplogit_node_path(data, grid, opts)?, method)),
    }
}

/// A fitted path and the wall time it took.
#[derive(Debug, Clone)]
pub struct MethodPath {
    pub method: MethodId,
    pub path: Vec<GraphEstimate>,
    /// Seconds spent fitting; a fit shared between methods is charged in full to each.
    pub seconds: f64,
}

/// Fits the paths of several methods on one dataset, each on its own grid of
/// `count` penalties from its `lambda_max` down by `ratio`, fitting shared
/// paths once. Results come back in the order of `methods`.
pub fn fit_paths(
    data: &BinaryDataset,
    methods: &[MethodId],
    count: usize,
    ratio: f64,
    opts: &SolverOptions,
) -> Vec<Result<MethodPath>> {
    let grid = |method| lambda_max(data, method).and_then(|l| make_grid(l, count, ratio));
    let mut nodes: Option<(Result<NodePath>, f64)> = None;
    let mut pseudo_fit: Option<(Result<Vec<GraphEstimate>>, f64)> = None;
    let mut out = Vec::with_capacity(methods.len());
    for &method in methods {
        let result = match method.family() {
            Family::SepLogit => {
                let (nodes, secs) = nodes.get_or_insert_with(|| {
                    let start = Instant::now();
                    let r = grid(method).and_then(|g| seplogit_node_path(data, &g, opts));
                    (r, start.elapsed().as_secs_f64())
                });
                match nodes {
                    Ok(np) => Ok(MethodPath { method, path: combine_nodes(np, method), seconds: *secs }),
                    Err(e) => Err(replay(e)),
                }
            }
            Family::Pseudo => {
                let (path, secs) = pseudo_fit.get_or_insert_with(|| {
                    let start = Instant::now();
                    let r = grid(method).and_then(|g| fit_path(data, method, &g, opts));
                    (r, start.elapsed().as_secs_f64())
                });
                match path {
                    Ok(path) => Ok(MethodPath { method, path: relabel(path, method), seconds: *secs }),
                    Err(e) => Err(replay(e)),
                }
            }
            Family::Gaussian => {
                let start = Instant::now();
                grid(method).and_then(|g| fit_path(data, method, &g, opts)).map(|path| MethodPath {
                    method,
                    path,
                    seconds: start.elapsed().as_secs_f64(),
                })
            }
        };
        out.push(result);
    }
    out
}

/// Errors are not `Clone` (they may wrap I/O errors); solver failures only
/// carry plain data, so a shared failure is reported again by message.
fn replay(e: &Error) -> Error {
    match e {
        Error::Solver { method, lambda, node, source } => {
            Error::Solver { method: *method, lambda: *lambda, node: *node, source: Box::new(replay(source)) }
        }
        Error::NotConverged { solver, report } => Error::NotConverged { solver, report: *report },
        Error::ConstantColumn(k) => Error::ConstantColumn(*k),
        Error::NonFinite => Error::NonFinite,
        Error::InvalidGrid(s) => Error::InvalidGrid(s.clone()),
        other => Error::InvalidArgument(other.to_string()),
    }
}

fn relabel(path: &[GraphEstimate], method: MethodId) -> Vec<GraphEstimate> {
    path.iter().cloned().map(|mut e| {
        e.method = method;
        e
    })
    .collect()
}

fn annotate(method: MethodId, lambda: f64, node: Option<usize>) -> impl FnOnce(Error) -> Error {
    move |e| Error::Solver { method, lambda, node, source: Box::new(e) }
}

fn gaussian_path(
    data: &BinaryDataset,
    method: MethodId,
    grid: &LambdaGrid,
    opts: &SolverOptions,
) -> Result<Vec<GraphEstimate>> {
    let s = gaussian_surrogate(data, method.surrogate_kind().expect("gaussian method"))?.values;
    let p = s.nrows();
    let mut warm: Option<DMatrix<f64>> = None;
    let mut path = Vec::with_capacity(grid.len());
    for &lambda in grid.values() {
        let fit = glasso::glasso(&s, &PenaltySpec::Scalar(lambda), warm.as_ref(), &opts.glasso)
            .map_err(annotate(method, lambda, None))?;
        let m = fit.precision;
        let edges = EdgeSet::from_matrix(&m, EDGE_THRESHOLD);
        let mut theta = ThetaMatrix::zeros(p);
        for (k, l) in edges.iter() {
            theta.set_interaction(k, l, -m[(k, l)]);
        }
        let mut est = GraphEstimate::bare(method, lambda, edges);
        est.theta_shrunk = Some(theta);
        est.precision = Some(m.clone());
        warm = Some(m);
        path.push(est);
    }
    Ok(path)
}

fn pseudo_path(
    data: &BinaryDataset,
    method: MethodId,
    grid: &LambdaGrid,
    opts: &SolverOptions,
) -> Result<Vec<GraphEstimate>> {
    let mut warm: Option<ThetaMatrix> = None;
    let mut path = Vec::with_capacity(grid.len());
    for &lambda in grid.values() {
        let (theta, _) = pseudo::pseudo_likelihood_fit(data, &PenaltySpec::Scalar(lambda), warm.as_ref(), &opts.pseudo)
            .map_err(annotate(method, lambda, None))?;
        let mut est = GraphEstimate::bare(method, lambda, theta.support(EDGE_THRESHOLD));
        est.theta_shrunk = Some(theta.clone());
        warm = Some(theta);
        path.push(est);
    }
    Ok(path)
}

/// The logistic regression of node `k` on all other variables.
pub(crate) fn node_problem(data: &BinaryDataset, k: usize) -> Result<LogisticProblem> {
    let (n, p) = (data.n(), data.p());
    let others: Vec<usize> = (0..p).filter(|&l| l != k).collect();
    let x = DMatrix::from_fn(n, p - 1, |i, j| f64::from(data.get(i, others[j])));
    LogisticProblem::new(&x, &data.column(k))
}

/// Node-wise l1 logistic fits along a grid: `fits[i][k]` is node `k` at `lambdas[i]`.
#[derive(Debug, Clone)]
pub struct NodePath {
    pub p: usize,
    pub lambdas: Vec<f64>,
    pub fits: Vec<Vec<LogisticFit>>,
}

pub fn seplogit_node_path(data: &BinaryDataset, grid: &LambdaGrid, opts: &SolverOptions) -> Result<NodePath> {
    let p = data.p();
    let lambdas = grid.values().to_vec();
    let mut fits = vec![Vec::with_capacity(p); lambdas.len()];
    for k in 0..p {
        let problem = node_problem(data, k).map_err(annotate(MethodId::SepLogitAnd, lambdas[0], Some(k)))?;
        let mut warm: Option<LogisticFit> = None;
        for (i, &lambda) in lambdas.iter().enumerate() {
            let fit = problem
                .fit(&vec![lambda; p - 1], warm.as_ref(), &opts.logistic)
                .map_err(annotate(MethodId::SepLogitAnd, lambda, Some(k)))?;
            warm = Some(fit.clone());
            fits[i].push(fit);
        }
    }
    Ok(NodePath { p, lambdas, fits })
}

/// Row `k`: intercept of node `k` on the diagonal, its slopes elsewhere.
pub(crate) fn directed_table(p: usize, fits: &[LogisticFit]) -> DMatrix<f64> {
    let mut t = DMatrix::zeros(p, p);
    for (k, fit) in fits.iter().enumerate() {
        t[(k, k)] = fit.intercept;
        for (j, &b) in fit.coefficients.iter().enumerate() {
            let l = if j < k { j } else { j + 1 };
            t[(k, l)] = b;
        }
    }
    t
}

/// Symmetric coefficients as the mean of the two directed ones.
pub(crate) fn directed_mean(table: &DMatrix<f64>) -> ThetaMatrix {
    ThetaMatrix::symmetrized(table)
}

/// Applies the AND or OR rule to node-wise fits.
pub fn combine_nodes(nodes: &NodePath, method: MethodId) -> Vec<GraphEstimate> {
    let p = nodes.p;
    nodes
        .lambdas
        .iter()
        .zip(&nodes.fits)
        .map(|(&lambda, fits)| {
            let table = directed_table(p, fits);
            let mut edges = EdgeSet::empty(p);
            for k in 0..p {
                for l in k + 1..p {
                    let a = table[(k, l)].abs() > EDGE_THRESHOLD;
                    let b = table[(l, k)].abs() > EDGE_THRESHOLD;
                    let keep = match method {
                        MethodId::SepLogitAnd => a && b,
                        _ => a || b,
                    };
                    if keep {
                        edges.insert(k, l).expect("pair in range");
                    }
                }
            }
            let mut est = GraphEstimate::bare(method, lambda, edges);
            est.theta_shrunk = Some(directed_mean(&table));
            est.directed = Some(table);
            est
        })
        .collect()
}

/// Edge-set intersection of two models on the same variables; coefficients
/// are dropped and must be refitted.
pub fn intersect_models(a: &GraphEstimate, b: &GraphEstimate) -> Result<GraphEstimate> {
    let edges = a.edges.intersection(&b.edges)?;
    Ok(GraphEstimate::bare(a.method, a.lambda, edges))
}
