//! Coefficient designs and samplers for synthetic benchmarks.
//!
//! Designs `T1`..`T4` are written on the spin scale (`z in {-1,1}`) with
//! `p = 10`: a random sparse pattern, then `+-0.2` / `+-0.4` versions of the
//! same pattern, then a denser variant. `T5` is written directly on the
//! `{0,1}` scale with `p = 50`. Every design can be repeated on the diagonal
//! of a larger block matrix.
//!
//! Samplers always work with `{0,1}`-coded coefficients; [`Design::theta`]
//! holds that version.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Normal};

use crate::data::{default_names, BinaryDataset};
use crate::error::{Error, Result};
use crate::graph::EdgeSet;
use crate::ising::{logit, profile_probabilities, sigmoid, Coding, ThetaMatrix};
use crate::P_MAX_EXACT;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum BaseDesign {
    T1,
    T2,
    T3,
    T4,
    T5,
}

impl std::str::FromStr for BaseDesign {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "T1" => Ok(Self::T1),
            "T2" => Ok(Self::T2),
            "T3" => Ok(Self::T3),
            "T4" => Ok(Self::T4),
            "T5" => Ok(Self::T5),
            _ => Err(Error::InvalidArgument(format!("unknown design {s:?}"))),
        }
    }
}

impl std::fmt::Display for BaseDesign {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{self:?}")
    }
}

/// Constants of a design. `T2`/`T3` reuse the pattern drawn with the `T1`
/// constants and only override `magnitude` and the diagonal.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct DesignParams {
    /// Number of variables of one block.
    pub p: usize,
    /// Standard deviation of the primary coefficients (`T1`, `T4`).
    pub sd: f64,
    /// Primary coefficients at or below this magnitude are set to zero.
    pub threshold: f64,
    /// Fixed magnitude of the nonzero coefficients (`T2`, `T3`).
    pub magnitude: Option<f64>,
    /// Main effects run arithmetically from `diag_first` to `diag_last`.
    pub diag_first: f64,
    pub diag_last: f64,
}

impl Default for DesignParams {
    fn default() -> Self {
        Self::for_base(BaseDesign::T1)
    }
}

impl DesignParams {
    pub fn for_base(base: BaseDesign) -> Self {
        let t1 = Self { p: 10, sd: 0.05, threshold: 0.06, magnitude: None, diag_first: -1.3, diag_last: 0.0 };
        match base {
            BaseDesign::T1 => t1,
            BaseDesign::T2 => Self { magnitude: Some(0.2), ..t1 },
            BaseDesign::T3 => Self { magnitude: Some(0.4), ..t1 },
            BaseDesign::T4 => Self { sd: 0.3, threshold: 0.2, diag_first: -1.8, ..t1 },
            BaseDesign::T5 => Self {
                p: 50,
                sd: 0.0,
                threshold: 0.0,
                magnitude: None,
                diag_first: logit(0.1),
                diag_last: logit(0.2),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct DesignSpec {
    pub base: BaseDesign,
    pub seed: u64,
    /// Number of identical blocks on the diagonal (1 for a plain design).
    #[serde(default = "one")]
    pub copies: usize,
    #[serde(default)]
    pub params: Option<DesignParams>,
}

fn one() -> usize {
    1
}

impl DesignSpec {
    pub fn new(base: BaseDesign, seed: u64) -> Self {
        Self { base, seed, copies: 1, params: None }
    }

    pub fn block(base: BaseDesign, seed: u64, copies: usize) -> Self {
        Self { base, seed, copies, params: None }
    }

    pub fn params(&self) -> DesignParams {
        self.params.clone().unwrap_or_else(|| DesignParams::for_base(self.base))
    }

    /// Short name such as `T3` or `T3x5`.
    pub fn name(&self) -> String {
        if self.copies > 1 {
            format!("{}x{}", self.base, self.copies)
        } else {
            self.base.to_string()
        }
    }
}

/// A constructed design.
#[derive(Debug, Clone)]
pub struct Design {
    pub spec: DesignSpec,
    /// `{0,1}`-coded coefficients, used for sampling.
    pub theta: ThetaMatrix,
    /// Coefficients on the scale the design is written in.
    pub native: ThetaMatrix,
    pub coding: Coding,
    /// Nonzero off-diagonal pattern.
    pub truth: EdgeSet,
}

impl Design {
    pub fn p(&self) -> usize {
        self.theta.p()
    }
}

fn arithmetic(first: f64, last: f64, p: usize) -> Vec<f64> {
    if p == 1 {
        return vec![first];
    }
    (0..p).map(|k| first + (last - first) * k as f64 / (p - 1) as f64).collect()
}

/// Thresholded Gaussian pattern; redrawn until at least one coefficient survives.
/// Row-major `p x p`.
fn thresholded_normal(rng: &mut ChaCha8Rng, p: usize, sd: f64, threshold: f64) -> Result<Vec<f64>> {
    if p < 2 {
        return Err(Error::InvalidArgument("a random pattern needs p >= 2".into()));
    }
    if !(sd > 0.0) || threshold / sd > 10.0 {
        return Err(Error::InvalidArgument(format!("sd = {sd} with threshold = {threshold} leaves no coefficient")));
    }
    let normal = Normal::new(0.0, sd).map_err(|e| Error::InvalidArgument(format!("design sd: {e}")))?;
    loop {
        let mut m = vec![0.0; p * p];
        let mut any = false;
        for l in 0..p {
            for k in l + 1..p {
                let v: f64 = normal.sample(rng);
                if v.abs() > threshold {
                    m[k * p + l] = v;
                    m[l * p + k] = v;
                    any = true;
                }
            }
        }
        if any {
            return Ok(m);
        }
    }
}

/// Builds the coefficient matrix of a design. A pure function of `spec`.
pub fn build_theta(spec: &DesignSpec) -> Result<Design> {
    if spec.copies == 0 {
        return Err(Error::InvalidArgument("copies must be >= 1".into()));
    }
    let params = spec.params();
    let p = params.p;
    if p == 0 {
        return Err(Error::InvalidArgument("design needs p >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let diag = arithmetic(params.diag_first, params.diag_last, p);
    let mut block = ThetaMatrix::from_diagonal(&diag);
    let coding = match spec.base {
        BaseDesign::T5 => {
            let (ln2, ln15) = (2f64.ln(), 1.5f64.ln());
            for k in 1..p {
                for l in 0..k {
                    let u: f64 = rng.random();
                    let v = if u < 0.9 {
                        0.0
                    } else if u >= 0.95 {
                        ln2
                    } else {
                        ln15
                    };
                    block.set_interaction(k, l, v);
                }
            }
            Coding::ZeroOne
        }
        _ => {
            let primary = thresholded_normal(&mut rng, p, params.sd, params.threshold)?;
            for k in 0..p {
                for l in k + 1..p {
                    let v = primary[k * p + l];
                    let v = match params.magnitude {
                        Some(m) if v != 0.0 => m * v.signum(),
                        _ => v,
                    };
                    block.set_interaction(k, l, v);
                }
            }
            Coding::Spin
        }
    };
    let native = if spec.copies > 1 { block.block_diagonal(spec.copies) } else { block };
    let theta = native.recode(coding, Coding::ZeroOne);
    let truth = native.support(0.0);
    Ok(Design { spec: spec.clone(), theta, native, coding, truth })
}

/// RNG for replicate `r` of a campaign: one ChaCha8 stream per replicate.
pub fn replicate_rng(seed: u64, replicate: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replicate);
    rng
}

fn multinomial_counts<R: Rng + ?Sized>(probs: &[f64], n: usize, rng: &mut R) -> Result<Vec<u64>> {
    let mut counts = vec![0u64; probs.len()];
    let mut left = n as u64;
    let mut mass = 1.0;
    for (c, &pr) in counts.iter_mut().zip(probs) {
        if left == 0 {
            break;
        }
        let q = if mass > 0.0 { (pr / mass).clamp(0.0, 1.0) } else { 1.0 };
        let draw = Binomial::new(left, q).map_err(|e| Error::InvalidArgument(format!("binomial: {e}")))?;
        *c = draw.sample(rng);
        left -= *c;
        mass -= pr;
    }
    if left > 0 {
        // Rounding left some mass unassigned; give it to the last cell.
        *counts.last_mut().expect("nonempty") += left;
    }
    Ok(counts)
}

/// Draws `n` rows by sampling multinomial cell counts over all `2^p`
/// profiles, then shuffling the expanded rows.
pub fn sample_exact<R: Rng + ?Sized>(theta: &ThetaMatrix, n: usize, rng: &mut R) -> Result<BinaryDataset> {
    let p = theta.p();
    let probs = profile_probabilities(theta)?;
    let counts = multinomial_counts(&probs, n, rng)?;
    let mut rows: Vec<u32> = Vec::with_capacity(n);
    for (s, &c) in counts.iter().enumerate() {
        rows.extend(std::iter::repeat_n(s as u32, c as usize));
    }
    rows.shuffle(rng);
    let mut values = Vec::with_capacity(n * p);
    for s in rows {
        values.extend((0..p).map(|k| ((s >> k) & 1) as u8));
    }
    BinaryDataset::new(n, p, values, default_names(p))
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GibbsOptions {
    pub burn_in: usize,
    pub thinning: usize,
}

impl Default for GibbsOptions {
    fn default() -> Self {
        Self { burn_in: 1000, thinning: 10 }
    }
}

/// Single-chain Gibbs sampler with systematic scans; one row is kept every
/// `thinning` sweeps after `burn_in` sweeps.
pub fn sample_gibbs<R: Rng + ?Sized>(
    theta: &ThetaMatrix,
    n: usize,
    opts: &GibbsOptions,
    rng: &mut R,
) -> Result<BinaryDataset> {
    if opts.burn_in == 0 || opts.thinning == 0 {
        return Err(Error::InvalidArgument("burn_in and thinning must be >= 1".into()));
    }
    if !theta.is_finite() {
        return Err(Error::NonFinite);
    }
    let p = theta.p();
    let m = theta.as_matrix();
    let mut x: Vec<u8> = (0..p).map(|_| u8::from(rng.random::<bool>())).collect();
    let sweep = |x: &mut Vec<u8>, rng: &mut R| {
        for k in 0..p {
            let mut eta = m[(k, k)];
            for l in 0..p {
                if l != k && x[l] == 1 {
                    eta += m[(k, l)];
                }
            }
            let u: f64 = rng.random();
            x[k] = u8::from(u < sigmoid(eta));
        }
    };
    for _ in 0..opts.burn_in {
        sweep(&mut x, rng);
    }
    let mut values = Vec::with_capacity(n * p);
    for _ in 0..n {
        for _ in 0..opts.thinning {
            sweep(&mut x, rng);
        }
        values.extend_from_slice(&x);
    }
    BinaryDataset::new(n, p, values, default_names(p))
}

/// Samples each connected component of the interaction graph independently
/// and exactly. Requires every component to have at most `P_MAX_EXACT` nodes.
pub fn sample_components<R: Rng + ?Sized>(theta: &ThetaMatrix, n: usize, rng: &mut R) -> Result<BinaryDataset> {
    let p = theta.p();
    let components = theta.support(0.0).components();
    if let Some(big) = components.iter().find(|c| c.len() > P_MAX_EXACT) {
        return Err(Error::DimensionTooLarge { p: big.len(), max: P_MAX_EXACT });
    }
    let mut values = vec![0u8; n * p];
    for comp in components {
        let sub = ThetaMatrix::from_matrix(theta.as_matrix().select_rows(&comp).select_columns(&comp))?;
        let block = sample_exact(&sub, n, rng)?;
        for i in 0..n {
            for (j, &k) in comp.iter().enumerate() {
                values[i * p + k] = block.get(i, j);
            }
        }
    }
    BinaryDataset::new(n, p, values, default_names(p))
}

/// Exact component-wise sampling when possible, Gibbs sampling otherwise.
pub fn sample_auto<R: Rng + ?Sized>(
    theta: &ThetaMatrix,
    n: usize,
    gibbs: &GibbsOptions,
    rng: &mut R,
) -> Result<BinaryDataset> {
    let largest = theta.support(0.0).components().iter().map(Vec::len).max().unwrap_or(0);
    if largest <= P_MAX_EXACT {
        sample_components(theta, n, rng)
    } else {
        sample_gibbs(theta, n, gibbs, rng)
    }
}
