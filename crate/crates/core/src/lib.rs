//! Structure learning for binary (Ising) graphical models.
//!
//! `isinglab` fits sparse pairwise Ising models with three families of
//! approximate l1-penalized estimators and compares them on simulated data:
//!
//! - separate per-node l1 logistic regressions combined with an AND or an OR
//!   rule ([`MethodId::SepLogitAnd`], [`MethodId::SepLogitOr`]);
//! - symmetric l1-penalized pseudo-likelihood maximization
//!   ([`MethodId::BmnPseudo`], [`MethodId::BmnPseudoHalf`]);
//! - the graphical lasso run on a Gaussian surrogate of the spin data
//!   ([`MethodId::GaussCov13`], [`MethodId::GaussCov`], [`MethodId::GaussCor`]).
//!
//! Small models (p up to 20 by default) are handled exactly by enumeration,
//! which gives the oracle used throughout the test-suite.
//!
//! ```no_run
//! use isinglab::{datagen, methods, selection, MethodId};
//! use rand::SeedableRng;
//!
//! let design = datagen::build_theta(&datagen::DesignSpec::new(datagen::BaseDesign::T3, 11)).unwrap();
//! let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
//! let data = datagen::sample_exact(&design.theta, 2500, &mut rng).unwrap();
//! let opts = isinglab::SolverOptions::default();
//! let path = methods::fit_default_path(&data, MethodId::GaussCor, &opts).unwrap();
//! let (chosen, _) = selection::bic_select(&data, &path, &opts).unwrap();
//! println!("{} edges", chosen.edges.len());
//! ```

pub mod cli;
pub mod data;
pub mod datagen;
pub mod error;
pub mod eval;
pub mod graph;
pub mod io;
pub mod ising;
pub mod methods;
pub mod selection;
pub mod solvers;

pub use data::BinaryDataset;
pub use error::{Error, Result};
pub use graph::EdgeSet;
pub use ising::{Coding, SurrogateKind, SurrogateMatrix, ThetaMatrix};
pub use methods::{GraphEstimate, MethodId};
pub use selection::LambdaGrid;
pub use solvers::{PenaltySpec, SolveReport, SolverOptions};

/// Largest number of variables accepted by the exact (enumeration based) routines.
pub const P_MAX_EXACT: usize = 20;
