//! Low rank subspace clustering (LRSC) and its graph Laplacian regularized
//! extension.
//!
//! The crate is organised bottom-up:
//!
//! * [`operators`] – scalar thresholding rules (soft shrinkage, `P_tau`,
//!   polynomial and hard thresholding) shared by every solver.
//! * [`closedform`] – SVD based closed-form solutions for clean and noisy data.
//! * [`solvers`] – iterative solvers for grossly corrupted data: iterative
//!   polynomial thresholding, ADMM, and the graph regularized ADMM.
//! * [`graph`] – K-nearest-neighbour similarity graphs and their Laplacians.
//! * [`spectral`] – spectral clustering of a representation matrix and the
//!   best-matching clustering accuracy.
//! * [`datasets`] – synthetic union-of-subspaces data and loaders for
//!   Extended Yale B, MNIST and USPS.
//! * [`experiment`] – the data → graph → solver → clustering pipeline used by
//!   the command-line harness.
//!
//! Data matrices are `p × n` with one sample per column.

pub mod closedform;
pub mod datasets;
pub mod error;
pub mod experiment;
pub mod graph;
pub mod linalg;
pub mod operators;
pub mod solvers;
pub mod spectral;

pub use nalgebra::{DMatrix, DVector};

pub use closedform::{solve_p1, solve_p2, solve_p3, solve_p4, Decomposition, RepresentationMatrix};
pub use error::{LrscError, Result};
pub use graph::{GraphModel, Symmetrization};
pub use linalg::SvdTriple;
pub use operators::{OperatorParams, Tau, ThresholdMode};
pub use solvers::{admm_p5, gl_admm, ipt_p5, IterationRecord, SolverConfig};
pub use spectral::{affinity_from_c, clustering_accuracy, spectral_cluster, ClusteringResult};

/// Dense real matrix, `p` ambient dimensions by `n` samples.
pub type DataMatrix = DMatrix<f64>;
