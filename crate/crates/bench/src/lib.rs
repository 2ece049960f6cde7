//! Fixtures shared by the criterion benches.

use lrsc::datasets::{generate_synthetic, SyntheticSpec};
use lrsc::graph::build_graph;
use lrsc::{DMatrix, GraphModel, SolverConfig, Symmetrization};

/// Corrupted union of `subspaces` 4-dimensional subspaces in `R^ambient`,
/// `points` samples each.
pub fn corrupted_data(ambient: usize, subspaces: usize, points: usize) -> DMatrix<f64> {
    let spec = SyntheticSpec {
        ambient_dim: ambient,
        subspace_dims: vec![4; subspaces],
        points_per_subspace: vec![points; subspaces],
        noise_sigma: 0.01,
        corruption_fraction: 0.05,
        corruption_magnitude: 3.0,
        seed: 7,
        ..SyntheticSpec::default()
    };
    generate_synthetic(&spec).expect("valid spec").x
}

pub fn knn_graph(x: &DMatrix<f64>) -> GraphModel {
    build_graph(x, 10, Symmetrization::MutualMax).expect("k < n")
}

/// Solver settings that converge on unit-scale synthetic data.
pub fn synthetic_config() -> SolverConfig {
    SolverConfig {
        beta: 0.03,
        ..SolverConfig::default()
    }
}
