//! Shared fixtures for the pipeline benchmarks.

use rigidcert_core::nalgebra::DMatrix;
use rigidcert_core::{Framework, Graph, RealizationInstance, SampleConfig};

pub fn bench_seed() -> SampleConfig {
    SampleConfig::new(7)
}

/// The standard desk-scale graph suite with its certificate dimensions.
pub fn suite() -> Vec<(&'static str, Graph, usize)> {
    vec![
        ("c4", Graph::cycle(4), 1),
        ("c5", Graph::cycle(5), 1),
        ("k4", Graph::complete(4), 2),
        ("w5", Graph::wheel(5), 2),
        ("k5", Graph::complete(5), 3),
    ]
}

/// The universally rigid line placement of the 4-cycle (one edge length
/// equals the sum of the others).
pub fn ur_line_instance() -> RealizationInstance {
    let g = Graph::complete_bipartite(2, 2);
    let coords = nalgebra_coords(&[0.0, 2.0, 1.0, 3.0]);
    let f = Framework::new(g, 1, coords).unwrap();
    RealizationInstance::from_framework(&f).unwrap()
}

fn nalgebra_coords(xs: &[f64]) -> DMatrix<f64> {
    DMatrix::from_column_slice(xs.len(), 1, xs)
}
