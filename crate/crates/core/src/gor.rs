//! General position orthogonal representations (GORs) in `R^{n-d-1}`.
//!
//! A `(d+1)`-connected graph admits a configuration of row vectors, one
//! per vertex, with `v_i` orthogonal to every non-neighbor and the whole
//! family in general linear position.  The construction is incremental:
//! each vertex is sampled generically inside the orthogonal complement of
//! its already-placed non-neighbors.  Inextendable prefixes form a
//! lower-dimensional set, so on failure we resample the entire prefix
//! rather than backtrack.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::Graph;
use crate::numkernel::{self, draw, NumError, PositionCheck, SampleConfig};
use crate::POSITION_SUBSET_BUDGET;

#[derive(Debug, Error)]
pub enum GorError {
    #[error("graph is {connectivity}-connected, construction needs {required}")]
    NotConnectedEnough {
        connectivity: usize,
        required: usize,
    },
    #[error("need n >= d + 2 vertices, got n = {n} with d = {d}")]
    TooFewVertices { n: usize, d: usize },
    #[error("dimension must be at least 1")]
    ZeroDimension,
    #[error("no general position representation after {retries} retries")]
    RetriesExhausted { retries: usize },
    #[error("configuration matrix is {rows}x{cols}, expected {n}x{dim}")]
    ShapeMismatch {
        rows: usize,
        cols: usize,
        n: usize,
        dim: usize,
    },
    #[error(transparent)]
    Num(#[from] NumError),
}

/// Configuration matrix of an orthogonal representation: row `i` is the
/// vector `v_i` in `R^{n-d-1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct OrthogonalRep {
    graph: Graph,
    d: usize,
    x: DMatrix<f64>,
}

/// Serialized shape of the configuration matrix; pair it with a graph.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OrthogonalRepJson {
    pub d: usize,
    pub x: Vec<Vec<f64>>,
}

impl From<&OrthogonalRep> for OrthogonalRepJson {
    fn from(rep: &OrthogonalRep) -> Self {
        OrthogonalRepJson {
            d: rep.d,
            x: (0..rep.n())
                .map(|i| rep.x.row(i).iter().copied().collect())
                .collect(),
        }
    }
}

impl OrthogonalRep {
    pub fn new(graph: Graph, d: usize, x: DMatrix<f64>) -> Result<Self, GorError> {
        let n = graph.n();
        if d == 0 {
            return Err(GorError::ZeroDimension);
        }
        if n < d + 2 {
            return Err(GorError::TooFewVertices { n, d });
        }
        let dim = n - d - 1;
        if x.nrows() != n || x.ncols() != dim {
            return Err(GorError::ShapeMismatch {
                rows: x.nrows(),
                cols: x.ncols(),
                n,
                dim,
            });
        }
        Ok(OrthogonalRep { graph, d, x })
    }

    pub fn from_json(graph: Graph, json: &OrthogonalRepJson) -> Result<Self, GorError> {
        let n = json.x.len();
        let dim = json.x.first().map_or(0, |r| r.len());
        if json.x.iter().any(|row| row.len() != dim) {
            return Err(GorError::ShapeMismatch {
                rows: n,
                cols: dim,
                n: graph.n(),
                dim: graph.n().saturating_sub(json.d + 1),
            });
        }
        let flat: Vec<f64> = json.x.iter().flatten().copied().collect();
        OrthogonalRep::new(graph, json.d, DMatrix::from_row_slice(n, dim, &flat))
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    /// Ambient dimension `D = n - d - 1`.
    pub fn rep_dim(&self) -> usize {
        self.x.ncols()
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn vector(&self, v: usize) -> DVector<f64> {
        self.x.row(v).transpose()
    }

    /// `max |v_i . v_j|` over non-adjacent pairs.
    pub fn max_orthogonality_residual(&self) -> f64 {
        self.graph
            .non_edges()
            .iter()
            .map(|&(i, j)| self.x.row(i).dot(&self.x.row(j)).abs())
            .fold(0.0, f64::max)
    }

    /// New representation with row `i` scaled by `scales[i]`.
    pub fn scaled_rows(&self, scales: &DVector<f64>) -> OrthogonalRep {
        let mut x = self.x.clone();
        for i in 0..self.n() {
            let row = x.row(i) * scales[i];
            x.set_row(i, &row);
        }
        OrthogonalRep {
            graph: self.graph.clone(),
            d: self.d,
            x,
        }
    }
}

/// Validation evidence for an orthogonal representation.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GorValidation {
    pub max_orthogonality_residual: f64,
    pub orthogonality_tol: f64,
    pub orthogonality_ok: bool,
    pub general_position: PositionCheck,
    pub x_rank: usize,
    pub ok: bool,
}

/// Checks orthogonality on non-edges, general linear position of the
/// rows, and that the rows span `R^{n-d-1}`.
pub fn validate_gor(rep: &OrthogonalRep, tol: Option<f64>) -> GorValidation {
    let residual = rep.max_orthogonality_residual();
    let row_norm_sq = (0..rep.n())
        .map(|i| rep.x().row(i).norm_squared())
        .fold(0.0f64, f64::max);
    let orthogonality_tol = tol.unwrap_or(1e-10) * row_norm_sq.max(1e-300);
    let orthogonality_ok = residual <= orthogonality_tol;
    let general_position = numkernel::general_linear_position(rep.x(), POSITION_SUBSET_BUDGET);
    let x_rank = numkernel::numerical_rank(rep.x(), None)
        .map(|r| r.rank)
        .unwrap_or(0);
    let ok = orthogonality_ok && general_position.ok && x_rank == rep.rep_dim();
    GorValidation {
        max_orthogonality_residual: residual,
        orthogonality_tol,
        orthogonality_ok,
        general_position,
        x_rank,
        ok,
    }
}

/// Incremental construction of a GOR of `g` in `R^{n-d-1}`.
///
/// Requires `g` to be `(d+1)`-connected and `n >= d+2`.  Each retry
/// resamples the whole configuration with a fresh stream of the seed in
/// `cfg`; the output is deterministic in `(g, d, cfg.seed)`.
pub fn build_gor(
    g: &Graph,
    d: usize,
    cfg: &SampleConfig,
    max_retries: usize,
) -> Result<OrthogonalRep, GorError> {
    let n = g.n();
    if d == 0 {
        return Err(GorError::ZeroDimension);
    }
    if n < d + 2 {
        return Err(GorError::TooFewVertices { n, d });
    }
    let connectivity = g.vertex_connectivity();
    if connectivity < d + 1 {
        return Err(GorError::NotConnectedEnough {
            connectivity,
            required: d + 1,
        });
    }
    let dim = n - d - 1;
    for attempt in 0..=max_retries {
        let mut rng = cfg.rng(attempt as u64);
        let mut x = DMatrix::<f64>::zeros(n, dim);
        let mut prefix_ok = true;
        for i in 0..n {
            let nonneighbors: Vec<usize> = (0..i).filter(|&j| !g.has_edge(i, j)).collect();
            let ebar = nonneighbors.len();
            let e_i = i - ebar;
            // A^perp must have dimension n - d - (i+1) + e_i; anything else
            // means the sampled prefix went degenerate, so restart it.
            let expected = (n + e_i).checked_sub(d + i + 1);
            let basis = if ebar == 0 {
                DMatrix::identity(dim, dim)
            } else {
                let a = x.rows(0, i).select_rows(nonneighbors.iter());
                numkernel::kernel_basis(&a, None)?
            };
            if Some(basis.ncols()) != expected {
                prefix_ok = false;
                break;
            }
            let z = DVector::from_iterator(
                basis.ncols(),
                (0..basis.ncols()).map(|_| draw(&mut rng, cfg)),
            );
            x.set_row(i, &(basis * z).transpose());
        }
        if !prefix_ok {
            continue;
        }
        let rep = OrthogonalRep {
            graph: g.clone(),
            d,
            x,
        };
        if validate_gor(&rep, None).ok {
            return Ok(rep);
        }
    }
    Err(GorError::RetriesExhausted {
        retries: max_retries,
    })
}

/// The reference curve of GORs of `K_{2,2}` (vertices `u1, u2, v1, v2`)
/// in the plane, identified with `C`: `u1 = i e^{-i theta/2}`,
/// `u2 = e^{-i theta/2}`, `v1 = i e^{i theta/2}`, `v2 = -e^{i theta/2}`,
/// where `theta` is the angle between `u1` and `v1`.
#[derive(Clone, Debug)]
pub struct K22Reference {
    pub rep: OrthogonalRep,
    /// False exactly when `theta` is a multiple of `pi/2`.
    pub general_position: bool,
}

pub fn reference_gor_k22(theta: f64) -> K22Reference {
    let (s, c) = (theta / 2.0).sin_cos();
    // Rows in vertex order (u1, u2, v1, v2), coordinates (Re, Im).
    let x = DMatrix::from_row_slice(4, 2, &[s, c, c, -s, -s, c, -c, -s]);
    let graph = Graph::complete_bipartite(2, 2);
    let rep = OrthogonalRep { graph, d: 1, x };
    let general_position =
        numkernel::general_linear_position(rep.x(), POSITION_SUBSET_BUDGET).ok;
    K22Reference {
        rep,
        general_position,
    }
}

/// Jacobian of the non-edge orthogonality map `X -> (v_i . v_j)` at `x`:
/// one row per non-edge, `nD` columns vertex-major, with `v_j` in the
/// vertex-`i` block and `v_i` in the vertex-`j` block.
pub fn orthogonality_jacobian(g: &Graph, x: &DMatrix<f64>) -> DMatrix<f64> {
    let dim = x.ncols();
    let non_edges = g.non_edges();
    let mut jac = DMatrix::zeros(non_edges.len(), g.n() * dim);
    for (row, &(i, j)) in non_edges.iter().enumerate() {
        for k in 0..dim {
            jac[(row, i * dim + k)] = x[(j, k)];
            jac[(row, j * dim + k)] = x[(i, k)];
        }
    }
    jac
}

/// Measured vs. predicted dimension of a variety, both integers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DimensionAudit {
    pub measured: usize,
    pub predicted: usize,
}

impl DimensionAudit {
    pub fn agrees(&self) -> bool {
        self.measured == self.predicted
    }
}

/// Numerical audit of the GOR-variety dimension
/// `n(n-d) - (n+1)n/2 + m`: builds a representation, measures the rank of
/// the orthogonality Jacobian there, and returns `nD - rank` next to the
/// prediction.
pub fn audit_gor_dimension(
    g: &Graph,
    d: usize,
    cfg: &SampleConfig,
) -> Result<DimensionAudit, GorError> {
    let rep = build_gor(g, d, cfg, 32)?;
    let n = g.n();
    let dim = rep.rep_dim();
    let jac = orthogonality_jacobian(g, rep.x());
    let rank = if jac.nrows() == 0 {
        0
    } else {
        numkernel::numerical_rank(&jac, None)?.rank
    };
    let measured = n * dim - rank;
    let predicted = (n * (n - d) + g.m()) as i64 - ((n + 1) * n / 2) as i64;
    debug_assert!(predicted >= 0);
    Ok(DimensionAudit {
        measured,
        predicted: predicted as usize,
    })
}
