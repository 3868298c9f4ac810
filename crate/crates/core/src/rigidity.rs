//! Frameworks, the rigidity matrix, infinitesimal flexes, and equilibrium
//! stresses.
//!
//! Conventions used throughout the crate:
//! - the rigidity matrix has one row per edge (lexicographic edge order)
//!   and one column per (vertex, coordinate) pair, vertex-major, so
//!   `R(p) p'` lists the first-order edge-length changes;
//! - stress vectors are indexed by the same edge order;
//! - a stress matrix carries `-omega_ij` off-diagonal and zero row sums.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::Graph;
use crate::numkernel::{self, NumError, RankReport};
use crate::CONGRUENCE_TOL;

#[derive(Debug, Error)]
pub enum RigidityError {
    #[error("coordinate array is {rows}x{cols}, expected {n}x{d}")]
    ShapeMismatch {
        rows: usize,
        cols: usize,
        n: usize,
        d: usize,
    },
    #[error("dimension must be at least 1")]
    ZeroDimension,
    #[error("coordinates contain non-finite entries")]
    NonFinite,
    #[error("affine span has dimension {span} < d = {d}")]
    DegenerateSpan { span: usize, d: usize },
    #[error("velocity vector has length {got}, expected {expected}")]
    VelocityLength { got: usize, expected: usize },
    #[error("not an infinitesimal flex: residual {residual:.3e} exceeds {tol:.3e}")]
    NotAFlex { residual: f64, tol: f64 },
    #[error("stress vector has {got} entries, expected one per edge ({expected})")]
    StressLength { got: usize, expected: usize },
    #[error("stress matrix is {rows}x{cols}, expected {n}x{n}")]
    StressShape { rows: usize, cols: usize, n: usize },
    #[error("stress matrix violates {what}: {value:.3e} exceeds {tol:.3e}")]
    StressInvariant {
        what: &'static str,
        value: f64,
        tol: f64,
    },
    #[error(transparent)]
    Num(#[from] NumError),
}

/// A graph together with a placement of its vertices in `R^d`.
#[derive(Clone, Debug, PartialEq)]
pub struct Framework {
    graph: Graph,
    d: usize,
    coords: DMatrix<f64>,
}

/// Serialized shape of the coordinate part; pair it with a graph.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FrameworkJson {
    pub d: usize,
    pub coords: Vec<Vec<f64>>,
}

impl From<&Framework> for FrameworkJson {
    fn from(f: &Framework) -> Self {
        FrameworkJson {
            d: f.d,
            coords: (0..f.n())
                .map(|i| f.coords.row(i).iter().copied().collect())
                .collect(),
        }
    }
}

impl Framework {
    pub fn new(graph: Graph, d: usize, coords: DMatrix<f64>) -> Result<Self, RigidityError> {
        if d == 0 {
            return Err(RigidityError::ZeroDimension);
        }
        if coords.nrows() != graph.n() || coords.ncols() != d {
            return Err(RigidityError::ShapeMismatch {
                rows: coords.nrows(),
                cols: coords.ncols(),
                n: graph.n(),
                d,
            });
        }
        if coords.iter().any(|x| !x.is_finite()) {
            return Err(RigidityError::NonFinite);
        }
        Ok(Framework { graph, d, coords })
    }

    pub fn from_json(graph: Graph, json: &FrameworkJson) -> Result<Self, RigidityError> {
        let n = json.coords.len();
        let d = json.d;
        if json.coords.iter().any(|row| row.len() != d) {
            return Err(RigidityError::ShapeMismatch {
                rows: n,
                cols: json.coords.first().map_or(0, |r| r.len()),
                n: graph.n(),
                d,
            });
        }
        let flat: Vec<f64> = json.coords.iter().flatten().copied().collect();
        Framework::new(graph, d, DMatrix::from_row_slice(n, d, &flat))
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

    /// `n x d` coordinate array, row `i` = position of vertex `i`.
    pub fn coords(&self) -> &DMatrix<f64> {
        &self.coords
    }

    pub fn point(&self, v: usize) -> DVector<f64> {
        self.coords.row(v).transpose()
    }

    /// Largest pairwise distance between placed vertices.
    pub fn diameter(&self) -> f64 {
        let n = self.n();
        let mut best = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                best = best.max((self.coords.row(i) - self.coords.row(j)).norm());
            }
        }
        best
    }

    /// Smallest pairwise distance between placed vertices.
    pub fn min_pairwise_distance(&self) -> f64 {
        let n = self.n();
        let mut best = f64::INFINITY;
        for i in 0..n {
            for j in (i + 1)..n {
                best = best.min((self.coords.row(i) - self.coords.row(j)).norm());
            }
        }
        best
    }

    /// Dimension of the affine span of the placed points.
    pub fn affine_span_dim(&self) -> usize {
        let n = self.n();
        let mean = self.coords.row_mean();
        let mut centered = self.coords.clone();
        for i in 0..n {
            let shifted = centered.row(i) - &mean;
            centered.set_row(i, &shifted);
        }
        numkernel::numerical_rank(&centered, None)
            .map(|r| r.rank)
            .unwrap_or(0)
    }

    pub fn edge_lengths(&self) -> Vec<f64> {
        self.graph
            .edges()
            .iter()
            .map(|&(i, j)| (self.coords.row(i) - self.coords.row(j)).norm())
            .collect()
    }

    /// New framework with every coordinate offset by `delta` (an
    /// `n*d`-vector, vertex-major).
    pub fn offset(&self, delta: &DVector<f64>) -> Result<Framework, RigidityError> {
        let nd = self.n() * self.d;
        if delta.len() != nd {
            return Err(RigidityError::VelocityLength {
                got: delta.len(),
                expected: nd,
            });
        }
        let mut coords = self.coords.clone();
        for v in 0..self.n() {
            for k in 0..self.d {
                coords[(v, k)] += delta[v * self.d + k];
            }
        }
        Framework::new(self.graph.clone(), self.d, coords)
    }
}

/// A real scalar per edge of the graph, indexed by the lexicographic
/// edge order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StressVector {
    values: Vec<f64>,
}

impl StressVector {
    pub fn new(values: Vec<f64>) -> Self {
        StressVector { values }
    }

    pub fn zeros(m: usize) -> Self {
        StressVector {
            values: vec![0.0; m],
        }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn dot(&self, other: &StressVector) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn scaled(&self, c: f64) -> StressVector {
        StressVector {
            values: self.values.iter().map(|x| c * x).collect(),
        }
    }
}

/// Symmetric `n x n` stress matrix: `-omega_ij` on edges, zeros on
/// non-edges, diagonal chosen so every row sums to zero.
#[derive(Clone, Debug, PartialEq)]
pub struct StressMatrix {
    graph: Graph,
    omega: DMatrix<f64>,
}

impl StressMatrix {
    /// Wraps a matrix after checking the stress-matrix invariants within
    /// `tol` relative to the largest entry.
    pub fn new(graph: Graph, omega: DMatrix<f64>, tol: f64) -> Result<Self, RigidityError> {
        let n = graph.n();
        if omega.nrows() != n || omega.ncols() != n {
            return Err(RigidityError::StressShape {
                rows: omega.nrows(),
                cols: omega.ncols(),
                n,
            });
        }
        let scale = omega.iter().fold(0.0f64, |a, &v| a.max(v.abs())).max(1e-300);
        let sym = (&omega - omega.transpose()).abs().max();
        if sym > tol * scale {
            return Err(RigidityError::StressInvariant {
                what: "symmetry",
                value: sym,
                tol: tol * scale,
            });
        }
        for (i, j) in graph.non_edges() {
            let v = omega[(i, j)].abs().max(omega[(j, i)].abs());
            if v > tol * scale {
                return Err(RigidityError::StressInvariant {
                    what: "zero pattern on non-edges",
                    value: v,
                    tol: tol * scale,
                });
            }
        }
        let worst_row_sum = (0..n)
            .map(|i| omega.row(i).sum().abs())
            .fold(0.0f64, f64::max);
        if worst_row_sum > tol * scale * n as f64 {
            return Err(RigidityError::StressInvariant {
                what: "zero row sums",
                value: worst_row_sum,
                tol: tol * scale * n as f64,
            });
        }
        Ok(StressMatrix { graph, omega })
    }

    /// Builds the stress matrix of `w` exactly: invariants hold by
    /// construction, no tolerance involved.
    pub fn from_stress_vector(graph: &Graph, w: &StressVector) -> Result<Self, RigidityError> {
        if w.len() != graph.m() {
            return Err(RigidityError::StressLength {
                got: w.len(),
                expected: graph.m(),
            });
        }
        let n = graph.n();
        let mut omega = DMatrix::zeros(n, n);
        for (e, &(i, j)) in graph.edges().iter().enumerate() {
            omega[(i, j)] = -w.as_slice()[e];
            omega[(j, i)] = -w.as_slice()[e];
        }
        for i in 0..n {
            let off: f64 = (0..n).filter(|&j| j != i).map(|j| omega[(i, j)]).sum();
            omega[(i, i)] = -off;
        }
        Ok(StressMatrix {
            graph: graph.clone(),
            omega,
        })
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.omega
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    /// Reads `-Omega[i][j]` back off the edges; exact inverse of
    /// `from_stress_vector`.
    pub fn to_stress_vector(&self) -> StressVector {
        StressVector::new(
            self.graph
                .edges()
                .iter()
                .map(|&(i, j)| -self.omega[(i, j)])
                .collect(),
        )
    }

    pub fn max_abs(&self) -> f64 {
        self.omega.iter().fold(0.0f64, |a, &v| a.max(v.abs()))
    }

    /// Same stress scaled so the largest absolute entry is 1.
    pub fn normalized(&self) -> StressMatrix {
        let scale = self.max_abs();
        if scale == 0.0 {
            return self.clone();
        }
        StressMatrix {
            graph: self.graph.clone(),
            omega: &self.omega / scale,
        }
    }

    pub fn scaled(&self, c: f64) -> StressMatrix {
        StressMatrix {
            graph: self.graph.clone(),
            omega: &self.omega * c,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlexKind {
    All,
    Trivial,
    NontrivialComplement,
}

/// A list of velocity assignments, one `n*d`-vector per column.
#[derive(Clone, Debug)]
pub struct FlexBasis {
    pub vectors: DMatrix<f64>,
    pub kind: FlexKind,
}

impl FlexBasis {
    pub fn dim(&self) -> usize {
        self.vectors.ncols()
    }

    pub fn column(&self, k: usize) -> DVector<f64> {
        self.vectors.column(k).into()
    }
}

/// The `m x nd` rigidity matrix: the row for edge `{i, j}` carries
/// `p_i - p_j` in the vertex-`i` block and `p_j - p_i` in the vertex-`j`
/// block.
pub fn rigidity_matrix(f: &Framework) -> DMatrix<f64> {
    let d = f.d();
    let mut r = DMatrix::zeros(f.graph().m(), f.n() * d);
    for (e, &(i, j)) in f.graph().edges().iter().enumerate() {
        for k in 0..d {
            let diff = f.coords()[(i, k)] - f.coords()[(j, k)];
            r[(e, i * d + k)] = diff;
            r[(e, j * d + k)] = -diff;
        }
    }
    r
}

/// Rigidity verdict together with the rank evidence.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RigidityCheck {
    pub rigid: bool,
    pub target_rank: usize,
    pub rank: RankReport,
}

/// Infinitesimal rigidity via the rank criterion
/// `rank R(p) = nd - (d+1)d/2` (valid for `n >= d`).
pub fn is_infinitesimally_rigid(f: &Framework) -> Result<RigidityCheck, RigidityError> {
    let d = f.d();
    let target = f.n() * d - (d + 1) * d / 2;
    let rank = numkernel::numerical_rank(&rigidity_matrix(f), None)?;
    Ok(RigidityCheck {
        rigid: rank.rank == target,
        target_rank: target,
        rank,
    })
}

/// Max over edges of `|(p_i - p_j) . (p'_i - p'_j)|`.
pub fn flex_residual(f: &Framework, pprime: &DVector<f64>) -> Result<f64, RigidityError> {
    let nd = f.n() * f.d();
    if pprime.len() != nd {
        return Err(RigidityError::VelocityLength {
            got: pprime.len(),
            expected: nd,
        });
    }
    let r = rigidity_matrix(f);
    Ok((r * pprime).abs().max())
}

/// The `d` translations and `d(d-1)/2` infinitesimal rotations evaluated
/// at `p`; a basis of the trivial flexes when the affine span is full.
pub fn trivial_flex_basis(f: &Framework) -> Result<FlexBasis, RigidityError> {
    let d = f.d();
    let span = f.affine_span_dim();
    if span < d {
        return Err(RigidityError::DegenerateSpan { span, d });
    }
    let n = f.n();
    let count = d + d * (d - 1) / 2;
    let mut basis = DMatrix::zeros(n * d, count);
    for k in 0..d {
        for v in 0..n {
            basis[(v * d + k, k)] = 1.0;
        }
    }
    let mut col = d;
    for a in 0..d {
        for b in (a + 1)..d {
            for v in 0..n {
                basis[(v * d + b, col)] = f.coords()[(v, a)];
                basis[(v * d + a, col)] = -f.coords()[(v, b)];
            }
            col += 1;
        }
    }
    Ok(FlexBasis {
        vectors: basis,
        kind: FlexKind::Trivial,
    })
}

/// Orthonormal basis of the non-trivial flexes: kernel of `R(p)`
/// intersected with the orthogonal complement of the trivial flexes.
pub fn flex_space(f: &Framework) -> Result<FlexBasis, RigidityError> {
    let trivial = trivial_flex_basis(f)?;
    // Orthonormalize the trivial flexes so scales match the rigidity rows.
    let q = trivial.vectors.clone().qr().q();
    let r = rigidity_matrix(f);
    let mut stacked = DMatrix::zeros(r.nrows() + q.ncols(), r.ncols());
    stacked.view_mut((0, 0), r.shape()).copy_from(&r);
    stacked
        .view_mut((r.nrows(), 0), (q.ncols(), q.nrows()))
        .copy_from(&q.transpose());
    let kernel = numkernel::kernel_basis(&stacked, None)?;
    Ok(FlexBasis {
        vectors: kernel,
        kind: FlexKind::NontrivialComplement,
    })
}

/// Orthonormal basis of the equilibrium stresses: the co-kernel of the
/// rigidity matrix, one `StressVector` per basis direction.
pub fn equilibrium_stress_basis(f: &Framework) -> Result<Vec<StressVector>, RigidityError> {
    let r = rigidity_matrix(f);
    let basis = numkernel::cokernel_basis(&r, None)?;
    Ok((0..basis.ncols())
        .map(|k| StressVector::new(basis.column(k).iter().copied().collect()))
        .collect())
}

pub fn stress_vector_to_matrix(g: &Graph, w: &StressVector) -> Result<StressMatrix, RigidityError> {
    StressMatrix::from_stress_vector(g, w)
}

/// Max over vertices of the equilibrium defect `|sum_j w_ij (p_i - p_j)|`.
pub fn equilibrium_residual(f: &Framework, w: &StressVector) -> Result<f64, RigidityError> {
    if w.len() != f.graph().m() {
        return Err(RigidityError::StressLength {
            got: w.len(),
            expected: f.graph().m(),
        });
    }
    let d = f.d();
    let mut worst = 0.0f64;
    for i in 0..f.n() {
        let mut defect = DVector::<f64>::zeros(d);
        for (e, &(a, b)) in f.graph().edges().iter().enumerate() {
            let (s, t) = if a == i {
                (a, b)
            } else if b == i {
                (b, a)
            } else {
                continue;
            };
            let w_e = w.as_slice()[e];
            for k in 0..d {
                defect[k] += w_e * (f.coords()[(s, k)] - f.coords()[(t, k)]);
            }
        }
        worst = worst.max(defect.norm());
    }
    Ok(worst)
}

/// Equivalent matrix form of the equilibrium defect: max row norm of
/// `Omega . P`.
pub fn stress_matrix_residual(f: &Framework, omega: &StressMatrix) -> f64 {
    let prod = omega.matrix() * f.coords();
    (0..prod.nrows())
        .map(|i| prod.row(i).norm())
        .fold(0.0, f64::max)
}

/// Labeled congruence: all pairwise distances agree within
/// `rel_tol * max_distance`.
pub fn congruent(a: &Framework, b: &Framework, rel_tol: f64) -> bool {
    if a.n() != b.n() || a.d() != b.d() {
        return false;
    }
    let n = a.n();
    let mut scale = 0.0f64;
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            let da = (a.coords().row(i) - a.coords().row(j)).norm();
            let db = (b.coords().row(i) - b.coords().row(j)).norm();
            scale = scale.max(da).max(db);
            worst = worst.max((da - db).abs());
        }
    }
    worst <= rel_tol * scale.max(1e-300)
}

/// Affine renormalization to an isotropic pose: barycenter at the
/// origin, unit coordinate covariance.  Rigidity rank, equilibrium
/// stresses, PSD stress rank, general affine position, and the conic
/// condition are all affine-invariant, so this is a safe canonical form
/// for frameworks whose extraction (e.g. pinning) left them skewed.
pub fn whiten(f: &Framework) -> Result<Framework, RigidityError> {
    let d = f.d();
    let span = f.affine_span_dim();
    if span < d {
        return Err(RigidityError::DegenerateSpan { span, d });
    }
    let n = f.n();
    let mean = f.coords().row_mean();
    let mut centered = f.coords().clone();
    for i in 0..n {
        let row = centered.row(i) - &mean;
        centered.set_row(i, &row);
    }
    let covariance = centered.transpose() * &centered / n as f64;
    let eig = nalgebra::SymmetricEigen::new(covariance);
    let inv_sqrt = DMatrix::from_diagonal(&eig.eigenvalues.map(|v| 1.0 / v.max(1e-300).sqrt()));
    let map = &eig.eigenvectors * inv_sqrt * eig.eigenvectors.transpose();
    Framework::new(f.graph().clone(), d, centered * map)
}

/// Least-squares affine map taking the rows of `from` to the rows of
/// `to`; returns the `(d+1) x d` homogeneous coefficient matrix and the
/// fit residual relative to the target scale.
pub fn affine_fit(
    from: &DMatrix<f64>,
    to: &DMatrix<f64>,
) -> Result<(DMatrix<f64>, f64), RigidityError> {
    let n = from.nrows();
    let d_from = from.ncols();
    if to.nrows() != n {
        return Err(RigidityError::ShapeMismatch {
            rows: to.nrows(),
            cols: to.ncols(),
            n,
            d: d_from,
        });
    }
    let mut lifted = DMatrix::zeros(n, d_from + 1);
    lifted.view_mut((0, 0), (n, d_from)).copy_from(from);
    lifted.column_mut(d_from).fill(1.0);
    let pinv = lifted
        .clone()
        .svd(true, true)
        .pseudo_inverse(1e-12)
        .map_err(|_| NumError::NonFinite)?;
    let map = pinv * to;
    let residual = (&lifted * &map - to).norm() / to.norm().max(1.0);
    Ok((map, residual))
}

/// The two frameworks `(G, p + p')` and `(G, p - p')` produced by
/// averaging a flex, plus whether they are congruent (they are exactly
/// when the flex is trivial).
#[derive(Clone, Debug)]
pub struct FlexAverage {
    pub plus: Framework,
    pub minus: Framework,
    pub congruent: bool,
}

pub fn flex_average(f: &Framework, pprime: &DVector<f64>) -> Result<FlexAverage, RigidityError> {
    let span = f.affine_span_dim();
    if span < f.d() {
        return Err(RigidityError::DegenerateSpan { span, d: f.d() });
    }
    let residual = flex_residual(f, pprime)?;
    let scale = (1.0 + f.diameter()) * (1.0 + pprime.amax());
    let tol = 1e-8 * scale;
    if residual > tol {
        return Err(RigidityError::NotAFlex { residual, tol });
    }
    let plus = f.offset(pprime)?;
    let minus = f.offset(&(-pprime))?;
    let congruent = congruent(&plus, &minus, CONGRUENCE_TOL);
    Ok(FlexAverage {
        plus,
        minus,
        congruent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkernel::{sample_generic_stream, SampleConfig};

    fn generic_framework(g: &Graph, d: usize, seed: u64) -> Framework {
        let coords = sample_generic_stream(g.n(), d, &SampleConfig::new(seed), 0);
        Framework::new(g.clone(), d, coords).unwrap()
    }

    #[test]
    fn rigidity_matrix_single_edge_line() {
        let g = Graph::new(2, &[(0, 1)]).unwrap();
        let f = Framework::new(g, 1, DMatrix::from_row_slice(2, 1, &[0.0, 1.0])).unwrap();
        let r = rigidity_matrix(&f);
        assert_eq!(r.shape(), (1, 2));
        assert_eq!(r[(0, 0)], -1.0);
        assert_eq!(r[(0, 1)], 1.0);
    }

    #[test]
    fn rigidity_matrix_ranks() {
        let triangle = generic_framework(&Graph::complete(3), 2, 1);
        assert_eq!(
            numkernel::numerical_rank(&rigidity_matrix(&triangle), None)
                .unwrap()
                .rank,
            3
        );
        let k22 = generic_framework(&Graph::complete_bipartite(2, 2), 1, 2);
        assert_eq!(
            numkernel::numerical_rank(&rigidity_matrix(&k22), None)
                .unwrap()
                .rank,
            3
        );
    }

    #[test]
    fn infinitesimal_rigidity_examples() {
        let k4 = generic_framework(&Graph::complete(4), 2, 3);
        let check = is_infinitesimally_rigid(&k4).unwrap();
        assert!(check.rigid);
        assert_eq!(check.rank.rank, 5);

        let k33 = generic_framework(&Graph::complete_bipartite(3, 3), 2, 4);
        assert!(is_infinitesimally_rigid(&k33).unwrap().rigid);

        // Coincident edge endpoints zero out rows and drop the rank:
        // u1 = v1 and u2 = v2 kills the {u1,v1} and {u2,v2} rows, leaving
        // the two remaining constraints disconnected.
        let g = Graph::complete_bipartite(2, 2);
        let coords = DMatrix::from_row_slice(4, 1, &[0.5, 2.0, 0.5, 2.0]);
        let degenerate = Framework::new(g, 1, coords).unwrap();
        let check = is_infinitesimally_rigid(&degenerate).unwrap();
        assert!(!check.rigid);
        assert_eq!(check.rank.rank, 2);
    }

    #[test]
    fn trivial_flex_counts() {
        let two_points = Framework::new(
            Graph::new(2, &[(0, 1)]).unwrap(),
            1,
            DMatrix::from_row_slice(2, 1, &[0.0, 1.0]),
        )
        .unwrap();
        assert_eq!(trivial_flex_basis(&two_points).unwrap().dim(), 1);

        let triangle = generic_framework(&Graph::complete(3), 2, 5);
        let basis = trivial_flex_basis(&triangle).unwrap();
        assert_eq!(basis.dim(), 3);
        // Every trivial flex is in the kernel of R.
        let r = rigidity_matrix(&triangle);
        for k in 0..basis.dim() {
            assert!((&r * basis.column(k)).abs().max() < 1e-12 * (1.0 + r.abs().max()));
        }

        let k22 = generic_framework(&Graph::complete_bipartite(2, 2), 1, 6);
        assert_eq!(trivial_flex_basis(&k22).unwrap().dim(), 1);
    }

    #[test]
    fn trivial_flex_degenerate_span_errors() {
        // Three collinear points in the plane span only a line.
        let g = Graph::complete(3);
        let coords = DMatrix::from_row_slice(3, 2, &[0.0, 0.0, 1.0, 0.0, 2.0, 0.0]);
        let f = Framework::new(g, 2, coords).unwrap();
        assert!(matches!(
            trivial_flex_basis(&f),
            Err(RigidityError::DegenerateSpan { span: 1, d: 2 })
        ));
    }

    #[test]
    fn flex_space_dimensions() {
        let k4 = generic_framework(&Graph::complete(4), 2, 7);
        assert_eq!(flex_space(&k4).unwrap().dim(), 0);

        let path = generic_framework(&Graph::path(3), 2, 8);
        let flexes = flex_space(&path).unwrap();
        assert_eq!(flexes.dim(), 1);
        // It really is a flex, orthogonal to the trivial ones.
        assert!(flex_residual(&path, &flexes.column(0)).unwrap() < 1e-10);
    }

    #[test]
    fn flex_dimension_bookkeeping() {
        for (g, d, seed) in [
            (Graph::complete(4), 2, 10),
            (Graph::path(4), 2, 11),
            (Graph::cycle(5), 2, 12),
            (Graph::complete_bipartite(2, 2), 1, 13),
        ] {
            let f = generic_framework(&g, d, seed);
            let rank = numkernel::numerical_rank(&rigidity_matrix(&f), None)
                .unwrap()
                .rank;
            let trivial = trivial_flex_basis(&f).unwrap().dim();
            let nontrivial = flex_space(&f).unwrap().dim();
            assert_eq!(rank + trivial + nontrivial, f.n() * d);
        }
    }

    #[test]
    fn stress_basis_dimensions() {
        let triangle = generic_framework(&Graph::complete(3), 2, 20);
        assert_eq!(equilibrium_stress_basis(&triangle).unwrap().len(), 0);
        let k4 = generic_framework(&Graph::complete(4), 2, 21);
        assert_eq!(equilibrium_stress_basis(&k4).unwrap().len(), 1);
        let k22 = generic_framework(&Graph::complete_bipartite(2, 2), 1, 22);
        assert_eq!(equilibrium_stress_basis(&k22).unwrap().len(), 1);
    }

    #[test]
    fn stress_matrix_construction() {
        let g = Graph::new(2, &[(0, 1)]).unwrap();
        let m = StressMatrix::from_stress_vector(&g, &StressVector::new(vec![1.0])).unwrap();
        assert_eq!(
            m.matrix(),
            &DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0])
        );

        let k22 = Graph::complete_bipartite(2, 2);
        let zero = StressMatrix::from_stress_vector(&k22, &StressVector::zeros(4)).unwrap();
        assert_eq!(zero.matrix().abs().max(), 0.0);

        // Rank-1 limit stress: omega = 1 on edge {1, 3} only.
        let mut w = vec![0.0; 4];
        w[k22.edge_index(1, 3).unwrap()] = 1.0;
        let m = StressMatrix::from_stress_vector(&k22, &StressVector::new(w)).unwrap();
        assert_eq!(
            numkernel::numerical_rank(m.matrix(), None).unwrap().rank,
            1
        );
    }

    #[test]
    fn stress_vector_round_trip_is_exact() {
        let g = Graph::wheel(5);
        let values: Vec<f64> = (0..g.m()).map(|e| (e as f64) * 0.37 - 1.2).collect();
        let w = StressVector::new(values.clone());
        let m = StressMatrix::from_stress_vector(&g, &w).unwrap();
        assert_eq!(m.to_stress_vector().as_slice(), values.as_slice());
        // Row sums vanish to summation-order rounding.
        for i in 0..g.n() {
            let budget: f64 = m.matrix().row(i).iter().map(|v| v.abs()).sum();
            assert!(m.matrix().row(i).sum().abs() <= 4.0 * f64::EPSILON * budget);
        }
    }

    #[test]
    fn stress_matrix_validation_rejects_bad_pattern() {
        let g = Graph::complete_bipartite(2, 2);
        // Nonzero on the non-edge (0, 1).
        let mut bad = DMatrix::zeros(4, 4);
        bad[(0, 1)] = 1.0;
        bad[(1, 0)] = 1.0;
        bad[(0, 0)] = -1.0;
        bad[(1, 1)] = -1.0;
        assert!(matches!(
            StressMatrix::new(g, bad, 1e-10),
            Err(RigidityError::StressInvariant { .. })
        ));
    }

    #[test]
    fn equilibrium_residual_examples() {
        let g = Graph::path(3);
        let f = Framework::new(g.clone(), 1, DMatrix::from_row_slice(3, 1, &[0.0, 1.0, 2.0]))
            .unwrap();
        assert_eq!(
            equilibrium_residual(&f, &StressVector::zeros(2)).unwrap(),
            0.0
        );
        // omega = (1, 1): vertex 1 balances but vertex 0 does not.
        let res = equilibrium_residual(&f, &StressVector::new(vec![1.0, 1.0])).unwrap();
        assert!((res - 1.0).abs() < 1e-15);
    }

    #[test]
    fn basis_stresses_are_equilibria_and_forms_agree() {
        for (g, d, seed) in [
            (Graph::complete(4), 2, 30),
            (Graph::complete_bipartite(2, 2), 1, 31),
            (Graph::wheel(5), 2, 32),
        ] {
            let f = generic_framework(&g, d, seed);
            let r_norm = rigidity_matrix(&f).norm();
            for w in equilibrium_stress_basis(&f).unwrap() {
                let res = equilibrium_residual(&f, &w).unwrap();
                assert!(res <= 1e-10 * r_norm * w.norm().max(1.0));
                let m = stress_vector_to_matrix(&g, &w).unwrap();
                let matrix_res = stress_matrix_residual(&f, &m);
                assert!((res - matrix_res).abs() <= 1e-12 * (1.0 + res.max(matrix_res)));
            }
        }
    }

    #[test]
    fn rigidity_rank_is_affine_invariant() {
        let cfg = SampleConfig::new(40);
        for (g, d) in [
            (Graph::path(4), 2),
            (Graph::complete(4), 2),
            (Graph::cycle(5), 2),
        ] {
            let f = generic_framework(&g, d, 41);
            let base_rank = numkernel::numerical_rank(&rigidity_matrix(&f), None)
                .unwrap()
                .rank;
            for stream in 0..3 {
                let a = sample_generic_stream(d, d, &cfg, stream);
                if numkernel::numerical_rank(&a, None).unwrap().rank < d {
                    continue;
                }
                let b = sample_generic_stream(1, d, &cfg, stream + 100);
                let mut coords = f.coords() * &a;
                for i in 0..coords.nrows() {
                    let shifted = coords.row(i) + b.row(0);
                    coords.set_row(i, &shifted);
                }
                let mapped = Framework::new(g.clone(), d, coords).unwrap();
                let rank = numkernel::numerical_rank(&rigidity_matrix(&mapped), None)
                    .unwrap()
                    .rank;
                assert_eq!(rank, base_rank);
            }
        }
    }

    #[test]
    fn flex_average_trivial_is_congruent() {
        let f = generic_framework(&Graph::complete(4), 2, 50);
        let trivial = trivial_flex_basis(&f).unwrap();
        let result = flex_average(&f, &trivial.column(0)).unwrap();
        assert!(result.congruent);
        // A rotation generator is also trivial.
        let result = flex_average(&f, &trivial.column(2)).unwrap();
        assert!(result.congruent);
    }

    #[test]
    fn flex_average_nontrivial_preserves_lengths_only() {
        let f = generic_framework(&Graph::path(3), 2, 51);
        let flexes = flex_space(&f).unwrap();
        assert_eq!(flexes.dim(), 1);
        let result = flex_average(&f, &flexes.column(0)).unwrap();
        let lp = result.plus.edge_lengths();
        let lm = result.minus.edge_lengths();
        for (a, b) in lp.iter().zip(&lm) {
            assert!((a - b).abs() <= 1e-9 * a.max(*b));
        }
        assert!(!result.congruent);
    }

    #[test]
    fn flex_average_zero_flex_returns_input() {
        let f = generic_framework(&Graph::complete(4), 2, 52);
        let zero = DVector::zeros(8);
        let result = flex_average(&f, &zero).unwrap();
        assert_eq!(result.plus.coords(), f.coords());
        assert_eq!(result.minus.coords(), f.coords());
        assert!(result.congruent);
    }

    #[test]
    fn flex_average_rejects_non_flex() {
        let f = generic_framework(&Graph::complete(4), 2, 53);
        let not_a_flex = DVector::from_fn(8, |i, _| (i as f64 + 1.0) * 0.3);
        assert!(matches!(
            flex_average(&f, &not_a_flex),
            Err(RigidityError::NotAFlex { .. })
        ));
    }

    #[test]
    fn framework_json_round_trip() {
        let f = generic_framework(&Graph::complete(4), 2, 60);
        let json = FrameworkJson::from(&f);
        let s = serde_json::to_string(&json).unwrap();
        let back: FrameworkJson = serde_json::from_str(&s).unwrap();
        let g = Framework::from_json(f.graph().clone(), &back).unwrap();
        assert_eq!(g.coords(), f.coords());
    }
}
