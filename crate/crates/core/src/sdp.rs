//! Desk-scale probe for the graph realization semidefinite program.
//!
//! The feasibility problem asks for a PSD Gram matrix `X` with
//! `X_ii + X_jj - 2X_ij = l_ij` on every edge.  We add the centering
//! gauge `X 1 = 0`, which turns "congruent configurations" into "equal
//! Gram matrices", and alternate Frobenius projections between the
//! affine edge set and the centered PSD cone.  The objective is
//! identically zero, so a feasibility method is the whole solver; it
//! also behaves sensibly when the feasible set is a single point (the
//! universally rigid case), where interior-point barriers are ill-posed.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Graph, GraphError};
use crate::numkernel::{self, NumError, SampleConfig};
use crate::rigidity::{Framework, RigidityError};

#[derive(Debug, Error)]
pub enum SdpError {
    #[error("edge ({0}, {1}) has zero length")]
    ZeroLengthEdge(usize, usize),
    #[error("edge ({0}, {1}) has non-positive squared length {2}")]
    NonPositiveLength(usize, usize, f64),
    #[error("got {got} squared lengths, expected one per edge ({expected})")]
    LengthCount { expected: usize, got: usize },
    #[error("length map key {0:?} does not name an edge of the graph")]
    UnknownEdge(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Rigidity(#[from] RigidityError),
    #[error(transparent)]
    Num(#[from] NumError),
}

/// Eigenvalue cutoff (relative to the largest) for reporting the rank of
/// a converged Gram matrix; looser than machine precision because the
/// iterates only reach the feasibility tolerance.
pub const GRAM_RANK_TOL: f64 = 1e-6;

/// Frobenius agreement threshold between converged Grams (normalized
/// units) used by the vote.
pub const GRAM_AGREE_TOL: f64 = 1e-6;

/// Threshold for `matches_input` against the source Gram.
const GRAM_MATCH_TOL: f64 = 1e-5;

/// A graph realization instance: squared edge lengths in the
/// lexicographic edge order, plus the source framework when the instance
/// was measured from one.
#[derive(Clone, Debug)]
pub struct RealizationInstance {
    graph: Graph,
    d: usize,
    lengths_sq: Vec<f64>,
    source: Option<Framework>,
}

/// Serialized shape: graph, dimension, edge-keyed squared lengths.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InstanceJson {
    pub graph: Graph,
    pub d: usize,
    pub lengths_sq: BTreeMap<String, f64>,
}

impl RealizationInstance {
    pub fn new(graph: Graph, d: usize, lengths_sq: Vec<f64>) -> Result<Self, SdpError> {
        if lengths_sq.len() != graph.m() {
            return Err(SdpError::LengthCount {
                expected: graph.m(),
                got: lengths_sq.len(),
            });
        }
        for (e, &(i, j)) in graph.edges().iter().enumerate() {
            if !(lengths_sq[e] > 0.0) {
                return Err(SdpError::NonPositiveLength(i, j, lengths_sq[e]));
            }
        }
        Ok(RealizationInstance {
            graph,
            d,
            lengths_sq,
            source: None,
        })
    }

    /// Measures `l_ij = |p_i - p_j|^2` and records the framework as the
    /// instance's provenance.
    pub fn from_framework(f: &Framework) -> Result<Self, SdpError> {
        let mut lengths = Vec::with_capacity(f.graph().m());
        for &(i, j) in f.graph().edges() {
            let l = (f.point(i) - f.point(j)).norm_squared();
            if l == 0.0 {
                return Err(SdpError::ZeroLengthEdge(i, j));
            }
            lengths.push(l);
        }
        Ok(RealizationInstance {
            graph: f.graph().clone(),
            d: f.d(),
            lengths_sq: lengths,
            source: Some(f.clone()),
        })
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn lengths_sq(&self) -> &[f64] {
        &self.lengths_sq
    }

    pub fn source(&self) -> Option<&Framework> {
        self.source.as_ref()
    }

    pub fn to_json(&self) -> InstanceJson {
        let mut lengths = BTreeMap::new();
        for (e, &(i, j)) in self.graph.edges().iter().enumerate() {
            lengths.insert(format!("{i}-{j}"), self.lengths_sq[e]);
        }
        InstanceJson {
            graph: self.graph.clone(),
            d: self.d,
            lengths_sq: lengths,
        }
    }

    pub fn from_json(json: &InstanceJson) -> Result<Self, SdpError> {
        let mut lengths = vec![0.0; json.graph.m()];
        if json.lengths_sq.len() != json.graph.m() {
            return Err(SdpError::LengthCount {
                expected: json.graph.m(),
                got: json.lengths_sq.len(),
            });
        }
        for (key, &value) in &json.lengths_sq {
            let parts: Vec<&str> = key.split('-').collect();
            let edge = (|| {
                let [a, b] = parts.as_slice() else { return None };
                let (a, b) = (a.parse().ok()?, b.parse().ok()?);
                json.graph.edge_index(a, b)
            })()
            .ok_or_else(|| SdpError::UnknownEdge(key.clone()))?;
            lengths[edge] = value;
        }
        RealizationInstance::new(json.graph.clone(), json.d, lengths)
    }
}

/// Gram matrix of the framework after translating its barycenter to the
/// origin; two congruent frameworks have the same centered Gram.
pub fn centered_gram(f: &Framework) -> DMatrix<f64> {
    let n = f.n();
    let mean = f.coords().row_mean();
    let mut centered = f.coords().clone();
    for i in 0..n {
        let row = centered.row(i) - &mean;
        centered.set_row(i, &row);
    }
    &centered * centered.transpose()
}

/// One alternating-projection run.
#[derive(Clone, Debug)]
pub struct SdpProbeResult {
    /// Feasible Gram in the instance's original length units; PSD and
    /// centered exactly, edge constraints within tolerance.
    pub feasible_gram: DMatrix<f64>,
    pub gram_rank: usize,
    /// Against the source's centered Gram, when provenance exists.
    pub matches_input: Option<bool>,
    pub converged: bool,
    pub iterations: usize,
    /// Worst negative eigenvalue seen on the affine-side iterate at exit
    /// (normalized units).
    pub psd_violation: f64,
    /// Worst edge-constraint defect of the returned Gram (normalized
    /// units).
    pub affine_violation: f64,
    /// RNG stream that produced the starting point (0 = warm start).
    pub stream: u64,
}

/// Orthonormal basis of the hyperplane `1^perp` (Helmert columns).
fn centering_basis(n: usize) -> DMatrix<f64> {
    let mut q = DMatrix::zeros(n, n - 1);
    for k in 1..n {
        let scale = 1.0 / ((k * (k + 1)) as f64).sqrt();
        for i in 0..k {
            q[(i, k - 1)] = scale;
        }
        q[(k, k - 1)] = -(k as f64) * scale;
    }
    q
}

struct SvecIndex {
    n: usize,
}

impl SvecIndex {
    fn len(&self) -> usize {
        self.n * (self.n + 1) / 2
    }

    fn at(&self, i: usize, j: usize) -> usize {
        let (i, j) = (i.min(j), i.max(j));
        i * (2 * self.n - i + 1) / 2 + (j - i)
    }

    fn pack(&self, m: &DMatrix<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.len());
        let mut k = 0;
        for i in 0..self.n {
            for j in i..self.n {
                out[k] = if i == j {
                    m[(i, i)]
                } else {
                    std::f64::consts::SQRT_2 * m[(i, j)]
                };
                k += 1;
            }
        }
        out
    }

    fn unpack(&self, v: &DVector<f64>) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.n, self.n);
        let mut k = 0;
        for i in 0..self.n {
            for j in i..self.n {
                if i == j {
                    out[(i, i)] = v[k];
                } else {
                    let x = v[k] / std::f64::consts::SQRT_2;
                    out[(i, j)] = x;
                    out[(j, i)] = x;
                }
                k += 1;
            }
        }
        out
    }
}

struct Projector {
    svec: SvecIndex,
    /// Edge-constraint matrix in svec coordinates and its pseudo-inverse.
    constraints: DMatrix<f64>,
    pinv: DMatrix<f64>,
    rhs: DVector<f64>,
    q: DMatrix<f64>,
    edges: Vec<(usize, usize)>,
    lengths: Vec<f64>,
}

impl Projector {
    fn new(graph: &Graph, normalized_lengths: &[f64]) -> Result<Self, SdpError> {
        let n = graph.n();
        let svec = SvecIndex { n };
        let m = graph.m();
        let mut constraints = DMatrix::<f64>::zeros(m, svec.len());
        for (e, &(i, j)) in graph.edges().iter().enumerate() {
            constraints[(e, svec.at(i, i))] += 1.0;
            constraints[(e, svec.at(j, j))] += 1.0;
            constraints[(e, svec.at(i, j))] -= std::f64::consts::SQRT_2;
        }
        let pinv = constraints
            .clone()
            .svd(true, true)
            .pseudo_inverse(1e-12)
            .map_err(|_| NumError::NonFinite)?;
        Ok(Projector {
            svec,
            constraints,
            pinv,
            rhs: DVector::from_column_slice(normalized_lengths),
            q: centering_basis(n),
            edges: graph.edges().to_vec(),
            lengths: normalized_lengths.to_vec(),
        })
    }

    /// Frobenius projection onto the affine edge set.
    fn project_affine(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        let packed = self.svec.pack(x);
        let defect = &self.rhs - &self.constraints * &packed;
        self.svec.unpack(&(packed + &self.pinv * defect))
    }

    /// Frobenius projection onto `{X PSD, X 1 = 0}`; also reports the
    /// most negative eigenvalue of the centered block before clipping.
    fn project_psd_centered(&self, x: &DMatrix<f64>) -> (DMatrix<f64>, f64) {
        let reduced = self.q.transpose() * x * &self.q;
        let eig = nalgebra::SymmetricEigen::new(reduced);
        let min_eig = eig.eigenvalues.min();
        let clipped = DVector::from_iterator(
            eig.eigenvalues.len(),
            eig.eigenvalues.iter().map(|&v| v.max(0.0)),
        );
        let core = &eig.eigenvectors * DMatrix::from_diagonal(&clipped) * eig.eigenvectors.transpose();
        (&self.q * core * self.q.transpose(), min_eig)
    }

    fn affine_violation(&self, x: &DMatrix<f64>) -> f64 {
        self.edges
            .iter()
            .zip(&self.lengths)
            .map(|(&(i, j), &l)| (x[(i, i)] + x[(j, j)] - 2.0 * x[(i, j)] - l).abs())
            .fold(0.0, f64::max)
    }
}

const SDP_SALT: u64 = 0x5d9;

/// Alternating-projection feasibility probe from a seeded random start
/// (stream selects the start among independent runs of the same seed).
pub fn probe_feasible_point(
    inst: &RealizationInstance,
    cfg: &SampleConfig,
    max_iter: usize,
    tol: f64,
) -> Result<SdpProbeResult, SdpError> {
    probe_stream(inst, cfg, 1, max_iter, tol)
}

pub fn probe_stream(
    inst: &RealizationInstance,
    cfg: &SampleConfig,
    stream: u64,
    max_iter: usize,
    tol: f64,
) -> Result<SdpProbeResult, SdpError> {
    let n = inst.graph.n();
    let mut rng = cfg.derive(SDP_SALT).rng(stream);
    let mut start = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v: f64 = rand::Rng::sample(&mut rng, StandardNormal);
            start[(i, j)] = v;
            start[(j, i)] = v;
        }
    }
    run_projections(inst, start, stream, max_iter, tol)
}

/// Same probe from an explicit starting Gram (original length units).
pub fn probe_with_start(
    inst: &RealizationInstance,
    start: &DMatrix<f64>,
    max_iter: usize,
    tol: f64,
) -> Result<SdpProbeResult, SdpError> {
    let scale = scale_of(inst);
    run_projections(inst, start / scale, 0, max_iter, tol)
}

fn scale_of(inst: &RealizationInstance) -> f64 {
    inst.lengths_sq.iter().fold(0.0f64, |a, &v| a.max(v)).max(1e-300)
}

fn run_projections(
    inst: &RealizationInstance,
    start_normalized: DMatrix<f64>,
    stream: u64,
    max_iter: usize,
    tol: f64,
) -> Result<SdpProbeResult, SdpError> {
    let scale = scale_of(inst);
    let normalized: Vec<f64> = inst.lengths_sq.iter().map(|l| l / scale).collect();
    let projector = Projector::new(&inst.graph, &normalized)?;

    // Reflect-reflect-average between the two sets; plain alternation
    // stalls badly near tangentially touching instances, the averaged
    // reflections built from the same projectors do not.
    let (mut z, _) = projector.project_psd_centered(&start_normalized);
    let mut x = z.clone();
    let mut psd_violation = f64::INFINITY;
    let mut affine_violation = f64::INFINITY;
    let mut converged = false;
    let mut iterations = 0;
    for iter in 1..=max_iter {
        iterations = iter;
        let pa = projector.project_affine(&z);
        let (pb, _) = projector.project_psd_centered(&(&pa * 2.0 - &z));
        z += pb - &pa;
        if iter <= 64 || iter % 16 == 0 || iter == max_iter {
            let y = projector.project_affine(&z);
            let (candidate, min_eig) = projector.project_psd_centered(&y);
            psd_violation = (-min_eig).max(0.0);
            affine_violation = projector.affine_violation(&candidate);
            x = candidate;
            if psd_violation <= tol && affine_violation <= tol {
                converged = true;
                break;
            }
        }
    }

    let (values, _) = numkernel::symmetric_eigen(&x)?;
    let max_eig = values.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
    let gram_rank = values
        .iter()
        .filter(|&&v| v > GRAM_RANK_TOL * max_eig.max(1e-300))
        .count();
    let matches_input = inst.source.as_ref().map(|src| {
        let target = centered_gram(src) / scale;
        (&x - target).norm() <= GRAM_MATCH_TOL * (1.0 + inst.graph.n() as f64)
    });
    Ok(SdpProbeResult {
        feasible_gram: &x * scale,
        gram_rank,
        matches_input,
        converged,
        iterations,
        psd_violation,
        affine_violation,
        stream,
    })
}

/// Aggregate verdict over independent probe runs.
#[derive(Clone, Debug)]
pub struct VoteReport {
    /// All runs converged, all Grams agree pairwise, and (when the
    /// source is known) all match it.  One-sided: disagreement proves
    /// the SDP admits non-congruent solutions; unanimity is evidence of
    /// success, not proof.
    pub success: bool,
    pub all_converged: bool,
    /// Largest pairwise Frobenius gap between converged Grams
    /// (normalized units).
    pub max_pairwise_gap: f64,
    pub matches_source: Option<bool>,
    pub evidence: Vec<SdpProbeResult>,
}

pub const VOTE_MAX_ITER: usize = 100_000;
pub const VOTE_TOL: f64 = 1e-9;

/// Runs `runs` probes with independent seeded starts.  When the instance
/// has provenance, the first run is warm-started from a rank-boosting
/// perturbation of the source Gram to actively hunt for alternative
/// realizations.
pub fn sdp_success_vote(
    inst: &RealizationInstance,
    runs: usize,
    cfg: &SampleConfig,
) -> Result<VoteReport, SdpError> {
    let mut evidence = Vec::with_capacity(runs);
    let mut next_stream = 1u64;
    if let (Some(source), true) = (&inst.source, runs > 0) {
        let scale = scale_of(inst);
        let src = centered_gram(source);
        let n = inst.graph.n();
        let q = centering_basis(n);
        let mut rng = cfg.derive(SDP_SALT).rng(0);
        let w = DVector::<f64>::from_iterator(
            n - 1,
            (0..n - 1).map(|_| rand::Rng::sample(&mut rng, StandardNormal)),
        );
        let bump = &q * &w * w.transpose() * q.transpose();
        let start = src + bump * (0.5 * scale);
        evidence.push(probe_with_start(inst, &start, VOTE_MAX_ITER, VOTE_TOL)?);
    }
    while evidence.len() < runs {
        evidence.push(probe_stream(inst, cfg, next_stream, VOTE_MAX_ITER, VOTE_TOL)?);
        next_stream += 1;
    }

    let scale = scale_of(inst);
    let all_converged = evidence.iter().all(|r| r.converged);
    let mut max_gap = 0.0f64;
    for a in 0..evidence.len() {
        for b in (a + 1)..evidence.len() {
            let gap =
                (&evidence[a].feasible_gram - &evidence[b].feasible_gram).norm() / scale;
            max_gap = max_gap.max(gap);
        }
    }
    let matches_source = if inst.source.is_some() {
        Some(evidence.iter().all(|r| r.matches_input == Some(true)))
    } else {
        None
    };
    let success =
        all_converged && max_gap <= GRAM_AGREE_TOL && matches_source.unwrap_or(true);
    Ok(VoteReport {
        success,
        all_converged,
        max_pairwise_gap: max_gap,
        matches_source,
        evidence,
    })
}
