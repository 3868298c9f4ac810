//! The certificate pipeline: search for a framework that is both
//! infinitesimally rigid and super stable.
//!
//! Each attempt builds a fresh orthogonal representation, converts it to
//! a PSD stress of rank `n-d-1`, extracts the kernel framework, and tests
//! infinitesimal rigidity.  For a generically globally rigid graph a
//! positive fraction of attempts succeeds; when the graph is merely
//! `(d+1)`-connected, every kernel framework comes back infinitesimally
//! flexible and the attempt log is returned as (non-proof) evidence.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::Graph;
use crate::gor::{self, GorError};
use crate::lss::{self, LssError};
use crate::numkernel::{NumError, RankReport, SampleConfig};
use crate::rigidity::{
    self, equilibrium_stress_basis, stress_matrix_residual, stress_vector_to_matrix,
    FlexAverage, Framework, FrameworkJson, RigidityError, StressMatrix, StressVector,
};
use crate::superstable::{
    certify_super_stable, kernel_framework_default, KernelError, SuperStabilityReport,
};
use crate::EQUILIBRIUM_TOL;

#[derive(Debug, Error)]
pub enum CertifyError {
    #[error("graph is {connectivity}-connected, a certificate needs {required}")]
    NotConnectedEnough {
        connectivity: usize,
        required: usize,
    },
    #[error("need n >= d + 2 vertices, got n = {n} with d = {d}")]
    TooFewVertices { n: usize, d: usize },
    #[error(
        "no infinitesimally rigid kernel framework in {attempts} attempts \
         (evidence of non-GGR, not a proof)"
    )]
    NoRigidKernelFound {
        attempts: usize,
        diagnostics: Vec<AttemptDiagnostic>,
    },
    #[error("certificate bundle failed re-verification: {0}")]
    Invalid(String),
    #[error(transparent)]
    Gor(#[from] GorError),
    #[error(transparent)]
    Lss(#[from] LssError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Rigidity(#[from] RigidityError),
    #[error(transparent)]
    Num(#[from] NumError),
    #[error("serialization: {0}")]
    Json(String),
}

/// Outcome of one failed pipeline attempt.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AttemptDiagnostic {
    pub attempt: usize,
    pub rigidity_rank: usize,
    pub target_rank: usize,
    /// Dimension of the non-trivial flex space of the kernel framework.
    pub flex_dim: usize,
}

/// A generic-global-rigidity certificate: a framework of `G` in `R^d`
/// that is infinitesimally rigid together with a PSD equilibrium stress
/// matrix of rank `n-d-1`.
#[derive(Clone, Debug)]
pub struct GgrCertificate {
    pub framework: Framework,
    pub stress: StressMatrix,
    pub infinitesimal_rank: RankReport,
    pub stability: SuperStabilityReport,
    pub attempts_used: usize,
    pub seed: u64,
}

const ATTEMPT_SALT: u64 = 0xCE27;

/// Runs the pipeline until a kernel framework is infinitesimally rigid,
/// then assembles and verifies the certificate.  Deterministic in
/// `(g, d, cfg.seed, max_attempts)`.
pub fn find_certificate(
    g: &Graph,
    d: usize,
    cfg: &SampleConfig,
    max_attempts: usize,
) -> Result<GgrCertificate, CertifyError> {
    if g.n() < d + 2 {
        return Err(CertifyError::TooFewVertices { n: g.n(), d });
    }
    let connectivity = g.vertex_connectivity();
    if connectivity < d + 1 {
        return Err(CertifyError::NotConnectedEnough {
            connectivity,
            required: d + 1,
        });
    }
    let mut diagnostics = Vec::new();
    for attempt in 0..max_attempts {
        let attempt_cfg = cfg.derive(ATTEMPT_SALT ^ (attempt as u64) << 8);
        let rep = gor::build_gor(g, d, &attempt_cfg, 32)?;
        let phi = lss::find_centering_map(&rep, &attempt_cfg, 64)?;
        let stress = lss::lss_stress_matrix(&rep, &phi)?;
        // The pinned extraction can come back arbitrarily skewed; move to
        // an isotropic pose (all certificate predicates are
        // affine-invariant, the stress matrix stays the same).
        let framework = rigidity::whiten(&kernel_framework_default(&stress.omega, d)?)?;
        let check = rigidity::is_infinitesimally_rigid(&framework)?;
        if !check.rigid {
            let flex_dim = rigidity::flex_space(&framework)?.dim();
            diagnostics.push(AttemptDiagnostic {
                attempt,
                rigidity_rank: check.rank.rank,
                target_rank: check.target_rank,
                flex_dim,
            });
            continue;
        }
        // Success region is full-dimensional, so resample rather than
        // keep a draw with nearly coincident vertices; downstream
        // numerics (perturbation probes, the realization SDP) degrade
        // badly on such instances.
        if framework.min_pairwise_distance() < 0.05 * framework.diameter() {
            diagnostics.push(AttemptDiagnostic {
                attempt,
                rigidity_rank: check.rank.rank,
                target_rank: check.target_rank,
                flex_dim: 0,
            });
            continue;
        }
        let stability = certify_super_stable(&framework, &stress.omega, None)?;
        if !stability.verdict {
            // Numerically marginal; treat like a failed attempt.
            diagnostics.push(AttemptDiagnostic {
                attempt,
                rigidity_rank: check.rank.rank,
                target_rank: check.target_rank,
                flex_dim: 0,
            });
            continue;
        }
        return Ok(GgrCertificate {
            framework,
            stress: stress.omega,
            infinitesimal_rank: check.rank,
            stability,
            attempts_used: attempt + 1,
            seed: cfg.seed,
        });
    }
    Err(CertifyError::NoRigidKernelFound {
        attempts: max_attempts,
        diagnostics,
    })
}

/// Serialized certificate bundle: everything needed to re-verify from
/// scratch.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CertificateBundle {
    pub graph: Graph,
    pub framework: FrameworkJson,
    /// Dense stress matrix with rank/eigenvalue metadata.
    pub stress: StressMatrixJson,
    pub infinitesimal_rank: RankReport,
    pub stability: SuperStabilityReport,
    pub attempts_used: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StressMatrixJson {
    pub omega: Vec<Vec<f64>>,
    pub rank: usize,
    pub eigenvalues: Vec<f64>,
    pub tol: f64,
}

impl StressMatrixJson {
    pub fn from_stress(omega: &StressMatrix, rank: usize, eigenvalues: &[f64], tol: f64) -> Self {
        StressMatrixJson {
            omega: (0..omega.n())
                .map(|i| omega.matrix().row(i).iter().copied().collect())
                .collect(),
            rank,
            eigenvalues: eigenvalues.to_vec(),
            tol,
        }
    }

    pub fn to_stress(&self, graph: Graph, tol: f64) -> Result<StressMatrix, RigidityError> {
        let n = self.omega.len();
        let flat: Vec<f64> = self.omega.iter().flatten().copied().collect();
        StressMatrix::new(
            graph,
            nalgebra::DMatrix::from_row_slice(n, n, &flat),
            tol,
        )
    }
}

impl GgrCertificate {
    pub fn to_bundle(&self) -> CertificateBundle {
        let want_rank = self.framework.n() - self.framework.d() - 1;
        CertificateBundle {
            graph: self.framework.graph().clone(),
            framework: FrameworkJson::from(&self.framework),
            stress: StressMatrixJson::from_stress(
                &self.stress,
                want_rank,
                &self.stability.eigenvalues,
                1e-9,
            ),
            infinitesimal_rank: self.infinitesimal_rank.clone(),
            stability: self.stability.clone(),
            attempts_used: self.attempts_used,
            seed: self.seed,
        }
    }

    pub fn to_json(&self) -> Result<String, CertifyError> {
        serde_json::to_string_pretty(&self.to_bundle())
            .map_err(|e| CertifyError::Json(e.to_string()))
    }
}

/// Re-verifies a serialized certificate from its data alone: rank of the
/// rigidity matrix, equilibrium residual, and the full super-stability
/// test are all recomputed.  Nothing from construction time is trusted.
pub fn verify_bundle(bundle: &CertificateBundle) -> Result<GgrCertificate, CertifyError> {
    let framework = Framework::from_json(bundle.graph.clone(), &bundle.framework)?;
    let stress = bundle
        .stress
        .to_stress(bundle.graph.clone(), crate::ZERO_PATTERN_TOL)?;
    let check = rigidity::is_infinitesimally_rigid(&framework)?;
    if !check.rigid {
        return Err(CertifyError::Invalid(format!(
            "rigidity rank {} != {}",
            check.rank.rank, check.target_rank
        )));
    }
    let residual = stress_matrix_residual(&framework, &stress);
    let gate = 10.0 * EQUILIBRIUM_TOL * stress.matrix().norm() * framework.coords().norm().max(1.0);
    if residual > gate {
        return Err(CertifyError::Invalid(format!(
            "equilibrium residual {residual:.3e} exceeds {gate:.3e}"
        )));
    }
    let stability = certify_super_stable(&framework, &stress, None)?;
    if !stability.verdict {
        return Err(CertifyError::Invalid(
            "super-stability verdict is false".to_string(),
        ));
    }
    Ok(GgrCertificate {
        framework,
        stress,
        infinitesimal_rank: check.rank,
        stability,
        attempts_used: bundle.attempts_used,
        seed: bundle.seed,
    })
}

pub fn verify_json(json: &str) -> Result<GgrCertificate, CertifyError> {
    let bundle: CertificateBundle =
        serde_json::from_str(json).map_err(|e| CertifyError::Json(e.to_string()))?;
    verify_bundle(&bundle)
}

/// Per-trial outcome of the robustness probe.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RobustnessReport {
    pub trials: usize,
    pub passed: usize,
    pub fraction: f64,
    pub radius: f64,
    /// Indices of failing trials, if any.
    pub failures: Vec<usize>,
}

const ROBUSTNESS_SALT: u64 = 0x90B5;

/// Perturbs the certificate framework `trials` times by offsets of
/// magnitude at most `radius`, recomputes a nearby equilibrium stress
/// for each perturbation (projection of the certified stress onto the
/// perturbed stress space), and re-runs both certificate checks.
pub fn robustness_probe(
    cert: &GgrCertificate,
    radius: f64,
    trials: usize,
    cfg: &SampleConfig,
) -> RobustnessReport {
    let nd = cert.framework.n() * cert.framework.d();
    let omega0 = cert.stress.to_stress_vector();
    let sample_cfg = cfg.derive(ROBUSTNESS_SALT);
    let mut passed = 0;
    let mut failures = Vec::new();
    for trial in 0..trials {
        let mut rng = sample_cfg.rng(trial as u64);
        let mut offset = DVector::<f64>::zeros(nd);
        for k in 0..nd {
            offset[k] = rand::Rng::sample(&mut rng, rand_distr::StandardNormal);
        }
        let norm = offset.norm().max(1e-300);
        let magnitude: f64 = rand::Rng::random_range(&mut rng, 0.0..=1.0);
        offset *= radius * magnitude / norm;
        if trial_passes(cert, &omega0, &offset) {
            passed += 1;
        } else {
            failures.push(trial);
        }
    }
    RobustnessReport {
        trials,
        passed,
        fraction: if trials == 0 {
            1.0
        } else {
            passed as f64 / trials as f64
        },
        radius,
        failures,
    }
}

fn trial_passes(cert: &GgrCertificate, omega0: &StressVector, offset: &DVector<f64>) -> bool {
    let Ok(perturbed) = cert.framework.offset(offset) else {
        return false;
    };
    let Ok(check) = rigidity::is_infinitesimally_rigid(&perturbed) else {
        return false;
    };
    if !check.rigid {
        return false;
    }
    // Nearest equilibrium stress of the perturbed framework.
    let Ok(basis) = equilibrium_stress_basis(&perturbed) else {
        return false;
    };
    if basis.is_empty() {
        return false;
    }
    let mut projected = vec![0.0; omega0.len()];
    for b in &basis {
        let coef = b.dot(omega0);
        for (acc, v) in projected.iter_mut().zip(b.as_slice()) {
            *acc += coef * v;
        }
    }
    let Ok(omega) = stress_vector_to_matrix(perturbed.graph(), &StressVector::new(projected))
    else {
        return false;
    };
    match certify_super_stable(&perturbed, &omega, None) {
        Ok(report) => report.verdict,
        Err(_) => false,
    }
}

/// A pair of equal-edge-length, non-congruent frameworks constructed by
/// averaging a non-trivial flex; a witness that `p + eps p'` is not
/// globally rigid.
#[derive(Clone, Debug)]
pub struct FlexWitness {
    pub plus: Framework,
    pub minus: Framework,
    pub flex_dim: usize,
    pub epsilon: f64,
}

/// Returns a flex-averaged witness pair when `f` has a non-trivial
/// infinitesimal flex, `None` when `f` is infinitesimally rigid.
pub fn flexibility_witness(f: &Framework) -> Result<Option<FlexWitness>, CertifyError> {
    let flexes = rigidity::flex_space(f)?;
    if flexes.dim() == 0 {
        return Ok(None);
    }
    let direction = flexes.column(0);
    let epsilon = 1e-2 * f.diameter() / direction.amax().max(1e-300);
    let FlexAverage { plus, minus, .. } = rigidity::flex_average(f, &(direction * epsilon))?;
    Ok(Some(FlexWitness {
        plus,
        minus,
        flex_dim: flexes.dim(),
        epsilon,
    }))
}
