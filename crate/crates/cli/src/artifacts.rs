//! Serialized output shapes.  Field order is fixed and every map is a
//! `BTreeMap`, so identical command + seed re-runs produce byte-identical
//! artifacts.

use std::collections::BTreeMap;

use serde::Serialize;

use rigidcert_core::certify::{AttemptDiagnostic, CertificateBundle, StressMatrixJson};
use rigidcert_core::gor::{DimensionAudit, GorValidation, OrthogonalRepJson};
use rigidcert_core::rigidity::FrameworkJson;
use rigidcert_core::sdp::{RealizationInstance, VoteReport};
use rigidcert_core::superstable::SuperStabilityReport;
use rigidcert_core::Graph;

#[derive(Serialize)]
pub struct ConnectivityArtifact {
    pub command: &'static str,
    pub seed: u64,
    pub tol: f64,
    pub n: usize,
    pub m: usize,
    pub connectivity: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub is_d_plus_1_connected: Option<bool>,
}

#[derive(Serialize)]
pub struct GorArtifact {
    pub command: &'static str,
    pub seed: u64,
    pub tol: f64,
    pub graph: Graph,
    pub rep: OrthogonalRepJson,
    pub validation: GorValidation,
}

#[derive(Serialize)]
pub struct StressArtifact {
    pub command: &'static str,
    pub seed: u64,
    pub tol: f64,
    pub graph: Graph,
    pub rep: OrthogonalRepJson,
    pub centering: Vec<f64>,
    pub stress: StressMatrixJson,
}

#[derive(Serialize)]
pub struct KernelArtifact {
    pub command: &'static str,
    pub seed: u64,
    pub tol: f64,
    pub graph: Graph,
    pub framework: FrameworkJson,
    pub stress: StressMatrixJson,
    pub stability: SuperStabilityReport,
}

#[derive(Serialize)]
pub struct CertifyArtifact {
    pub command: &'static str,
    pub seed: u64,
    pub tol: f64,
    pub status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<CertificateBundle>,
    pub attempts: usize,
    pub diagnostics: Vec<AttemptDiagnostic>,
}

#[derive(Serialize)]
pub struct AuditArtifact {
    pub command: &'static str,
    pub seed: u64,
    pub tol: f64,
    pub d_g: DimensionAudit,
    pub d_l: DimensionAudit,
    pub agrees: bool,
}

#[derive(Serialize)]
pub struct SdpRunArtifact {
    pub stream: u64,
    pub converged: bool,
    pub iterations: usize,
    pub gram_rank: usize,
    pub psd_violation: f64,
    pub affine_violation: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matches_input: Option<bool>,
}

#[derive(Serialize)]
pub struct SdpArtifact {
    pub command: &'static str,
    pub seed: u64,
    pub tol: f64,
    pub graph: Graph,
    pub d: usize,
    pub lengths_sq: BTreeMap<String, f64>,
    pub success: bool,
    pub all_converged: bool,
    pub max_pairwise_gap: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matches_source: Option<bool>,
    pub runs: Vec<SdpRunArtifact>,
}

impl SdpArtifact {
    pub fn build(
        command: &'static str,
        seed: u64,
        tol: f64,
        inst: &RealizationInstance,
        vote: &VoteReport,
    ) -> Self {
        let json = inst.to_json();
        SdpArtifact {
            command,
            seed,
            tol,
            graph: json.graph,
            d: json.d,
            lengths_sq: json.lengths_sq,
            success: vote.success,
            all_converged: vote.all_converged,
            max_pairwise_gap: vote.max_pairwise_gap,
            matches_source: vote.matches_source,
            runs: vote
                .evidence
                .iter()
                .map(|r| SdpRunArtifact {
                    stream: r.stream,
                    converged: r.converged,
                    iterations: r.iterations,
                    gram_rank: r.gram_rank,
                    psd_violation: r.psd_violation,
                    affine_violation: r.affine_violation,
                    matches_input: r.matches_input,
                })
                .collect(),
        }
    }
}
