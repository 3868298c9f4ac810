//! The `K_{2,2}` sweep: kernel frameworks of the reference curve of
//! orthogonal representations under a closed-form centering scaling,
//! swept over the angle parameter.
//!
//! Degenerate angles are flagged rather than skipped: at `theta = 0` the
//! scaling collapses to a rank-1 limit stress (the kernel framework shown
//! is the limit, evaluated just inside the interval), and at
//! `theta = pi/2` the representation leaves general position while the
//! stress keeps rank 2.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use anyhow::Result;
use nalgebra::DMatrix;
use serde::Serialize;

use rigidcert_core::{gor, lss, numkernel, rigidity, superstable, ZERO_PATTERN_TOL};

use crate::Scaling;

/// Vertex order (u1, u2, v1, v2); the figure pins u1 -> 0, v1 -> 1.
const PIN: [usize; 2] = [0, 2];
/// Fallback pinning for angles where u1 and v1 coincide in the kernel.
const FALLBACK_PIN: [usize; 2] = [0, 1];
const THETA_EPS: f64 = 1e-5;

#[derive(Serialize)]
pub struct SweepFrame {
    pub index: usize,
    pub theta: f64,
    pub degenerate: bool,
    pub degenerate_reasons: Vec<String>,
    /// Rank of the stress at this exact angle.
    pub stress_rank: usize,
    /// True when the kernel framework is the limit from inside the
    /// interval (the extraction is singular at the exact angle).
    pub limit_frame: bool,
    pub omega: BTreeMap<String, f64>,
    pub edge_styles: BTreeMap<String, String>,
    /// Line positions in vertex order (u1, u2, v1, v2), pinned u1 -> 0,
    /// v1 -> 1.
    pub kernel_positions: Vec<f64>,
    /// Super-stability verdict of (kernel framework, stress); absent for
    /// flagged frames whose stress degenerates below rank 2.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub super_stable: Option<bool>,
}

#[derive(Serialize)]
pub struct SweepArtifact {
    pub command: &'static str,
    pub seed: u64,
    pub tol: f64,
    pub steps: usize,
    pub scaling: &'static str,
    pub frames: Vec<SweepFrame>,
}

fn scaling_map(scaling: Scaling, theta: f64) -> lss::CenteringMap {
    match scaling {
        Scaling::Eq5 => lss::k22_scaling_eq5(theta),
        Scaling::Eq6 => lss::k22_scaling_eq6(theta),
    }
}

/// Validity interval of the scaling: the first sums to zero on all of
/// `[0, pi]`, the companion only on `[0, pi/2]`.
fn interval_end(scaling: Scaling) -> f64 {
    match scaling {
        Scaling::Eq5 => PI,
        Scaling::Eq6 => PI / 2.0,
    }
}

/// Normalized stress of the scaled reference curve at `theta`, with its
/// rank.
fn stress_at(
    scaling: Scaling,
    theta: f64,
) -> Result<(rigidity::StressMatrix, usize)> {
    let rep = gor::reference_gor_k22(theta).rep;
    let phi = scaling_map(scaling, theta);
    let gram = lss::gram_stress(&rep, &phi);
    let scale = gram.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
    anyhow::ensure!(scale > 0.0, "stress vanished at theta = {theta}");
    let normalized = &gram / scale;
    let rank = numkernel::numerical_rank(&normalized, None)?.rank;
    let stress =
        rigidity::StressMatrix::new(rep.graph().clone(), normalized, ZERO_PATTERN_TOL)?;
    Ok((stress, rank))
}

fn kernel_positions_with(
    stress: &rigidity::StressMatrix,
    pin: &[usize; 2],
) -> std::result::Result<Vec<f64>, superstable::KernelError> {
    let targets = DMatrix::from_row_slice(2, 1, &[0.0, 1.0]);
    let f = superstable::kernel_framework(stress, 1, pin, &targets)?;
    Ok((0..4).map(|v| f.coords()[(v, 0)]).collect())
}

pub fn run_sweep(steps: usize, scaling: Scaling, seed: u64, tol: f64) -> Result<SweepArtifact> {
    let graph = rigidcert_core::Graph::complete_bipartite(2, 2);
    let end = interval_end(scaling);
    let mut frames = Vec::with_capacity(steps);
    for index in 0..steps {
        let theta = index as f64 * end / steps as f64;
        let reference = gor::reference_gor_k22(theta);
        let phi = scaling_map(scaling, theta);
        let mut reasons = Vec::new();
        if !reference.general_position {
            reasons.push("representation not in general position".to_string());
        }
        if !phi.is_full_rank() {
            reasons.push("scaling loses full rank".to_string());
        }

        let (stress, stress_rank) = stress_at(scaling, theta)?;
        let want_rank = 2;

        // Kernel framework: extract at the exact angle when the stress
        // has full rank (falling back to the u1/u2 pinning when the
        // figure pinning is singular), otherwise report the limit from
        // inside the sweep interval.
        let (positions, limit_frame, certified) = if stress_rank == want_rank {
            let positions = match kernel_positions_with(&stress, &PIN) {
                Ok(p) => p,
                Err(superstable::KernelError::SingularSystem { .. }) => {
                    reasons.push(
                        "u1/v1 pinning singular; frame uses the u1/u2 pinning".to_string(),
                    );
                    kernel_positions_with(&stress, &FALLBACK_PIN)?
                }
                Err(e) => return Err(e.into()),
            };
            let f = rigidity::Framework::new(
                graph.clone(),
                1,
                DMatrix::from_column_slice(4, 1, &positions),
            )?;
            let verdict = superstable::certify_super_stable(&f, &stress, Some(tol))?.verdict;
            (positions, false, Some(verdict))
        } else {
            let eps_theta = if theta < end / 2.0 {
                theta + THETA_EPS
            } else {
                theta - THETA_EPS
            };
            let (eps_stress, eps_rank) = stress_at(scaling, eps_theta)?;
            anyhow::ensure!(
                eps_rank == want_rank,
                "no full-rank stress near theta = {theta}"
            );
            (kernel_positions_with(&eps_stress, &PIN)?, true, None)
        };

        let w = stress.to_stress_vector();
        let mut omega = BTreeMap::new();
        let mut edge_styles = BTreeMap::new();
        for (e, &(i, j)) in graph.edges().iter().enumerate() {
            let value = w.as_slice()[e];
            let style = if value.abs() <= 1e-9 {
                "zero"
            } else if value < 0.0 {
                "thick"
            } else {
                "dashed"
            };
            omega.insert(format!("{i}-{j}"), value);
            edge_styles.insert(format!("{i}-{j}"), style.to_string());
        }

        frames.push(SweepFrame {
            index,
            theta,
            degenerate: !reasons.is_empty(),
            degenerate_reasons: reasons,
            stress_rank,
            limit_frame,
            omega,
            edge_styles,
            kernel_positions: positions,
            super_stable: certified,
        });
    }
    Ok(SweepArtifact {
        command: "k22-sweep",
        seed,
        tol,
        steps,
        scaling: scaling.name(),
        frames,
    })
}
