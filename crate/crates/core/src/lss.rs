//! Alfakih's construction: centering maps, centered GORs, and the PSD
//! stress matrices `Omega = (DX)(DX)^t` they generate.
//!
//! Scaling the rows of a general position orthogonal representation by a
//! co-kernel vector with no zero coordinates centers it at the origin;
//! the Gram matrix of the centered configuration is then an equilibrium
//! stress matrix that is PSD of rank `n-d-1` with zeros exactly on the
//! non-edges.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gor::{self, DimensionAudit, GorError, OrthogonalRep};
use crate::graph::Graph;
use crate::numkernel::{self, draw, NumError, PsdReport, SampleConfig};
use crate::rigidity::{RigidityError, StressMatrix};
use crate::superstable::{kernel_framework_default, KernelError};
use crate::{PROJECTIVE_FIT_TOL, ZERO_PATTERN_TOL};

#[derive(Debug, Error)]
pub enum LssError {
    #[error("co-kernel has dimension {got}, expected d + 1 = {expected}")]
    CoKernelWrongDimension { expected: usize, got: usize },
    #[error("representation is not in general position")]
    GeneralPositionViolated,
    #[error("no full-rank centering map found in {retries} retries")]
    RetriesExhausted { retries: usize },
    #[error("centering map has a zero coordinate: min |alpha| = {min_abs:.3e}")]
    NotFullRank { min_abs: f64 },
    #[error("centering map has length {got}, expected {expected}")]
    WrongLength { expected: usize, got: usize },
    #[error("stress invariant violated ({what}): {value:.3e} exceeds {tol:.3e}")]
    InvariantViolated {
        what: &'static str,
        value: f64,
        tol: f64,
    },
    #[error(transparent)]
    Gor(#[from] GorError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Rigidity(#[from] RigidityError),
    #[error(transparent)]
    Num(#[from] NumError),
}

const CENTERING_SALT: u64 = 0xA1FA;
const ZERO_COORD_TOL: f64 = 1e-8;

/// Per-vertex scaling coefficients from the co-kernel of a configuration
/// matrix; full rank when no coefficient is zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CenteringMap {
    alpha: Vec<f64>,
}

impl CenteringMap {
    pub fn new(alpha: Vec<f64>) -> Self {
        CenteringMap { alpha }
    }

    pub fn len(&self) -> usize {
        self.alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha.is_empty()
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn as_vector(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.alpha)
    }

    pub fn min_abs(&self) -> f64 {
        self.alpha.iter().fold(f64::INFINITY, |a, &v| a.min(v.abs()))
    }

    pub fn max_abs(&self) -> f64 {
        self.alpha.iter().fold(0.0f64, |a, &v| a.max(v.abs()))
    }

    /// No coordinate within `ZERO_COORD_TOL * max|alpha|` of zero.
    pub fn is_full_rank(&self) -> bool {
        self.min_abs() > ZERO_COORD_TOL * self.max_abs()
    }

    pub fn scaled(&self, c: f64) -> CenteringMap {
        CenteringMap {
            alpha: self.alpha.iter().map(|a| c * a).collect(),
        }
    }

    /// Unit norm with the first nonzero coordinate positive, so sampled
    /// maps serialize identically across runs.
    pub fn normalized(&self) -> CenteringMap {
        let norm = self.alpha.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm == 0.0 {
            return self.clone();
        }
        let sign = self
            .alpha
            .iter()
            .find(|a| a.abs() > 0.0)
            .map_or(1.0, |a| a.signum());
        self.scaled(sign / norm)
    }
}

/// Samples a full-rank centering map for `rep`: a generic combination of
/// an orthonormal co-kernel basis of `X`, retried until every coordinate
/// is clearly nonzero, then normalized.
pub fn find_centering_map(
    rep: &OrthogonalRep,
    cfg: &SampleConfig,
    max_retries: usize,
) -> Result<CenteringMap, LssError> {
    let expected = rep.d() + 1;
    let cokernel = numkernel::cokernel_basis(rep.x(), None)?;
    if cokernel.ncols() != expected {
        return Err(LssError::CoKernelWrongDimension {
            expected,
            got: cokernel.ncols(),
        });
    }
    if !gor::validate_gor(rep, None).general_position.ok {
        return Err(LssError::GeneralPositionViolated);
    }
    let sample_cfg = cfg.derive(CENTERING_SALT);
    for attempt in 0..=max_retries {
        let mut rng = sample_cfg.rng(attempt as u64);
        let z = DVector::from_iterator(expected, (0..expected).map(|_| draw(&mut rng, cfg)));
        let alpha = &cokernel * z;
        let map = CenteringMap::new(alpha.iter().copied().collect());
        if map.is_full_rank() {
            return Ok(map.normalized());
        }
    }
    Err(LssError::RetriesExhausted {
        retries: max_retries,
    })
}

/// Scales row `i` of the representation by `alpha_i`; the result has its
/// barycenter at the origin and is still an orthogonal representation.
pub fn center_gor(rep: &OrthogonalRep, phi: &CenteringMap) -> Result<OrthogonalRep, LssError> {
    if phi.len() != rep.n() {
        return Err(LssError::WrongLength {
            expected: rep.n(),
            got: phi.len(),
        });
    }
    if !phi.is_full_rank() {
        return Err(LssError::NotFullRank {
            min_abs: phi.min_abs(),
        });
    }
    let centered = rep.scaled_rows(&phi.as_vector());
    let scale = (0..centered.n())
        .map(|i| centered.x().row(i).norm())
        .fold(0.0f64, f64::max);
    let barycenter = centered.x().row_sum().norm();
    let tol = 1e-8 * scale.max(1e-300) * rep.n() as f64;
    if barycenter > tol {
        return Err(LssError::InvariantViolated {
            what: "barycenter at origin",
            value: barycenter,
            tol,
        });
    }
    Ok(centered)
}

/// Raw Gram product `(DX)(DX)^t`, symmetrized; no invariants checked.
/// Used directly for degenerate limit stresses where the centering map
/// is allowed zero coordinates.
pub fn gram_stress(rep: &OrthogonalRep, phi: &CenteringMap) -> DMatrix<f64> {
    let scaled = rep.scaled_rows(&phi.as_vector());
    let gram = scaled.x() * scaled.x().transpose();
    (&gram + gram.transpose()) * 0.5
}

/// A stress matrix from Alfakih's construction, with its provenance.
#[derive(Clone, Debug)]
pub struct LssStress {
    /// Normalized so the largest absolute entry is 1.
    pub omega: StressMatrix,
    pub psd: PsdReport,
    pub source_rep: OrthogonalRep,
    pub centering: CenteringMap,
}

impl LssStress {
    pub fn rank(&self) -> usize {
        self.psd.positive_count
    }
}

/// Builds `Omega = (DX)(DX)^t`, normalizes it, and verifies the zero
/// pattern on non-edges, zero row sums, and PSD rank `n-d-1`.
pub fn lss_stress_matrix(
    rep: &OrthogonalRep,
    phi: &CenteringMap,
) -> Result<LssStress, LssError> {
    let centered = center_gor(rep, phi)?;
    let gram = centered.x() * centered.x().transpose();
    let gram = (&gram + gram.transpose()) * 0.5;
    let scale = gram.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
    if scale == 0.0 {
        return Err(LssError::InvariantViolated {
            what: "nonzero stress",
            value: 0.0,
            tol: 0.0,
        });
    }
    let normalized = &gram / scale;
    let omega = StressMatrix::new(rep.graph().clone(), normalized, ZERO_PATTERN_TOL)
        .map_err(|e| match e {
            RigidityError::StressInvariant { what, value, tol } => {
                LssError::InvariantViolated { what, value, tol }
            }
            other => LssError::Rigidity(other),
        })?;
    let want_rank = rep.n() - rep.d() - 1;
    let psd = numkernel::psd_rank_check(omega.matrix(), want_rank, 1e-9);
    if !psd.ok {
        return Err(LssError::InvariantViolated {
            what: "PSD with rank n-d-1",
            value: psd.positive_count as f64,
            tol: want_rank as f64,
        });
    }
    Ok(LssStress {
        omega,
        psd,
        source_rep: rep.clone(),
        centering: phi.clone(),
    })
}

/// Numerical audit of the stress-family dimension `m - (d+1)d/2`: the
/// rank of the Jacobian of `(X, alpha) -> edge entries of (DX)(DX)^t`,
/// restricted to the tangent space of the constraint set (orthogonality
/// on non-edges, `alpha` in the co-kernel of `X`).
pub fn audit_lss_dimension(
    g: &Graph,
    d: usize,
    cfg: &SampleConfig,
) -> Result<DimensionAudit, LssError> {
    let rep = gor::build_gor(g, d, cfg, 32)?;
    let phi = find_centering_map(&rep, cfg, 64)?;
    let n = g.n();
    let dim = rep.rep_dim();
    let x = rep.x();
    let alpha = phi.as_vector();
    let vars = n * dim + n;

    // Constraint Jacobian: non-edge orthogonality rows, then the D rows
    // of alpha^t X = 0.
    let non_edges = g.non_edges();
    let mut constraints = DMatrix::<f64>::zeros(non_edges.len() + dim, vars);
    constraints
        .view_mut((0, 0), (non_edges.len(), n * dim))
        .copy_from(&gor::orthogonality_jacobian(g, x));
    for k in 0..dim {
        let row = non_edges.len() + k;
        for i in 0..n {
            constraints[(row, i * dim + k)] = alpha[i];
            constraints[(row, n * dim + i)] = x[(i, k)];
        }
    }
    let tangent = numkernel::kernel_basis(&constraints, None)?;

    // Jacobian of the edge entries Omega_ij = alpha_i alpha_j <v_i, v_j>.
    let mut map_jac = DMatrix::<f64>::zeros(g.m(), vars);
    for (e, &(i, j)) in g.edges().iter().enumerate() {
        let inner = x.row(i).dot(&x.row(j));
        for k in 0..dim {
            map_jac[(e, i * dim + k)] = alpha[i] * alpha[j] * x[(j, k)];
            map_jac[(e, j * dim + k)] = alpha[i] * alpha[j] * x[(i, k)];
        }
        map_jac[(e, n * dim + i)] = alpha[j] * inner;
        map_jac[(e, n * dim + j)] = alpha[i] * inner;
    }
    let restricted = map_jac * tangent;
    let measured = numkernel::numerical_rank(&restricted, None)?.rank;
    let predicted = g.m() - (d + 1) * d / 2;
    Ok(DimensionAudit {
        measured,
        predicted,
    })
}

/// Fit of a projective transformation between the kernel frameworks of
/// two centering maps of the same representation.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProjectiveReport {
    /// Homogeneous `(d+1) x (d+1)` map, row-major.
    pub homography: Vec<Vec<f64>>,
    /// Max point mismatch after dehomogenization, relative to the scale
    /// of the target framework.
    pub residual: f64,
    pub related: bool,
}

/// Builds the kernel frameworks of `(rep, phi1)` and `(rep, phi2)` and
/// fits a `d`-dimensional projective transformation between them.
pub fn projective_family_check(
    rep: &OrthogonalRep,
    phi1: &CenteringMap,
    phi2: &CenteringMap,
) -> Result<ProjectiveReport, LssError> {
    let d = rep.d();
    let f1 = kernel_framework_default(&lss_stress_matrix(rep, phi1)?.omega, d)?;
    let f2 = kernel_framework_default(&lss_stress_matrix(rep, phi2)?.omega, d)?;
    let (h, residual) = fit_homography(f1.coords(), f2.coords())?;
    let det = h.clone().lu().determinant().abs();
    let scale = h.iter().fold(0.0f64, |a, &v| a.max(v.abs())).max(1e-300);
    let invertible = det > 1e-10 * scale.powi(d as i32 + 1);
    Ok(ProjectiveReport {
        homography: (0..=d)
            .map(|r| h.row(r).iter().copied().collect())
            .collect(),
        residual,
        related: residual <= PROJECTIVE_FIT_TOL && invertible,
    })
}

/// Direct linear transform: the homogeneous `(d+1) x (d+1)` map `H` with
/// `H (p_i, 1) ~ (q_i, 1)`, via the smallest singular vector of the
/// stacked proportionality constraints, plus the fit residual.
fn fit_homography(
    from: &DMatrix<f64>,
    to: &DMatrix<f64>,
) -> Result<(DMatrix<f64>, f64), LssError> {
    let n = from.nrows();
    let d = from.ncols();
    let hsize = d + 1;
    // Row for point i, coordinate k: (H x)_k - q_k (H x)_d = 0.
    let mut system = DMatrix::<f64>::zeros(n * d, hsize * hsize);
    for i in 0..n {
        let mut lift = vec![0.0; hsize];
        for c in 0..d {
            lift[c] = from[(i, c)];
        }
        lift[d] = 1.0;
        for k in 0..d {
            let row = i * d + k;
            for c in 0..hsize {
                system[(row, k * hsize + c)] += lift[c];
                system[(row, d * hsize + c)] -= to[(i, k)] * lift[c];
            }
        }
    }
    let svd = system.svd(true, true);
    let vt = svd.v_t.as_ref().expect("svd requested v_t");
    // Smallest singular value's right vector.
    let mut min_idx = 0;
    for (idx, &s) in svd.singular_values.iter().enumerate() {
        if s < svd.singular_values[min_idx] {
            min_idx = idx;
        }
    }
    let h_flat = vt.row(min_idx);
    let h = DMatrix::from_fn(hsize, hsize, |r, c| h_flat[r * hsize + c]);

    let scale = (0..n)
        .map(|i| to.row(i).norm())
        .fold(0.0f64, f64::max)
        .max(1.0);
    let mut worst = 0.0f64;
    for i in 0..n {
        let mut lift = DVector::<f64>::zeros(hsize);
        for c in 0..d {
            lift[c] = from[(i, c)];
        }
        lift[d] = 1.0;
        let image = &h * lift;
        let w = image[d];
        if w.abs() < 1e-12 * image.norm().max(1e-300) {
            worst = f64::INFINITY;
            continue;
        }
        let mut err = 0.0f64;
        for k in 0..d {
            err += (image[k] / w - to[(i, k)]).powi(2);
        }
        worst = worst.max(err.sqrt());
    }
    Ok((h, worst / scale))
}

/// The closed-form centering scaling of the reference `K_{2,2}` curve:
/// `alpha = (|u2+v2|, |u1+v1|, |u2+v2|, |u1+v1|)` in vertex order
/// `(u1, u2, v1, v2)`.  Valid (full rank) on `theta` in `(0, pi)`.
pub fn k22_scaling_eq5(theta: f64) -> CenteringMap {
    let rep = gor::reference_gor_k22(theta).rep;
    let x = rep.x();
    let a1 = (x.row(1) + x.row(3)).norm(); // |u2 + v2|
    let a2 = (x.row(0) + x.row(2)).norm(); // |u1 + v1|
    CenteringMap::new(vec![a1, a2, a1, a2])
}

/// The companion scaling: `alpha = (-|u2+v1|, |v2-u1|, |v2-u1|, |u2+v1|)`.
/// Valid (sums to zero) on `theta` in `[0, pi/2]`, full rank below `pi/2`.
pub fn k22_scaling_eq6(theta: f64) -> CenteringMap {
    let rep = gor::reference_gor_k22(theta).rep;
    let x = rep.x();
    let b1 = (x.row(1) + x.row(2)).norm(); // |u2 + v1|
    let b2 = (x.row(3) - x.row(0)).norm(); // |v2 - u1|
    CenteringMap::new(vec![-b1, b2, b2, b1])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gor::{build_gor, reference_gor_k22};
    use crate::rigidity::affine_fit;
    use std::f64::consts::PI;

    #[test]
    fn centering_map_found_for_reference_k22() {
        let rep = reference_gor_k22(PI / 6.0).rep;
        let cfg = SampleConfig::new(1);
        let phi = find_centering_map(&rep, &cfg, 64).unwrap();
        assert!(phi.is_full_rank());
        // alpha lies in the co-kernel of X.
        let residual = (phi.as_vector().transpose() * rep.x()).norm();
        assert!(residual < 1e-10);
        // The closed-form scaling is in the same co-kernel.
        let eq5 = k22_scaling_eq5(PI / 6.0);
        assert!((eq5.as_vector().transpose() * rep.x()).norm() < 1e-12);
    }

    #[test]
    fn centering_map_for_k4_gor() {
        let rep = build_gor(&Graph::complete(4), 1, &SampleConfig::new(2), 32).unwrap();
        let phi = find_centering_map(&rep, &SampleConfig::new(2), 64).unwrap();
        // Co-kernel dimension d + 1 = 2 was implicitly verified; the map
        // centers the representation.
        let centered = center_gor(&rep, &phi).unwrap();
        assert!(centered.x().row_sum().norm() < 1e-10);
    }

    #[test]
    fn zero_row_is_rejected() {
        let g = Graph::complete(4);
        let mut x = build_gor(&g, 1, &SampleConfig::new(3), 32)
            .unwrap()
            .x()
            .clone();
        x.row_mut(2).fill(0.0);
        let rep = OrthogonalRep::new(g, 1, x).unwrap();
        assert!(matches!(
            find_centering_map(&rep, &SampleConfig::new(3), 64),
            Err(LssError::GeneralPositionViolated)
        ));
    }

    #[test]
    fn center_gor_identity_on_centered() {
        let rep = reference_gor_k22(PI / 6.0).rep;
        let phi = k22_scaling_eq5(PI / 6.0);
        let centered = center_gor(&rep, &phi).unwrap();
        let ones = CenteringMap::new(vec![1.0; 4]);
        let again = center_gor(&centered, &ones).unwrap();
        assert_eq!(again.x(), centered.x());
    }

    #[test]
    fn center_gor_rejects_zero_coordinate() {
        let rep = reference_gor_k22(PI / 6.0).rep;
        let phi = CenteringMap::new(vec![0.0, 1.0, 0.0, 1.0]);
        assert!(matches!(
            center_gor(&rep, &phi),
            Err(LssError::NotFullRank { .. })
        ));
    }

    #[test]
    fn stress_at_pi_over_6_has_one_negative_omega() {
        let rep = reference_gor_k22(PI / 6.0).rep;
        let stress = lss_stress_matrix(&rep, &k22_scaling_eq5(PI / 6.0)).unwrap();
        assert_eq!(stress.rank(), 2);
        let w = stress.omega.to_stress_vector();
        let g = stress.omega.graph().clone();
        let negatives: Vec<(usize, usize)> = g
            .edges()
            .iter()
            .enumerate()
            .filter(|(e, _)| w.as_slice()[*e] < 0.0)
            .map(|(_, &edge)| edge)
            .collect();
        // Exactly one negative omega, on the long edge {u1, v1} = {0, 2}.
        assert_eq!(negatives, vec![(0, 2)]);
    }

    #[test]
    fn stress_at_zero_degenerates_to_rank_one() {
        // The scaling itself loses full rank at theta = 0 ...
        let rep = reference_gor_k22(0.0).rep;
        let phi = k22_scaling_eq5(0.0);
        assert!(matches!(
            lss_stress_matrix(&rep, &phi),
            Err(LssError::NotFullRank { .. })
        ));
        // ... and the raw limit Gram is the rank-1 stress with omega = 1
        // on the bright-red/bright-blue edge {u2, v2} = {1, 3}.
        let gram = gram_stress(&rep, &phi);
        let scale = gram.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
        let normalized = &gram / scale;
        assert_eq!(
            numkernel::numerical_rank(&normalized, None).unwrap().rank,
            1
        );
        let g = rep.graph();
        for &(i, j) in g.edges() {
            let omega_ij = -normalized[(i, j)];
            if (i, j) == (1, 3) {
                assert!((omega_ij - 1.0).abs() < 1e-12);
            } else {
                assert!(omega_ij.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn stress_at_pi_over_2_keeps_rank_two() {
        let rep = reference_gor_k22(PI / 2.0).rep;
        let stress = lss_stress_matrix(&rep, &k22_scaling_eq5(PI / 2.0)).unwrap();
        assert_eq!(stress.rank(), 2);
        let w = stress.omega.to_stress_vector();
        let g = stress.omega.graph().clone();
        for (e, &(i, j)) in g.edges().iter().enumerate() {
            let omega = w.as_slice()[e];
            // omega = 1 on {u1, v2} = {0, 3} and {u2, v1} = {1, 2}.
            if (i, j) == (0, 3) || (i, j) == (1, 2) {
                assert!((omega - 1.0).abs() < 1e-12, "edge ({i},{j}): {omega}");
            } else {
                assert!(omega.abs() < 1e-12, "edge ({i},{j}): {omega}");
            }
        }
    }

    #[test]
    fn generic_pipeline_stress_is_valid() {
        for (g, d, seed) in [
            (Graph::complete_bipartite(2, 2), 1, 4u64),
            (Graph::complete(4), 2, 5),
            (Graph::octahedron(), 3, 6),
        ] {
            let cfg = SampleConfig::new(seed);
            let rep = build_gor(&g, d, &cfg, 32).unwrap();
            let phi = find_centering_map(&rep, &cfg, 64).unwrap();
            let stress = lss_stress_matrix(&rep, &phi).unwrap();
            assert_eq!(stress.rank(), g.n() - d - 1);
            assert_eq!(stress.omega.max_abs(), 1.0);
        }
    }

    #[test]
    fn scaling_alpha_scales_gram_quadratically() {
        let rep = reference_gor_k22(PI / 6.0).rep;
        let phi = k22_scaling_eq5(PI / 6.0);
        let double = phi.scaled(2.0);
        let gram1 = gram_stress(&rep, &phi);
        let gram2 = gram_stress(&rep, &double);
        assert!((gram2 - &gram1 * 4.0).abs().max() < 1e-12);
        // Normalized stresses coincide.
        let s1 = lss_stress_matrix(&rep, &phi).unwrap();
        let s2 = lss_stress_matrix(&rep, &double).unwrap();
        assert!((s1.omega.matrix() - s2.omega.matrix()).abs().max() < 1e-12);
    }

    #[test]
    fn scaled_centering_gives_same_kernel_framework_class() {
        let rep = build_gor(&Graph::complete(4), 2, &SampleConfig::new(8), 32).unwrap();
        let phi = find_centering_map(&rep, &SampleConfig::new(8), 64).unwrap();
        let f1 =
            kernel_framework_default(&lss_stress_matrix(&rep, &phi).unwrap().omega, 2).unwrap();
        let f2 = kernel_framework_default(
            &lss_stress_matrix(&rep, &phi.scaled(-3.0)).unwrap().omega,
            2,
        )
        .unwrap();
        let (_, fit) = affine_fit(f1.coords(), f2.coords()).unwrap();
        assert!(fit <= 1e-8);
    }

    #[test]
    fn audit_lss_dimensions() {
        let cfg = SampleConfig::new(9);
        let audit = audit_lss_dimension(&Graph::complete_bipartite(2, 2), 1, &cfg).unwrap();
        assert_eq!(audit.measured, 3);
        assert_eq!(audit.predicted, 3);

        let audit = audit_lss_dimension(&Graph::complete(4), 1, &cfg).unwrap();
        assert_eq!(audit.predicted, 5);
        assert_eq!(audit.measured, 5);

        let audit = audit_lss_dimension(&Graph::octahedron(), 3, &cfg).unwrap();
        assert_eq!(audit.predicted, 6);
        assert_eq!(audit.measured, 6);
    }

    #[test]
    fn projective_relation_between_scalings() {
        let rep = reference_gor_k22(PI / 6.0).rep;
        let eq5 = k22_scaling_eq5(PI / 6.0);
        let eq6 = k22_scaling_eq6(PI / 6.0);
        // Both scalings really center the reference curve.
        assert!((eq6.as_vector().transpose() * rep.x()).norm() < 1e-12);
        let report = projective_family_check(&rep, &eq5, &eq6).unwrap();
        assert!(report.related, "residual {}", report.residual);
        assert!(report.residual <= 1e-8);

        let same = projective_family_check(&rep, &eq5, &eq5).unwrap();
        assert!(same.related);
        assert!(same.residual <= 1e-12);
    }
}
