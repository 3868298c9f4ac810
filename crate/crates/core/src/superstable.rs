//! Kernel-framework extraction from a stress matrix and the
//! super-stability certificate.
//!
//! A PSD equilibrium stress matrix of rank `n-d-1` whose framework's edge
//! directions avoid every conic at infinity certifies universal rigidity.
//! The kernel framework of such a stress is recovered by selecting
//! `n-d-1` independent rows of the matrix and pinning `d+1` chosen
//! vertices to prescribed positions, one linear solve per coordinate.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numkernel::{self, NumError, SampleConfig};
use crate::rigidity::{
    stress_matrix_residual, Framework, RigidityError, StressMatrix,
};
use crate::{EQUILIBRIUM_TOL, POSITION_SUBSET_BUDGET};

#[derive(Debug, Error)]
pub enum KernelError {
    #[error("stress rank is {got}, kernel extraction needs exactly {expected}")]
    RankTooLow { expected: usize, got: usize },
    #[error("pinned system is singular; the chosen vertices span no full simplex in the kernel")]
    SingularSystem { pin: Vec<usize> },
    #[error("no pinning of {k} vertices yields a solvable system")]
    NoValidPinning { k: usize },
    #[error("pin list must name {expected} distinct vertices below {n}")]
    BadPinList { expected: usize, n: usize },
    #[error("pin targets must be {rows}x{cols} and affinely independent")]
    BadPinTargets { rows: usize, cols: usize },
    #[error("affine span of the result has dimension {span}, expected {d}")]
    DegenerateSpan { span: usize, d: usize },
    #[error("kernel residual {residual:.3e} exceeds {tol:.3e}")]
    KernelResidual { residual: f64, tol: f64 },
    #[error("stress is not an equilibrium stress for the framework: residual {residual:.3e} exceeds {tol:.3e}")]
    NotEquilibrium { residual: f64, tol: f64 },
    #[error(transparent)]
    Rigidity(#[from] RigidityError),
    #[error(transparent)]
    Num(#[from] NumError),
}

/// Extracts the `d`-dimensional framework in the kernel of `omega`,
/// pinning the vertices in `pin` to the rows of `pin_targets`
/// (a `(d+1) x d` array of affinely independent points).
///
/// Requires `rank(omega) = n - d - 1`.  Fails with `SingularSystem` when
/// the chosen vertices are affinely dependent in every kernel framework;
/// re-pin and retry in that case.
pub fn kernel_framework(
    omega: &StressMatrix,
    d: usize,
    pin: &[usize],
    pin_targets: &DMatrix<f64>,
) -> Result<Framework, KernelError> {
    let n = omega.n();
    let want_rank = n
        .checked_sub(d + 1)
        .filter(|&r| r >= 1)
        .ok_or(KernelError::RankTooLow {
            expected: 0,
            got: 0,
        })?;
    let rank = numkernel::numerical_rank(omega.matrix(), None)?.rank;
    if rank != want_rank {
        return Err(KernelError::RankTooLow {
            expected: want_rank,
            got: rank,
        });
    }
    if pin.len() != d + 1 || pin.iter().any(|&v| v >= n) || has_duplicates(pin) {
        return Err(KernelError::BadPinList {
            expected: d + 1,
            n,
        });
    }
    if pin_targets.nrows() != d + 1
        || pin_targets.ncols() != d
        || !numkernel::general_affine_position(pin_targets, POSITION_SUBSET_BUDGET).ok
    {
        return Err(KernelError::BadPinTargets {
            rows: pin_targets.nrows(),
            cols: pin_targets.ncols(),
        });
    }

    // Column-pivoted QR of Omega^t picks a stable set of independent rows.
    let rows = independent_rows(omega.matrix(), want_rank);

    let mut system = DMatrix::<f64>::zeros(n, n);
    for (k, &r) in rows.iter().enumerate() {
        system.set_row(k, &omega.matrix().row(r));
    }
    for (t, &v) in pin.iter().enumerate() {
        system[(want_rank + t, v)] = 1.0;
    }
    if numkernel::numerical_rank(&system, None)?.rank < n {
        return Err(KernelError::SingularSystem { pin: pin.to_vec() });
    }
    let lu = system.clone().lu();
    let mut coords = DMatrix::<f64>::zeros(n, d);
    for k in 0..d {
        let mut rhs = DVector::<f64>::zeros(n);
        for t in 0..=d {
            rhs[want_rank + t] = pin_targets[(t, k)];
        }
        let sol = lu
            .solve(&rhs)
            .ok_or(KernelError::SingularSystem { pin: pin.to_vec() })?;
        coords.set_column(k, &sol);
    }
    // The pin rows hold to solver precision; snap them exact.
    for (t, &v) in pin.iter().enumerate() {
        for k in 0..d {
            coords[(v, k)] = pin_targets[(t, k)];
        }
    }

    let framework = Framework::new(omega.graph().clone(), d, coords)?;
    let residual = stress_matrix_residual(&framework, omega);
    let tol = EQUILIBRIUM_TOL
        * omega.matrix().norm()
        * framework.coords().norm().max(1.0);
    if residual > tol {
        return Err(KernelError::KernelResidual { residual, tol });
    }
    let span = framework.affine_span_dim();
    if span != d {
        return Err(KernelError::DegenerateSpan { span, d });
    }
    Ok(framework)
}

fn has_duplicates(xs: &[usize]) -> bool {
    let mut seen = xs.to_vec();
    seen.sort_unstable();
    seen.windows(2).any(|w| w[0] == w[1])
}

/// Indices of `count` linearly independent rows of `m`, chosen by
/// column-pivoted QR of the transpose.
fn independent_rows(m: &DMatrix<f64>, count: usize) -> Vec<usize> {
    let qr = m.transpose().col_piv_qr();
    let mut order = DMatrix::<f64>::from_fn(1, m.nrows(), |_, j| j as f64);
    qr.p().permute_columns(&mut order);
    (0..count).map(|k| order[(0, k)] as usize).collect()
}

/// Origin plus the unit basis points: the standard pin targets.
pub fn simplex_targets(d: usize) -> DMatrix<f64> {
    let mut targets = DMatrix::zeros(d + 1, d);
    for k in 0..d {
        targets[(k + 1, k)] = 1.0;
    }
    targets
}

/// Kernel framework with the default pinning policy: vertices
/// `{0, ..., d}` go to the standard simplex; on a singular system, later
/// vertex subsets are tried in lexicographic order.
pub fn kernel_framework_default(
    omega: &StressMatrix,
    d: usize,
) -> Result<Framework, KernelError> {
    let n = omega.n();
    let targets = simplex_targets(d);
    let mut pin: Vec<usize> = (0..=d).collect();
    loop {
        match kernel_framework(omega, d, &pin, &targets) {
            Err(KernelError::SingularSystem { .. }) => {
                if !next_combination(&mut pin, n) {
                    return Err(KernelError::NoValidPinning { k: d + 1 });
                }
            }
            other => return other,
        }
    }
}

fn next_combination(c: &mut [usize], n: usize) -> bool {
    let k = c.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if c[i] < n - (k - i) {
            c[i] += 1;
            for j in i + 1..k {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Result of the conic-at-infinity test: the kernel dimension of the
/// linear system `(p_i - p_j)^t Q (p_i - p_j) = 0` over symmetric `Q`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConicReport {
    pub on_conic: bool,
    pub solution_dim: usize,
}

/// Tests whether the edge directions of `f` lie on a conic at infinity.
/// Edge directions are normalized; zero-length edges contribute no
/// constraint.
pub fn conic_at_infinity_test(f: &Framework) -> Result<ConicReport, KernelError> {
    let d = f.d();
    let span = f.affine_span_dim();
    if span < d {
        return Err(RigidityError::DegenerateSpan { span, d }.into());
    }
    let q_dim = d * (d + 1) / 2;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for &(i, j) in f.graph().edges() {
        let e = f.point(i) - f.point(j);
        let norm = e.norm();
        if norm == 0.0 {
            continue;
        }
        let e = e / norm;
        let mut row = Vec::with_capacity(q_dim);
        for a in 0..d {
            for b in a..d {
                row.push(if a == b { e[a] * e[a] } else { 2.0 * e[a] * e[b] });
            }
        }
        rows.push(row);
    }
    let solution_dim = if rows.is_empty() {
        q_dim
    } else {
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        let system = DMatrix::from_row_slice(rows.len(), q_dim, &flat);
        q_dim - numkernel::numerical_rank(&system, None)?.rank
    };
    Ok(ConicReport {
        on_conic: solution_dim >= 1,
        solution_dim,
    })
}

/// Super-stability evidence for a (framework, stress matrix) pair.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SuperStabilityReport {
    pub psd_ok: bool,
    pub rank_ok: bool,
    pub conic_ok: bool,
    pub general_position_ok: bool,
    /// Eigenvalues of the stress matrix, ascending.
    pub eigenvalues: Vec<f64>,
    pub conic_solution_space_dim: usize,
    /// When the framework is in general affine position and the rank is
    /// right, the conic test must come back clean; false records a
    /// disagreement between the two routes.
    pub alfakih_ye_consistent: bool,
    pub verdict: bool,
}

/// Checks the three super-stability clauses for `omega` on `f`: PSD,
/// rank exactly `n-d-1`, and edge directions on no conic at infinity.
///
/// `omega` must be an equilibrium stress for `f`; the general-position
/// shortcut (general affine position + full rank implies the conic test)
/// is evaluated alongside the direct test and both must agree.
pub fn certify_super_stable(
    f: &Framework,
    omega: &StressMatrix,
    tol: Option<f64>,
) -> Result<SuperStabilityReport, KernelError> {
    let tol = tol.unwrap_or(1e-9);
    let residual = stress_matrix_residual(f, omega);
    let gate = 10.0
        * EQUILIBRIUM_TOL
        * omega.matrix().norm().max(1e-300)
        * f.coords().norm().max(1.0);
    if residual > gate {
        return Err(KernelError::NotEquilibrium {
            residual,
            tol: gate,
        });
    }
    let want_rank = f.n() - f.d() - 1;
    let psd = numkernel::psd_rank_check(omega.matrix(), want_rank, tol);
    let rank_ok = psd.positive_count == want_rank;
    let conic = conic_at_infinity_test(f)?;
    let general_position_ok =
        numkernel::general_affine_position(f.coords(), POSITION_SUBSET_BUDGET).ok;
    let conic_ok = !conic.on_conic;
    let alfakih_ye_consistent = !(general_position_ok && rank_ok) || conic_ok;
    Ok(SuperStabilityReport {
        psd_ok: psd.psd,
        rank_ok,
        conic_ok,
        general_position_ok,
        eigenvalues: psd.eigenvalues,
        conic_solution_space_dim: conic.solution_dim,
        alfakih_ye_consistent,
        verdict: psd.psd && rank_ok && conic_ok,
    })
}

/// Random affinely-independent pin targets, a fallback when the simplex
/// pinning is unsuitable.
pub fn random_pin_targets(d: usize, cfg: &SampleConfig) -> DMatrix<f64> {
    for stream in 0..64 {
        let targets = numkernel::sample_generic_stream(d + 1, d, cfg, 0xF1A5 + stream);
        if numkernel::general_affine_position(&targets, POSITION_SUBSET_BUDGET).ok {
            return targets;
        }
    }
    simplex_targets(d)
}
