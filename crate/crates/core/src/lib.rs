//! Numerical toolkit for graph rigidity.
//!
//! Given a graph `G` and a dimension `d`, this crate constructs general
//! position orthogonal representations in `R^{n-d-1}`, turns them into
//! positive semidefinite equilibrium stress matrices of rank `n-d-1`,
//! extracts the `d`-dimensional frameworks living in their kernels, and
//! searches for a framework that is simultaneously infinitesimally rigid
//! and super stable.  Such a pair (framework, stress matrix) certifies
//! that `G` is generically globally rigid in `R^d`.
//!
//! The crate also audits the dimensions of the orthogonal-representation
//! variety and of the stress family it generates, and ships a desk-scale
//! alternating-projection probe for the graph realization semidefinite
//! program.
//!
//! Everything is dense, double precision, and deterministic: every
//! randomized construction consumes a [`SampleConfig`] carrying a 64-bit
//! seed, and identical seeds reproduce identical artifacts byte for byte.

pub use nalgebra;

pub mod certify;
pub mod gor;
pub mod graph;
pub mod lss;
pub mod numkernel;
pub mod rigidity;
pub mod sdp;
pub mod superstable;

pub use certify::{AttemptDiagnostic, CertifyError, GgrCertificate, RobustnessReport};
pub use gor::{DimensionAudit, GorError, GorValidation, OrthogonalRep};
pub use graph::{Graph, GraphError, VertexOrder};
pub use lss::{CenteringMap, LssError, LssStress, ProjectiveReport};
pub use numkernel::{
    Distribution, NumError, PositionCheck, PsdReport, RankReport, SampleConfig,
};
pub use rigidity::{
    FlexBasis, FlexKind, Framework, RigidityCheck, RigidityError, StressMatrix, StressVector,
};
pub use sdp::{RealizationInstance, SdpError, SdpProbeResult, VoteReport};
pub use superstable::{ConicReport, KernelError, SuperStabilityReport};

/// Absolute tolerance (relative to the largest entry) for the zero pattern
/// of a stress matrix on non-edges.
pub const ZERO_PATTERN_TOL: f64 = 1e-10;

/// Relative tolerance for equilibrium residuals of certified stresses.
pub const EQUILIBRIUM_TOL: f64 = 1e-9;

/// Relative tolerance for pairwise-distance congruence tests.
pub const CONGRUENCE_TOL: f64 = 1e-8;

/// Residual threshold for the projective-relation fit between kernel
/// frameworks of the same orthogonal representation.
pub const PROJECTIVE_FIT_TOL: f64 = 1e-8;

/// Subset budget above which general-position checks switch from
/// exhaustive enumeration to random sampling.
pub const POSITION_SUBSET_BUDGET: usize = 200_000;
