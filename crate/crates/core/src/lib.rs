//! Entropic correlation measures of bipartite quantum states.
//!
//! The crate is organised bottom-up:
//!
//! - [`qstate`]: density matrices with an explicit subsystem structure, partial traces,
//!   purification, von Neumann entropy and the factories for the named example states.
//! - [`measurement`]: POVMs, conditional ensembles, joint outcome distributions and the
//!   classical information quantities evaluated on them.
//! - [`opt`]: multistart maximisation of measurement-dependent objectives over POVMs
//!   (rank-1 Stiefel parameterisation, projective restriction, general effects).
//! - [`measures`]: the correlation measures themselves, every value tagged with whether it
//!   is exact, a certified lower bound or an upper bound.
//! - [`verify`]: seeded property suites that re-run the inequality chains on random states.
//! - [`catalogue`]: the named example states with their expected values.
//!
//! All entropies are in bits.

pub mod catalogue;
pub mod error;
pub mod linalg;
pub mod measurement;
pub mod measures;
pub mod opt;
pub mod qstate;
pub mod verify;

pub use error::{Error, Result};
pub use measurement::{ConditionalEnsemble, JointDistribution, Povm, Side};
pub use measures::{BoundDirection, CutSpec, MeasureReport, MeasuredSide};
pub use opt::{OptConfig, OptMode, OptResult};
pub use qstate::{DensityMatrix, DimSpec, EnsembleOfStates, Party, PureState, SeparableState};

/// Tolerances shared across modules.
pub mod tol {
    /// Hermiticity check on stored matrices.
    pub const HERM: f64 = 1e-10;
    /// Unit trace / unit norm check.
    pub const TRACE: f64 = 1e-10;
    /// Most negative eigenvalue tolerated in a PSD check.
    pub const PSD: f64 = 1e-9;
    /// Eigenvalues at or below this are treated as exact zeros in entropies.
    pub const CLIP: f64 = 1e-12;
    /// Slack on exact numeric identities.
    pub const NUM: f64 = 1e-8;
    /// Purification reconstruction.
    pub const RECON: f64 = 1e-8;
    /// POVM completeness.
    pub const POVM: f64 = 1e-8;
    /// Seeded-chain inequalities between optimizer outputs.
    pub const CHAIN: f64 = 1e-6;
    /// Optimizer slack for equalities that are only reached numerically.
    pub const KW: f64 = 1e-3;
    /// Outcomes below this probability are dropped from ensembles.
    pub const ZERO_PROB: f64 = 1e-14;
}

/// Largest ambient dimension a density matrix may have.
pub const MAX_AMBIENT_DIM: usize = 256;
