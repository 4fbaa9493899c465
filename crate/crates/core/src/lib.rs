//! Discrete-time open quantum walks.
//!
//! - [`linalg`]: complex matrices, normality/commutation checks and joint
//!   eigendecomposition of commuting coins.
//! - [`walk`]: the generic engine on explicit graphs.
//! - [`line`]: the homogeneous walk on the integer line with a windowed
//!   fast path.
//! - [`analytic`]: closed-form distributions and asymptotic component
//!   classification for commuting coins.

pub mod analytic;
mod kernel;
pub mod linalg;
pub mod line;
pub mod walk;

pub use analytic::{
    analytic_distribution, classify_spectrum, component_stats, initial_projections,
    ClassifyTolerances, ComponentKind, ComponentSpec, DistributionProfile,
};
pub use linalg::{
    commutator_norm, is_normal, joint_eigendecomposition, ComplexMatrix, SpectralDecomposition, C64,
};
pub use line::{line_step, run_line, LineCoin, LineOptions, LineState};
pub use walk::{
    apply_step, evolve, position_distribution, validate_transitions, DensityBlock, NodeId,
    TransitionSet, WalkState,
};
