//! Finite-dimensional quantum realization of sequential measurements.

mod dilation;
mod measurement;
mod projectors;
mod states;
mod work;

pub use dilation::{dilation_analysis, DilationReport, PURITY_TOL};
pub use measurement::{
    assumption_holds, boltzmann_weights, build_sequential_model, induced_joint_probabilities,
    luders_channel, luders_select, minimal_weights, outcome_probabilities, AssumptionReport,
    DEFAULT_ASSUMPTION_TOL, PROBABILITY_CLAMP, SELECTION_THRESHOLD,
};
pub use projectors::{
    joint_eigenprojections, spectral_projectors, JointEigenprojections, ProjectorFamily,
    SpectralDecomposition, COMMUTATOR_TOL, DEFAULT_CLUSTER_TOL, DEGENERACY_TOL, PROJECTOR_TOL,
};
pub use states::{unitarity_residual, DensityOperator, Unitary, STATE_TOL, UNITARY_TOL};
pub use work::{boltzmann_state, two_point_work_protocol, WorkOutcome, WorkStatistics};
