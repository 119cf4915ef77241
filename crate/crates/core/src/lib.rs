//! Invariant subspaces, constants of motion and stationary states of open
//! quantum systems coupled to a thermal reservoir through a single system
//! operator.
//!
//! The pipeline: a [`SystemModel`] is diagonalized into an [`EigenSystem`];
//! the coupling operator's sparsity pattern in that basis splits the levels
//! into invariant blocks ([`invariant_partition`]); each block carries one
//! conserved projector ([`basis_projectors`]) and relaxes to its own Gibbs
//! distribution ([`stationary_state`]); [`evolve_density`] integrates the
//! secular master equation for cross-checking.
//!
//! All numerics are generic over [`Real`] (`f32` or `f64`); the `*64` and
//! `*32` aliases fix the scalar.

pub mod builtin;
pub mod coms;
pub mod decomposition;
pub mod dynamics;
mod error;
pub mod model;
pub mod report;
pub mod scalar;
pub mod stationary;
pub mod validation;

pub use builtin::{figure1_setup, two_tls_analytics, two_tls_model, TwoTlsAnalytics, TwoTlsSpec};
pub use coms::{
    basis_projectors, brute_force_com_atoms, com_condition_residual, lindblad_residual,
    named_coms_two_tls, ComBasis, DiagonalObservable, NamedCom,
};
pub use decomposition::{
    coupling_graph, default_epsilon_s, invariant_partition, CouplingGraph, SubspacePartition,
};
pub use dynamics::{
    coherence_decay_rates, evolve_density, evolve_populations, exact_populations, rate_matrix,
    DensityState, LindbladGenerator, MasterEquation, RateMatrix, Trajectory,
};
pub use error::{Error, Result};
pub use model::{
    eigenbasis, load_model, load_model_file, spectral_value, EigenSystem, Extrapolation,
    SpectralFunction, SystemModel, Tolerances,
};
pub use scalar::{Real, C};
pub use stationary::{
    block_weights, gibbs_state, null_space_stationary, stationary_state, StationaryPrediction,
};
pub use validation::{validate, ValidationReport};

pub type SystemModel64 = SystemModel<f64>;
pub type SystemModel32 = SystemModel<f32>;
pub type EigenSystem64 = EigenSystem<f64>;
pub type EigenSystem32 = EigenSystem<f32>;
pub type SpectralFunction64 = SpectralFunction<f64>;
pub type SpectralFunction32 = SpectralFunction<f32>;
pub type RateMatrix64 = RateMatrix<f64>;
pub type RateMatrix32 = RateMatrix<f32>;
pub type DensityState64 = DensityState<f64>;
pub type DensityState32 = DensityState<f32>;
pub type Trajectory64 = Trajectory<f64>;
pub type DiagonalObservable64 = DiagonalObservable<f64>;
pub type StationaryPrediction64 = StationaryPrediction<f64>;
pub type TwoTlsSpec64 = TwoTlsSpec<f64>;
