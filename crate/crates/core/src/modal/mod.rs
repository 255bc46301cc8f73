//! Quantum conditional probabilities and the dynamics of epistemic states:
//! kinematical, dynamical, general and coarse-grained tables, epistemic
//! propagation, transition rates, trajectory sampling, eigenstate-swap
//! analysis, conditional-state equivalence and the subsystem inner product.

pub mod cond_probs;
pub mod dynamics;
pub mod inner_product;
pub mod leifer_spekkens;
pub mod matching;
pub mod swap;
pub mod table;

pub use cond_probs::{
    coarse_grained_cond_probs, dynamical_cond_probs, dynamical_cond_probs_from_state, general_cond_probs,
    general_cond_probs_from_state, kinematical_cond_probs, CoarseGrained,
};
pub use dynamics::{
    propagate_epistemic, sample_trajectories, sample_trajectories_at, transition_rates, OnticTrajectory,
    TrajectoryEnsemble,
};
pub use inner_product::{subsystem_inner_product, SubsystemEmbedding};
pub use leifer_spekkens::{coarse_conditional_check, coarse_conditional_state, leifer_spekkens_check, CoarseConditionalCheck};
pub use matching::match_eigenstates;
pub use swap::{eigenstate_swap_analysis, window_times, SwapBlockModel, SwapReport};
pub use table::{check_column_stochastic, Axis, ConditionalProbabilityTable};
