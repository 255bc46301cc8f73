//! Complex linear-algebra substrate: partitions, states, operators, density
//! matrices, spectral decomposition, partial traces and entropy.

pub mod density;
pub mod linalg;
pub mod operator;
pub mod partial_trace;
pub mod partition;
pub mod random;
pub mod spectral;
pub mod state;
pub mod tolerances;

pub use density::{
    shannon_entropy, validate_density_matrix, validate_density_matrix_with, von_neumann_entropy,
    DensityDiagnostics, DensityMatrix,
};
pub use linalg::{CMatrix, CVector};
pub use operator::Operator;
pub use partial_trace::{partial_trace, reduced_from_pure};
pub use partition::Partition;
pub use random::{random_density_matrix, random_pure_state, split_seed};
pub use spectral::{spectral_decompose, EpistemicState};
pub use state::StateVector;
pub use tolerances::Tolerances;
