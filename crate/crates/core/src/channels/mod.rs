//! Linear CPT dynamics: Kraus channels, Choi matrices and conditional states,
//! Lindblad evolution, Lüders projections and the assignment map.

pub mod assignment;
pub mod choi;
pub mod kraus;
pub mod lindblad;

pub use assignment::{assignment_map, assignment_map_with};
pub use choi::{
    choi, choi_of_map, conditional_state, kraus_from_choi, kraus_from_choi_with, verify_cpt, ChoiMatrix,
    ConditionalState, CptDiagnostics,
};
pub use kraus::{
    amplitude_damping, dephasing, depolarizing, luders_channel, luders_channel_with, random_channel,
    random_channel_with_rng, KrausChannel,
};
pub use lindblad::{LindbladGenerator, DEFAULT_STEP};
