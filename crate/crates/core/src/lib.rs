//! Numerical laboratory for the minimal modal interpretation of open quantum systems.
//!
//! The crate is organised bottom-up:
//!
//! * [`hilbert`]: partitioned tensor-product spaces, density matrices, spectral
//!   ontology (epistemic states), partial traces and entropy.
//! * [`channels`]: Kraus channels, Choi matrices, Lindblad evolution, Lüders
//!   projections and the assignment map.
//! * [`modal`]: quantum conditional probabilities, epistemic propagation,
//!   trajectory sampling and eigenstate-swap analysis.
//! * [`scenarios`]: measurement and no-go constructions assembled into reports.
//! * [`properties`]: randomized invariant suites.

mod error;

pub mod channels;
pub mod hilbert;
pub mod modal;
pub mod properties;
pub mod scenarios;

pub use error::{Error, Result};
