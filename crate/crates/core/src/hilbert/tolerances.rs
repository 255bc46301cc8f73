use serde::{Deserialize, Serialize};

/// Numerical tolerances shared by validation routines.
///
/// Every operation that validates its inputs has a `*_with` variant taking an
/// explicit `Tolerances`; the plain variant uses [`Tolerances::default`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Allowed deviation of a state-vector norm from one.
    pub norm: f64,
    /// Allowed `max |A - A^dag|` for Hermitian operators.
    pub herm: f64,
    /// Allowed deviation of a trace from its target value.
    pub trace: f64,
    /// Eigenvalues in `(-psd, 0)` are clipped to zero; anything lower is an error.
    pub psd: f64,
    /// Allowed overlap between distinct ontic states.
    pub orth: f64,
    /// Allowed `max |sum E^dag E - 1|` for trace-preserving Kraus sets.
    pub tp: f64,
    /// Allowed normalization defect of a conditional-probability row.
    pub prob: f64,
    /// Largest side of a dense operator.
    pub max_dim: usize,
    /// Largest length of a dense state vector.
    pub max_state_dim: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            norm: 1e-9,
            herm: 1e-9,
            trace: 1e-9,
            psd: 1e-10,
            orth: 1e-8,
            tp: 1e-9,
            prob: 1e-10,
            max_dim: 256,
            max_state_dim: 1 << 17,
        }
    }
}

/// Eigenvalues closer than this are treated as a degenerate cluster when ordering eigenvectors.
pub const DEGENERACY_GAP: f64 = 1e-10;

/// Components below this modulus are skipped when fixing eigenvector phases.
pub const PHASE_CUTOFF: f64 = 1e-12;
