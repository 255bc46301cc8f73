use super::density::DensityMatrix;
use super::linalg::{self, CMatrix, CVector};
use super::partition::Partition;
use super::state::StateVector;
use crate::error::Result;

/// Spectral ontology of a density matrix: `(p_i, Ψ_i)` pairs sorted by descending `p_i`.
///
/// All `dim` pairs are kept, including those with zero probability, so that
/// the projectors always resolve the identity.
#[derive(Clone, Debug, PartialEq)]
pub struct EpistemicState {
    probabilities: Vec<f64>,
    vectors: CMatrix,
    partition: Partition,
}

impl EpistemicState {
    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    /// Ontic states as columns.
    pub fn vectors(&self) -> &CMatrix {
        &self.vectors
    }

    pub fn vector(&self, i: usize) -> CVector {
        self.vectors.column(i).into_owned()
    }

    pub fn state(&self, i: usize) -> Result<StateVector> {
        StateVector::normalized(self.vector(i), self.partition.clone())
    }

    pub fn pairs(&self) -> Vec<(f64, StateVector)> {
        (0..self.len())
            .map(|i| (self.probabilities[i], self.state(i).expect("unit eigenvector")))
            .collect()
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn len(&self) -> usize {
        self.probabilities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probabilities.is_empty()
    }

    /// `|Ψ_i><Ψ_i|`.
    pub fn projector(&self, i: usize) -> CMatrix {
        linalg::outer(&self.vector(i))
    }

    /// `1 - Σ p_i`.
    pub fn decay_probability(&self) -> f64 {
        1.0 - self.probabilities.iter().sum::<f64>()
    }

    /// Number of probabilities above `eps`.
    pub fn rank(&self, eps: f64) -> usize {
        self.probabilities.iter().filter(|&&p| p > eps).count()
    }

    /// `Σ p_i |Ψ_i><Ψ_i|`.
    pub fn rebuild_matrix(&self) -> CMatrix {
        let mut scaled = self.vectors.clone();
        for (j, &p) in self.probabilities.iter().enumerate() {
            for i in 0..scaled.nrows() {
                scaled[(i, j)] *= p;
            }
        }
        &scaled * self.vectors.adjoint()
    }

    pub fn rebuild(&self) -> DensityMatrix {
        DensityMatrix::from_parts_unchecked(self.rebuild_matrix(), self.partition.clone())
    }

    /// Largest `|<Ψ_i|Ψ_j>|` over `i != j`.
    pub fn orthogonality_residual(&self) -> f64 {
        let g = self.vectors.adjoint() * &self.vectors;
        let mut worst: f64 = 0.0;
        for i in 0..g.nrows() {
            for j in 0..g.ncols() {
                if i != j {
                    worst = worst.max(g[(i, j)].norm());
                }
            }
        }
        worst
    }

    /// Gaps between consecutive probabilities.
    pub fn gaps(&self) -> Vec<f64> {
        self.probabilities.windows(2).map(|w| w[0] - w[1]).collect()
    }
}

/// Eigenvalue/eigenvector pairs of `rho` with the deterministic ordering of [`linalg::eigh`].
pub fn spectral_decompose(rho: &DensityMatrix) -> EpistemicState {
    let e = linalg::eigh(rho.entries());
    EpistemicState {
        probabilities: e.values.iter().map(|&x| x.clamp(0.0, 1.0)).collect(),
        vectors: e.vectors,
        partition: rho.partition().clone(),
    }
}
