use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hilbert::linalg::{self, CMatrix};
use crate::hilbert::state::permutation_map;
use crate::hilbert::{DensityMatrix, Partition, StateVector};

/// How a subsystem space `Q` sits inside the parent: `H_W = U (H_Q ⊗ H_rest)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SubsystemEmbedding {
    unitary: CMatrix,
    q_dim: usize,
}

impl SubsystemEmbedding {
    /// `unitary` maps the `Q ⊗ rest` ordering into the parent basis.
    pub fn new(unitary: CMatrix, q_dim: usize) -> Result<Self> {
        let d = unitary.nrows();
        if unitary.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, got: unitary.ncols() });
        }
        if q_dim == 0 || d % q_dim != 0 {
            return Err(Error::DimensionMismatch { expected: d, got: q_dim });
        }
        let res = linalg::max_abs_diff(&(unitary.adjoint() * &unitary), &linalg::identity(d));
        if res > 1e-9 {
            return Err(Error::InvalidModel(format!("embedding is not unitary (residual {res:.3e})")));
        }
        Ok(Self { unitary, q_dim })
    }

    /// Permutation embedding that places the factors `labels` first.
    pub fn from_labels(parent: &Partition, labels: &[&str]) -> Result<Self> {
        let q = parent.subset(labels)?;
        let rest = parent.complement(labels);
        let mut order: Vec<&str> = q.labels().iter().map(String::as_str).collect();
        order.extend(rest.iter().map(String::as_str));
        let reordered = crate::hilbert::state::permuted_partition(parent, &order)?;
        // map[i]: index in the reordered basis of parent basis state i
        let map = permutation_map(parent, &reordered)?;
        let d = parent.total_dim();
        let mut u = CMatrix::zeros(d, d);
        for (i, &j) in map.iter().enumerate() {
            u[(i, j)] = linalg::ONE;
        }
        Self::new(u, q.total_dim())
    }

    pub fn q_dim(&self) -> usize {
        self.q_dim
    }

    pub fn unitary(&self) -> &CMatrix {
        &self.unitary
    }

    /// `U (|ψ><ψ| ⊗ 1) U^dag`.
    pub fn lift_projector(&self, psi: &StateVector) -> Result<CMatrix> {
        if psi.dim() != self.q_dim {
            return Err(Error::DimensionMismatch { expected: self.q_dim, got: psi.dim() });
        }
        let rest = self.unitary.nrows() / self.q_dim;
        let local = linalg::kron(&linalg::outer(psi.amplitudes()), &linalg::identity(rest));
        Ok(&self.unitary * local * self.unitary.adjoint())
    }
}

/// `h(ψ, χ) = Tr_W[ρ_W (|ψ><ψ| ⊗ 1)(|χ><χ| ⊗ 1)]` with each factor placed by its embedding.
pub fn subsystem_inner_product(
    rho_w: &DensityMatrix,
    psi: &StateVector,
    psi_embedding: &SubsystemEmbedding,
    chi: &StateVector,
    chi_embedding: &SubsystemEmbedding,
) -> Result<Complex64> {
    for e in [psi_embedding, chi_embedding] {
        if e.unitary.nrows() != rho_w.dim() {
            return Err(Error::DimensionMismatch { expected: rho_w.dim(), got: e.unitary.nrows() });
        }
    }
    let a = psi_embedding.lift_projector(psi)?;
    let b = chi_embedding.lift_projector(chi)?;
    Ok((rho_w.entries() * a * b).trace())
}
