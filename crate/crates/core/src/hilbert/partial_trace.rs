use super::density::DensityMatrix;
use super::linalg::CMatrix;
use super::partition::GroupLayout;
use super::state::StateVector;
use crate::error::Result;

/// Reduced density matrix on the factors in `keep`, ordered as in the parent partition.
pub fn partial_trace(rho: &DensityMatrix, keep: &[&str]) -> Result<DensityMatrix> {
    let p = rho.partition();
    let pos = p.positions(keep)?;
    let sub = p.subset(keep)?;
    let layout = GroupLayout::split(p, &pos)?;
    let reduced = trace_out(rho.entries(), &layout);
    Ok(DensityMatrix::from_parts_unchecked(reduced, sub))
}

pub(crate) fn trace_out(m: &CMatrix, layout: &GroupLayout) -> CMatrix {
    let da = layout.group_dims[0];
    let de = layout.group_dims[1];
    let inv = layout.inverse_pair();
    let mut out = CMatrix::zeros(da, da);
    for a in 0..da {
        for b in 0..da {
            let mut s = num_complex::Complex64::new(0.0, 0.0);
            for e in 0..de {
                s += m[(inv[a * de + e], inv[b * de + e])];
            }
            out[(a, b)] = s;
        }
    }
    out
}

/// Reduced density matrix of a pure state, computed as `M M^dag` on the reshaped amplitudes.
pub fn reduced_from_pure(state: &StateVector, keep: &[&str]) -> Result<DensityMatrix> {
    let m = state.as_bipartite_matrix(keep)?;
    let sub = state.partition().subset(keep)?;
    Ok(DensityMatrix::from_parts_unchecked(&m * m.adjoint(), sub))
}
