use crate::error::{Error, Result};
use crate::hilbert::linalg;
use crate::hilbert::operator::embed_matrix;
use crate::hilbert::{partial_trace, DensityMatrix, Operator, Tolerances};

/// Nonlinear assignment map lifting a subsystem operator `X` on `Q` to the parent `W = Q + E`:
///
/// `A[X] = ρ_W^{1/2} (ρ_Q^{-1/2} X ρ_Q^{-1/2} ⊗ 1_E) ρ_W^{1/2}`,
///
/// with `ρ_Q^{-1/2}` the pseudo-inverse on the support of `ρ_Q`.
pub fn assignment_map(rho_w: &DensityMatrix, q_labels: &[&str], x: &Operator) -> Result<Operator> {
    assignment_map_with(rho_w, q_labels, x, &Tolerances::default())
}

pub fn assignment_map_with(
    rho_w: &DensityMatrix,
    q_labels: &[&str],
    x: &Operator,
    tol: &Tolerances,
) -> Result<Operator> {
    let parent = rho_w.partition();
    let rho_q = partial_trace(rho_w, q_labels)?;
    let order: Vec<&str> = rho_q.partition().labels().iter().map(String::as_str).collect();
    let x_local = if x.partition() == rho_q.partition() {
        x.entries().clone()
    } else {
        x.permuted(&order)?.into_entries()
    };
    if x_local.nrows() != rho_q.dim() {
        return Err(Error::DimensionMismatch { expected: rho_q.dim(), got: x_local.nrows() });
    }
    let support = linalg::support_projector(rho_q.entries(), tol.psd);
    let projected = &support * &x_local * &support;
    let leak = linalg::max_abs_diff(&projected, &x_local);
    if leak > tol.herm.max(tol.psd) {
        return Err(Error::OutsideSupport(leak));
    }
    let s = linalg::pinv_sqrt(rho_q.entries(), tol.psd);
    let inner = &s * projected * &s;
    let pos = parent.positions(&order)?;
    let lifted = embed_matrix(&inner, parent, &pos)?;
    let root = linalg::sqrt_psd(rho_w.entries());
    Operator::new_with(&root * lifted * &root, parent.clone(), tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::linalg::max_abs_diff;
    use crate::hilbert::random::{random_density_matrix_on, rng_from_seed};
    use crate::hilbert::Partition;
    use crate::hilbert::linalg::CMatrix;

    fn assignment_matrix(rho_w: &DensityMatrix, q_labels: &[&str], x: &CMatrix) -> Result<CMatrix> {
        let rho_q = partial_trace(rho_w, q_labels)?;
        let op = Operator::new(x.clone(), rho_q.partition().clone())?;
        Ok(assignment_map(rho_w, q_labels, &op)?.into_entries())
    }

    fn qe() -> Partition {
        Partition::new([("Q", 2), ("E", 3)]).unwrap()
    }

    #[test]
    fn telescopes_on_rho_q() {
        let rho = random_density_matrix_on(qe(), 6, 1).unwrap();
        let rho_q = partial_trace(&rho, &["Q"]).unwrap();
        let a = assignment_map(&rho, &["Q"], rho_q.operator()).unwrap();
        assert!(max_abs_diff(a.entries(), rho.entries()) < 1e-10);
    }

    #[test]
    fn factorized_parent_gives_x_tensor_rho_e() {
        let rq = random_density_matrix_on(Partition::single("Q", 2), 2, 2).unwrap();
        let re = random_density_matrix_on(Partition::single("E", 3), 2, 3).unwrap();
        let rho = rq.tensor(&re).unwrap();
        let mut rng = rng_from_seed(4);
        let x = crate::hilbert::random::random_hermitian(2, &mut rng);
        let a = assignment_map(&rho, &["Q"], &Operator::new(x.clone(), Partition::single("Q", 2)).unwrap()).unwrap();
        assert!(max_abs_diff(a.entries(), &linalg::kron(&x, re.entries())) < 1e-10);
    }

    #[test]
    fn rank_deficient_support() {
        // ρ_W = |0><0| ⊗ σ_E: ρ_Q = |0><0|
        let re = random_density_matrix_on(Partition::single("E", 3), 3, 5).unwrap();
        let rq = DensityMatrix::diagonal(&[1.0, 0.0], Partition::single("Q", 2)).unwrap();
        let rho = rq.tensor(&re).unwrap();
        let x_in = linalg::from_real_rows(&[&[0.7, 0.0], &[0.0, 0.0]]);
        let a = assignment_matrix(&rho, &["Q"], &x_in).unwrap();
        assert!(a.iter().all(|z| z.re.is_finite() && z.im.is_finite()));
        assert!(max_abs_diff(&a, &linalg::kron(&x_in, re.entries())) < 1e-10);
        let x_out = linalg::from_real_rows(&[&[0.0, 0.0], &[0.0, 1.0]]);
        assert!(matches!(assignment_matrix(&rho, &["Q"], &x_out), Err(Error::OutsideSupport(_))));
    }

    #[test]
    fn preserves_positivity() {
        let rho = random_density_matrix_on(qe(), 3, 8).unwrap();
        let x = linalg::from_real_rows(&[&[0.2, 0.1], &[0.1, 0.6]]);
        let a = assignment_matrix(&rho, &["Q"], &x).unwrap();
        assert!(linalg::min_eigenvalue(&a) > -1e-12);
    }
}
