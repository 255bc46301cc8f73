use super::config::ParamSpec;
use super::report::Table;
use super::Run;
use crate::error::Result;
use crate::hilbert::linalg::{self, r, CMatrix, CVector};
use crate::hilbert::{reduced_from_pure, Partition, StateVector};

/// Qubit `+`/`-` as 0/1; detector `∅`, `"+"`, `"-"` as 0/1/2.
pub fn myrvold_partition() -> Partition {
    Partition::new([("1", 2), ("A", 3), ("2", 2), ("B", 3)]).expect("valid partition")
}

const PLUS_REC: usize = 1;
const MINUS_REC: usize = 5;

fn index(q1: usize, a: usize, q2: usize, b: usize) -> usize {
    myrvold_partition().index(&[q1, a, q2, b])
}

/// `(|+"+"+"+"> - |+"+"-"-"> - |-"-"+"+">) / √12 - √(9/12) |-"-"-"-">`.
pub fn psi_alpha() -> Result<StateVector> {
    let mut v = CVector::zeros(36);
    let s = 1.0 / 12f64.sqrt();
    v[index(0, 1, 0, 1)] = r(s);
    v[index(0, 1, 1, 2)] = r(-s);
    v[index(1, 2, 0, 1)] = r(-s);
    v[index(1, 2, 1, 2)] = r(-(0.75f64.sqrt()));
    StateVector::new(v, myrvold_partition())
}

/// `(-|aa'> + |ab'> + |ba'>) / √3` with `a = |+"+">` and `b = |-"-">` on each wing.
pub fn psi_beta() -> Result<StateVector> {
    let mut v = CVector::zeros(36);
    let s = 1.0 / 3f64.sqrt();
    v[index(0, 1, 0, 1)] = r(-s);
    v[index(0, 1, 1, 2)] = r(s);
    v[index(1, 2, 0, 1)] = r(s);
    StateVector::new(v, myrvold_partition())
}

/// Hadamard on the recorded pair `{|+"+">, |-"-">}` of one wing, identity elsewhere.
///
/// With `signed = false` the second column is `(a + b)/√2`, which is not unitary.
pub fn wing_hadamard(signed: bool) -> CMatrix {
    let mut u = linalg::identity(6);
    let s = 0.5f64.sqrt();
    u[(PLUS_REC, PLUS_REC)] = r(s);
    u[(MINUS_REC, PLUS_REC)] = r(s);
    u[(PLUS_REC, MINUS_REC)] = r(s);
    u[(MINUS_REC, MINUS_REC)] = r(if signed { -s } else { s });
    u
}

/// `|| (U_{1+A} ⊗ U_{2+B}) Ψ(α) - Ψ(β) ||`.
pub fn transport_residual(u: &CMatrix) -> Result<f64> {
    let full = linalg::kron(u, u);
    let out = full * psi_alpha()?.amplitudes();
    Ok((out - psi_beta()?.amplitudes()).norm())
}

fn qubit_spectrum(state: &StateVector) -> Result<(Vec<f64>, Vec<f64>)> {
    let rho = reduced_from_pure(state, &["1", "2"])?;
    let diag = (0..4).map(|i| rho.entries()[(i, i)].re).collect();
    Ok((rho.eigenvalues(), diag))
}

pub(super) fn params() -> Vec<ParamSpec> {
    vec![]
}

pub(super) fn run(ctx: &mut Run) -> Result<()> {
    let (spec_a, diag_a) = qubit_spectrum(&psi_alpha()?)?;
    let (spec_b, diag_b) = qubit_spectrum(&psi_beta()?)?;
    let max_dev = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
    let third = 1.0 / 3.0;
    ctx.at_most("spectrum_alpha", max_dev(&spec_a, &[0.75, 1.0 / 12.0, 1.0 / 12.0, 1.0 / 12.0]), 1e-12);
    ctx.at_most("spectrum_beta", max_dev(&spec_b, &[third, third, third, 0.0]), 1e-12);
    let u = wing_hadamard(true);
    let unitarity = linalg::max_abs_diff(&(u.adjoint() * &u), &linalg::identity(6));
    ctx.at_most("hadamard_unitarity", unitarity, 1e-12);
    let transported = linalg::kron(&u, &u) * psi_alpha()?.amplitudes();
    let transported = StateVector::new(transported, myrvold_partition())?;
    ctx.at_most("transport_residual", transport_residual(&u)?, 1e-12);
    let (spec_t, _) = qubit_spectrum(&transported)?;
    ctx.at_most("transported_spectrum", max_dev(&spec_t, &[third, third, third, 0.0]), 1e-12);
    ctx.approx("beta_minus_minus_weight", diag_b[3], 0.0, 1e-12);

    let unsigned = wing_hadamard(false);
    ctx.scalar(
        "unsigned_map_unitarity_residual",
        linalg::max_abs_diff(&(unsigned.adjoint() * &unsigned), &linalg::identity(6)),
    )?;
    ctx.scalar("unsigned_map_transport_residual", transport_residual(&unsigned)?)?;
    ctx.note(
        "the wing map sends |-,\"-\"> to (a - b)/sqrt(2); the unsigned variant (a + b)/sqrt(2) is not unitary \
         and does not carry the alpha state to the beta state",
    );
    ctx.spectrum("rho_1+2_alpha", spec_a)?;
    ctx.spectrum("rho_1+2_beta", spec_b)?;
    ctx.table(
        "qubit_pair_probabilities",
        Table::new(
            vec!["alpha".into(), "beta".into()],
            vec!["+,+".into(), "+,-".into(), "-,+".into(), "-,-".into()],
            vec![diag_a, diag_b],
        ),
    )?;
    Ok(())
}
