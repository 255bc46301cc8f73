use serde::Serialize;

use super::kraus::KrausChannel;
use crate::error::{Error, Result};
use crate::hilbert::linalg::{self, CMatrix};
use crate::hilbert::partition::GroupLayout;
use crate::hilbert::partial_trace::trace_out;
use crate::hilbert::{Partition, Tolerances};

/// Choi matrix `J = Σ_ij E(|i><j|) ⊗ |i><j|` on `output ⊗ input`.
///
/// Output labels carry a trailing `'`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChoiMatrix {
    entries: CMatrix,
    input: Partition,
    output: Partition,
}

impl ChoiMatrix {
    pub fn new(entries: CMatrix, input: Partition, output: Partition) -> Result<Self> {
        let d = input.total_dim() * output.total_dim();
        if entries.nrows() != d || entries.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, got: entries.nrows() });
        }
        Ok(Self { entries, input, output })
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn input(&self) -> &Partition {
        &self.input
    }

    pub fn output(&self) -> &Partition {
        &self.output
    }

    /// Doubled-space partition `output' ⊗ input`.
    pub fn doubled_partition(&self) -> Result<Partition> {
        doubled(&self.output, &self.input)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::eigvalsh(&self.entries)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        linalg::min_eigenvalue(&self.entries)
    }

    /// `Tr_out J`, which equals the identity exactly when the map is trace preserving.
    pub fn output_trace(&self) -> CMatrix {
        let p = Partition::new([("out", self.output.total_dim()), ("in", self.input.total_dim())])
            .expect("two distinct labels");
        let layout = GroupLayout::split(&p, &[1]).expect("valid split");
        trace_out(&self.entries, &layout)
    }

    pub fn diagnostics(&self) -> CptDiagnostics {
        let tol = Tolerances::default();
        let tp = linalg::max_abs_diff(&self.output_trace(), &linalg::identity(self.input.total_dim()));
        let herm = linalg::hermiticity_residual(&self.entries);
        let min = self.min_eigenvalue();
        CptDiagnostics {
            tp_residual: tp,
            choi_hermiticity_residual: herm,
            choi_min_eigenvalue: min,
            trace_preserving: tp <= tol.tp,
            completely_positive: herm <= tol.herm && min >= -tol.tp,
        }
    }

    /// Reads the action of the map off the Choi matrix.
    pub fn apply_matrix(&self, m: &CMatrix) -> CMatrix {
        let (d_out, d_in) = (self.output.total_dim(), self.input.total_dim());
        CMatrix::from_fn(d_out, d_out, |o, p| {
            let mut s = linalg::ZERO;
            for i in 0..d_in {
                for j in 0..d_in {
                    s += self.entries[(o * d_in + i, p * d_in + j)] * m[(i, j)];
                }
            }
            s
        })
    }
}

pub(crate) fn doubled(output: &Partition, input: &Partition) -> Result<Partition> {
    output.renamed("'").concat(input)
}

/// Trace-preservation and complete-positivity report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CptDiagnostics {
    /// `max |Σ E^dag E - 1|`.
    pub tp_residual: f64,
    pub choi_hermiticity_residual: f64,
    pub choi_min_eigenvalue: f64,
    pub trace_preserving: bool,
    pub completely_positive: bool,
}

pub fn verify_cpt(channel: &KrausChannel) -> CptDiagnostics {
    let mut d = choi(channel).diagnostics();
    d.tp_residual = channel.completeness_residual();
    d.trace_preserving = d.tp_residual <= Tolerances::default().tp;
    d
}

/// `vec(E)[o * d_in + i] = E[o, i]`.
fn vectorize(e: &CMatrix) -> linalg::CVector {
    let (d_out, d_in) = (e.nrows(), e.ncols());
    linalg::CVector::from_fn(d_out * d_in, |k, _| e[(k / d_in, k % d_in)])
}

pub fn choi(channel: &KrausChannel) -> ChoiMatrix {
    let d = channel.dim_in() * channel.dim_out();
    let entries = channel.ops().iter().fold(CMatrix::zeros(d, d), |acc, e| {
        let v = vectorize(e);
        acc + &v * v.adjoint()
    });
    ChoiMatrix {
        entries,
        input: channel.input().clone(),
        output: channel.output().clone(),
    }
}

/// Choi matrix of an arbitrary linear map given as a closure on matrices.
pub fn choi_of_map(
    map: impl Fn(&CMatrix) -> CMatrix,
    input: Partition,
    output: Partition,
) -> Result<ChoiMatrix> {
    let (d_in, d_out) = (input.total_dim(), output.total_dim());
    let d = d_in * d_out;
    let mut entries = CMatrix::zeros(d, d);
    for i in 0..d_in {
        for j in 0..d_in {
            let mut unit = CMatrix::zeros(d_in, d_in);
            unit[(i, j)] = linalg::ONE;
            let img = map(&unit);
            if img.nrows() != d_out || img.ncols() != d_out {
                return Err(Error::DimensionMismatch { expected: d_out, got: img.nrows() });
            }
            for o in 0..d_out {
                for p in 0..d_out {
                    entries[(o * d_in + i, p * d_in + j)] = img[(o, p)];
                }
            }
        }
    }
    Ok(ChoiMatrix { entries, input, output })
}

/// Kraus operators `E_k[o, i] = √λ_k v_k[o d_in + i]` from eigenpairs with `λ_k > ε_psd`.
pub fn kraus_from_choi(c: &ChoiMatrix) -> Result<KrausChannel> {
    kraus_from_choi_with(c, &Tolerances::default())
}

pub fn kraus_from_choi_with(c: &ChoiMatrix, tol: &Tolerances) -> Result<KrausChannel> {
    let herm = linalg::hermiticity_residual(&c.entries);
    if herm > tol.herm {
        return Err(Error::NotHermitian(herm));
    }
    let e = linalg::eigh(&c.entries);
    let min = e.min_value();
    if min < -tol.psd {
        return Err(Error::NotCompletelyPositive(min));
    }
    let (d_out, d_in) = (c.output.total_dim(), c.input.total_dim());
    let ops: Vec<CMatrix> = e
        .values
        .iter()
        .enumerate()
        .filter(|(_, &l)| l > tol.psd)
        .map(|(k, &l)| {
            let v = e.vector(k);
            CMatrix::from_fn(d_out, d_in, |o, i| v[o * d_in + i] * l.sqrt())
        })
        .collect();
    if ops.is_empty() {
        return Err(Error::NotCompletelyPositive(min));
    }
    KrausChannel::new_with(ops, c.input.clone(), c.output.clone(), tol)
}

/// Conditional state `ϱ` on `output' ⊗ input`: the Choi matrix partially transposed on the input.
///
/// Satisfies `ρ' = Tr_in[ϱ (1 ⊗ ρ)]`, and its diagonal elements in a product
/// basis `|ψ_j> ⊗ |φ_i>` are `<ψ_j| E(|φ_i><φ_i|) |ψ_j>`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConditionalState {
    entries: CMatrix,
    input: Partition,
    output: Partition,
}

impl ConditionalState {
    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn input(&self) -> &Partition {
        &self.input
    }

    pub fn output(&self) -> &Partition {
        &self.output
    }

    pub fn doubled_partition(&self) -> Result<Partition> {
        doubled(&self.output, &self.input)
    }

    /// `Tr_in[ϱ (1 ⊗ ρ)]`.
    pub fn propagate(&self, rho: &CMatrix) -> CMatrix {
        let (d_out, d_in) = (self.output.total_dim(), self.input.total_dim());
        CMatrix::from_fn(d_out, d_out, |o, p| {
            let mut s = linalg::ZERO;
            for i in 0..d_in {
                for j in 0..d_in {
                    s += self.entries[(o * d_in + i, p * d_in + j)] * rho[(j, i)];
                }
            }
            s
        })
    }

    /// `<ψ ⊗ φ| ϱ |ψ ⊗ φ>`.
    pub fn diagonal_element(&self, psi_out: &linalg::CVector, phi_in: &linalg::CVector) -> f64 {
        let v = linalg::kron_vec(psi_out, phi_in);
        linalg::inner(&v, &(&self.entries * &v)).re
    }
}

pub(crate) fn partial_transpose_input(m: &CMatrix, d_out: usize, d_in: usize) -> CMatrix {
    CMatrix::from_fn(d_out * d_in, d_out * d_in, |r, c| {
        let (o, i) = (r / d_in, r % d_in);
        let (p, j) = (c / d_in, c % d_in);
        m[(o * d_in + j, p * d_in + i)]
    })
}

pub fn conditional_state(channel: &KrausChannel) -> ConditionalState {
    let j = choi(channel);
    ConditionalState {
        entries: partial_transpose_input(&j.entries, channel.dim_out(), channel.dim_in()),
        input: channel.input().clone(),
        output: channel.output().clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::kraus::{depolarizing, random_channel};
    use crate::hilbert::linalg::{max_abs_diff, r};
    use crate::hilbert::random::random_density_matrix_on;

    fn q() -> Partition {
        Partition::single("Q", 2)
    }

    #[test]
    fn identity_choi_is_entangled_projector() {
        let j = choi(&KrausChannel::identity(q()));
        let omega = linalg::basis(4, 0) + linalg::basis(4, 3);
        assert!(max_abs_diff(j.entries(), &linalg::outer(&omega)) < 1e-15);
        assert_eq!(j.doubled_partition().unwrap().labels(), &["Q'".to_string(), "Q".to_string()]);
    }

    #[test]
    fn unitary_channel_is_cpt() {
        let ch = KrausChannel::unitary(linalg::hadamard(), q()).unwrap();
        let d = verify_cpt(&ch);
        assert!(d.tp_residual <= 1e-12 && d.choi_min_eigenvalue >= -1e-12);
        assert!(d.trace_preserving && d.completely_positive);
    }

    #[test]
    fn scaled_kraus_set_flags_tp() {
        let base = depolarizing(0.2, q()).unwrap();
        let ops = base.ops().iter().map(|e| e * r(0.9)).collect();
        let scaled = KrausChannel::trace_nonincreasing(ops, q(), q()).unwrap();
        let d = verify_cpt(&scaled);
        assert!((d.tp_residual - 0.19).abs() < 1e-12);
        assert!(!d.trace_preserving);
        assert!(d.completely_positive);
    }

    #[test]
    fn transpose_map_is_not_cp() {
        let j = choi_of_map(|m| m.transpose(), q(), q()).unwrap();
        let d = j.diagnostics();
        assert!(d.trace_preserving);
        assert!(!d.completely_positive);
        // swap operator: eigenvalues {1, 1, 1, -1}
        assert!((d.choi_min_eigenvalue + 1.0).abs() < 1e-12);
        assert!(matches!(kraus_from_choi(&j), Err(Error::NotCompletelyPositive(_))));
    }

    #[test]
    fn depolarizing_choi_spectrum() {
        let p = 0.3;
        let j = choi(&depolarizing(p, q()).unwrap());
        let mut ev = j.eigenvalues();
        ev.sort_by(|a, b| b.total_cmp(a));
        // (1-p)|Ω><Ω| + p/2 · 1: eigenvalues 2(1-p) + p/2 and p/2 (×3)
        assert!((ev[0] - (2.0 * (1.0 - p) + p / 2.0)).abs() < 1e-12);
        for &x in &ev[1..] {
            assert!((x - p / 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn round_trip_reproduces_action() {
        let p3 = Partition::single("Q", 3);
        let ch = random_channel(p3.clone(), 4, 21).unwrap();
        let back = kraus_from_choi(&choi(&ch)).unwrap();
        assert!(back.ops().len() <= 4);
        for seed in 0..5 {
            let rho = random_density_matrix_on(p3.clone(), 3, seed).unwrap();
            let a = ch.apply(&rho).unwrap();
            let b = back.apply(&rho).unwrap();
            assert!(max_abs_diff(a.entries(), b.entries()) < 1e-10);
            assert!(max_abs_diff(&choi(&ch).apply_matrix(rho.entries()), a.entries()) < 1e-12);
        }
    }

    #[test]
    fn conditional_state_propagates() {
        let h = KrausChannel::unitary(linalg::hadamard(), q()).unwrap();
        let cs = conditional_state(&h);
        let zero = linalg::outer(&linalg::basis(2, 0));
        let plus = linalg::from_real_rows(&[&[0.5, 0.5], &[0.5, 0.5]]);
        assert!(max_abs_diff(&cs.propagate(&zero), &plus) < 1e-15);

        let ch = random_channel(q(), 3, 2).unwrap();
        let cs = conditional_state(&ch);
        let rho = random_density_matrix_on(q(), 2, 4).unwrap();
        assert!(max_abs_diff(&cs.propagate(rho.entries()), ch.apply(&rho).unwrap().entries()) < 1e-12);
    }
}
