use serde::Serialize;

use super::linalg::{self, CMatrix};
use super::operator::{check_square, Operator};
use super::partition::Partition;
use super::state::StateVector;
use super::tolerances::Tolerances;
use crate::error::{Error, Result};

/// Hermitian, positive semi-definite operator with trace `1 - trace_deficit`.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    op: Operator,
    trace_deficit: f64,
}

impl DensityMatrix {
    /// Unit-trace density matrix.
    pub fn new(entries: CMatrix, partition: Partition) -> Result<Self> {
        Self::new_with(entries, partition, &Tolerances::default())
    }

    pub fn new_with(entries: CMatrix, partition: Partition, tol: &Tolerances) -> Result<Self> {
        Self::build(entries, partition, Some(0.0), tol)
    }

    /// Trace may fall below one; the shortfall is kept as `trace_deficit`.
    pub fn subnormalized(entries: CMatrix, partition: Partition) -> Result<Self> {
        Self::subnormalized_with(entries, partition, &Tolerances::default())
    }

    pub fn subnormalized_with(entries: CMatrix, partition: Partition, tol: &Tolerances) -> Result<Self> {
        Self::build(entries, partition, None, tol)
    }

    /// Trusted constructor for internally generated matrices; only symmetrizes.
    pub(crate) fn from_parts_unchecked(entries: CMatrix, partition: Partition) -> Self {
        let entries = linalg::hermitian_part(&entries);
        let tr = linalg::trace(&entries).re;
        DensityMatrix {
            op: Operator::new_with(entries, partition, &Tolerances { max_dim: usize::MAX, ..Default::default() })
                .expect("square matrix matching its partition"),
            trace_deficit: (1.0 - tr).max(0.0),
        }
    }

    fn build(entries: CMatrix, partition: Partition, deficit: Option<f64>, tol: &Tolerances) -> Result<Self> {
        check_square(&entries, &partition, tol)?;
        let herm = linalg::hermiticity_residual(&entries);
        if herm > tol.herm {
            return Err(Error::NotHermitian(herm));
        }
        let mut entries = linalg::hermitian_part(&entries);
        let eig = linalg::eigh(&entries);
        let min = eig.min_value();
        if min < -tol.psd {
            return Err(Error::NotPositive(min));
        }
        if min < 0.0 {
            entries = eig.map(|x| x.max(0.0));
        }
        let tr = linalg::trace(&entries).re;
        let trace_deficit = match deficit {
            Some(d) => {
                if (tr - (1.0 - d)).abs() > tol.trace {
                    return Err(Error::BadTrace {
                        trace: tr,
                        expected: 1.0 - d,
                    });
                }
                d
            }
            None => {
                if tr > 1.0 + tol.trace || tr < -tol.trace {
                    return Err(Error::BadTrace {
                        trace: tr,
                        expected: 1.0,
                    });
                }
                (1.0 - tr).max(0.0)
            }
        };
        Ok(DensityMatrix {
            op: Operator::new_with(entries, partition, tol)?,
            trace_deficit,
        })
    }

    pub fn from_pure(state: &StateVector) -> Result<Self> {
        Self::new(linalg::outer(state.amplitudes()), state.partition().clone())
    }

    pub fn maximally_mixed(partition: Partition) -> Result<Self> {
        let d = partition.total_dim();
        Self::new(linalg::identity(d) * linalg::r(1.0 / d as f64), partition)
    }

    /// Diagonal density matrix from a probability list.
    pub fn diagonal(probs: &[f64], partition: Partition) -> Result<Self> {
        let m = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            probs.len(),
            probs.iter().map(|&p| linalg::r(p)),
        ));
        Self::new(m, partition)
    }

    pub fn operator(&self) -> &Operator {
        &self.op
    }

    pub fn entries(&self) -> &CMatrix {
        self.op.entries()
    }

    pub fn partition(&self) -> &Partition {
        self.op.partition()
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn trace_deficit(&self) -> f64 {
        self.trace_deficit
    }

    pub fn trace(&self) -> f64 {
        self.op.trace().re
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::eigvalsh(self.entries())
            .into_iter()
            .map(|x| x.max(0.0))
            .collect()
    }

    pub fn tensor(&self, other: &DensityMatrix) -> Result<DensityMatrix> {
        let op = self.op.tensor(&other.op)?;
        let tr = op.trace().re;
        Ok(DensityMatrix {
            op,
            trace_deficit: (1.0 - tr).max(0.0),
        })
    }

    /// `Tr[ρ A]`.
    pub fn expectation(&self, a: &CMatrix) -> num_complex::Complex64 {
        (self.entries() * a).trace()
    }

    /// Same density matrix with its factors reordered.
    pub fn permuted(&self, order: &[&str]) -> Result<DensityMatrix> {
        Ok(DensityMatrix {
            op: self.op.permuted(order)?,
            trace_deficit: self.trace_deficit,
        })
    }

    /// Von Neumann entropy in nats.
    pub fn entropy(&self) -> f64 {
        von_neumann_entropy(self)
    }
}

/// `-Σ p ln p` over the spectrum (natural logarithm, `0 ln 0 = 0`).
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    shannon_entropy(&rho.eigenvalues())
}

pub fn shannon_entropy(probs: &[f64]) -> f64 {
    probs
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.ln())
        .sum::<f64>()
        .max(0.0)
}

/// Diagnostic summary of a candidate density matrix.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DensityDiagnostics {
    pub dim: usize,
    pub hermiticity_residual: f64,
    pub min_eigenvalue: f64,
    pub trace: f64,
    pub trace_imag: f64,
    /// `1 - Σ p_i`.
    pub decay_probability: f64,
    pub hermitian_ok: bool,
    pub positive_ok: bool,
    pub trace_ok: bool,
    pub valid: bool,
}

pub fn validate_density_matrix(m: &CMatrix) -> DensityDiagnostics {
    validate_density_matrix_with(m, &Tolerances::default())
}

pub fn validate_density_matrix_with(m: &CMatrix, tol: &Tolerances) -> DensityDiagnostics {
    let herm = linalg::hermiticity_residual(m);
    let ev = linalg::eigvalsh(m);
    let min = ev.last().copied().unwrap_or(0.0);
    let tr = linalg::trace(m);
    let sum: f64 = ev.iter().sum();
    let hermitian_ok = herm <= tol.herm;
    let positive_ok = min >= -tol.psd;
    let trace_ok = tr.im.abs() <= tol.trace && tr.re <= 1.0 + tol.trace && tr.re >= -tol.trace;
    DensityDiagnostics {
        dim: m.nrows(),
        hermiticity_residual: herm,
        min_eigenvalue: min,
        trace: tr.re,
        trace_imag: tr.im,
        decay_probability: 1.0 - sum,
        hermitian_ok,
        positive_ok,
        trace_ok,
        valid: hermitian_ok && positive_ok && trace_ok,
    }
}
