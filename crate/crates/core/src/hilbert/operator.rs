use num_complex::Complex64;

use super::linalg::{self, CMatrix};
use super::partition::{GroupLayout, Partition};
use super::state::{permutation_map, permuted_partition, StateVector};
use super::tolerances::Tolerances;
use crate::error::{Error, Result};

/// Square operator on a partitioned space.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    entries: CMatrix,
    partition: Partition,
}

impl Operator {
    pub fn new(entries: CMatrix, partition: Partition) -> Result<Self> {
        Self::new_with(entries, partition, &Tolerances::default())
    }

    pub fn new_with(entries: CMatrix, partition: Partition, tol: &Tolerances) -> Result<Self> {
        check_square(&entries, &partition, tol)?;
        Ok(Self { entries, partition })
    }

    pub fn identity(partition: Partition) -> Result<Self> {
        let d = partition.total_dim();
        Self::new(linalg::identity(d), partition)
    }

    /// `|ψ><ψ|`.
    pub fn projector(state: &StateVector) -> Result<Self> {
        Self::new(linalg::outer(state.amplitudes()), state.partition().clone())
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn into_entries(self) -> CMatrix {
        self.entries
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn trace(&self) -> Complex64 {
        linalg::trace(&self.entries)
    }

    pub fn adjoint(&self) -> Operator {
        Operator {
            entries: self.entries.adjoint(),
            partition: self.partition.clone(),
        }
    }

    pub fn hermiticity_residual(&self) -> f64 {
        linalg::hermiticity_residual(&self.entries)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_residual() <= tol
    }

    pub fn apply(&self, state: &StateVector) -> Result<CMatrixVec> {
        if state.partition() != &self.partition {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: state.dim(),
            });
        }
        Ok(&self.entries * state.amplitudes())
    }

    /// `<ψ|A|ψ>`.
    pub fn expectation(&self, state: &StateVector) -> Result<Complex64> {
        let av = self.apply(state)?;
        Ok(linalg::inner(state.amplitudes(), &av))
    }

    pub fn tensor(&self, other: &Operator) -> Result<Operator> {
        self.tensor_with(other, &Tolerances::default())
    }

    pub fn tensor_with(&self, other: &Operator, tol: &Tolerances) -> Result<Operator> {
        let partition = self.partition.concat(&other.partition)?;
        let d = partition.total_dim();
        if d > tol.max_dim {
            return Err(Error::DimensionLimit {
                dim: d,
                limit: tol.max_dim,
            });
        }
        Ok(Operator {
            entries: linalg::kron(&self.entries, &other.entries),
            partition,
        })
    }

    pub fn product(&self, other: &Operator) -> Result<Operator> {
        if self.partition != other.partition {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        Ok(Operator {
            entries: &self.entries * &other.entries,
            partition: self.partition.clone(),
        })
    }

    /// Same operator with its factors reordered to `order`.
    pub fn permuted(&self, order: &[&str]) -> Result<Operator> {
        let target = permuted_partition(&self.partition, order)?;
        let map = permutation_map(&self.partition, &target)?;
        let d = self.dim();
        let mut out = CMatrix::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                out[(map[i], map[j])] = self.entries[(i, j)];
            }
        }
        Ok(Operator {
            entries: out,
            partition: target,
        })
    }

    /// `self ⊗ 1` placed on the matching factors of `parent`.
    pub fn embed(&self, parent: &Partition) -> Result<Operator> {
        self.embed_with(parent, &Tolerances::default())
    }

    pub fn embed_with(&self, parent: &Partition, tol: &Tolerances) -> Result<Operator> {
        let labels: Vec<&str> = self.partition.labels().iter().map(String::as_str).collect();
        let sub = parent.subset(&labels)?;
        if sub.dims() != self.permuted_dims(&sub)? {
            return Err(Error::DimensionMismatch {
                expected: sub.total_dim(),
                got: self.dim(),
            });
        }
        let local = if sub.labels() == self.partition.labels() {
            self.entries.clone()
        } else {
            let order: Vec<&str> = sub.labels().iter().map(String::as_str).collect();
            self.permuted(&order)?.entries
        };
        let d = parent.total_dim();
        if d > tol.max_dim {
            return Err(Error::DimensionLimit {
                dim: d,
                limit: tol.max_dim,
            });
        }
        let pos = parent.positions(&labels)?;
        Ok(Operator {
            entries: embed_matrix(&local, parent, &pos)?,
            partition: parent.clone(),
        })
    }

    fn permuted_dims(&self, target: &Partition) -> Result<Vec<usize>> {
        target
            .labels()
            .iter()
            .map(|l| self.partition.dim_of(l))
            .collect()
    }
}

pub type CMatrixVec = linalg::CVector;

pub(crate) fn check_square(m: &CMatrix, partition: &Partition, tol: &Tolerances) -> Result<()> {
    let d = partition.total_dim();
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch {
            expected: m.nrows(),
            got: m.ncols(),
        });
    }
    if m.nrows() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: m.nrows(),
        });
    }
    if d > tol.max_dim {
        return Err(Error::DimensionLimit {
            dim: d,
            limit: tol.max_dim,
        });
    }
    Ok(())
}

/// `local ⊗ 1` where `local` acts on factors `pos` (sorted) of `parent`.
pub(crate) fn embed_matrix(local: &CMatrix, parent: &Partition, pos: &[usize]) -> Result<CMatrix> {
    let layout = GroupLayout::split(parent, pos)?;
    let d = parent.total_dim();
    let inv = layout.inverse_pair();
    let de = layout.group_dims[1];
    let da = layout.group_dims[0];
    let mut out = CMatrix::zeros(d, d);
    for e in 0..de {
        for a in 0..da {
            let i = inv[a * de + e];
            for b in 0..da {
                let v = local[(a, b)];
                if v != linalg::ZERO {
                    out[(i, inv[b * de + e])] = v;
                }
            }
        }
    }
    Ok(out)
}
