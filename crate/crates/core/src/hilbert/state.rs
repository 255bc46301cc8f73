use super::linalg::{self, CVector};
use super::partition::{GroupLayout, Partition};
use super::tolerances::Tolerances;
use crate::error::{Error, Result};

/// Normalized pure state on a partitioned space.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amplitudes: CVector,
    partition: Partition,
}

impl StateVector {
    pub fn new(amplitudes: CVector, partition: Partition) -> Result<Self> {
        Self::new_with(amplitudes, partition, &Tolerances::default())
    }

    pub fn new_with(amplitudes: CVector, partition: Partition, tol: &Tolerances) -> Result<Self> {
        check_len(amplitudes.len(), &partition, tol)?;
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > tol.norm {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self {
            amplitudes,
            partition,
        })
    }

    /// Divides by the norm; errors on the zero vector.
    pub fn normalized(amplitudes: CVector, partition: Partition) -> Result<Self> {
        check_len(amplitudes.len(), &partition, &Tolerances::default())?;
        let norm = amplitudes.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::ZeroVector);
        }
        Ok(Self {
            amplitudes: amplitudes / linalg::r(norm),
            partition,
        })
    }

    pub fn basis(partition: Partition, index: usize) -> Result<Self> {
        let d = partition.total_dim();
        if index >= d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: index,
            });
        }
        Self::new(linalg::basis(d, index), partition)
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn inner(&self, other: &StateVector) -> num_complex::Complex64 {
        linalg::inner(&self.amplitudes, &other.amplitudes)
    }

    pub fn tensor(&self, other: &StateVector) -> Result<StateVector> {
        self.tensor_with(other, &Tolerances::default())
    }

    pub fn tensor_with(&self, other: &StateVector, tol: &Tolerances) -> Result<StateVector> {
        let partition = self.partition.concat(&other.partition)?;
        check_len(self.dim() * other.dim(), &partition, tol)?;
        Ok(StateVector {
            amplitudes: linalg::kron_vec(&self.amplitudes, &other.amplitudes),
            partition,
        })
    }

    /// Amplitudes reshaped as a `d_keep × d_rest` matrix, with `keep` in partition order.
    pub fn as_bipartite_matrix(&self, keep: &[&str]) -> Result<linalg::CMatrix> {
        let pos = self.partition.positions(keep)?;
        let layout = GroupLayout::split(&self.partition, &pos)?;
        let (da, de) = (layout.group_dims[0], layout.group_dims[1]);
        let mut m = linalg::CMatrix::zeros(da, de);
        for (full, amp) in self.amplitudes.iter().enumerate() {
            m[(layout.coord(full, 0), layout.coord(full, 1))] = *amp;
        }
        Ok(m)
    }

    /// Same amplitudes with the factors reordered to `order`.
    pub fn permuted(&self, order: &[&str]) -> Result<StateVector> {
        let target = permuted_partition(&self.partition, order)?;
        let map = permutation_map(&self.partition, &target)?;
        let mut out = CVector::zeros(self.dim());
        for (i, amp) in self.amplitudes.iter().enumerate() {
            out[map[i]] = *amp;
        }
        Ok(StateVector {
            amplitudes: out,
            partition: target,
        })
    }
}

pub(crate) fn check_len(len: usize, partition: &Partition, tol: &Tolerances) -> Result<()> {
    let d = partition.total_dim();
    if len != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: len,
        });
    }
    if d > tol.max_state_dim {
        return Err(Error::DimensionLimit {
            dim: d,
            limit: tol.max_state_dim,
        });
    }
    Ok(())
}

pub(crate) fn permuted_partition(p: &Partition, order: &[&str]) -> Result<Partition> {
    if order.len() != p.len() {
        return Err(Error::BadGrouping(format!(
            "must list all {} factors for a reordering",
            p.len()
        )));
    }
    let factors = order
        .iter()
        .map(|l| Ok((l.to_string(), p.dim_of(l)?)))
        .collect::<Result<Vec<_>>>()?;
    Partition::new(factors)
}

/// `map[i]` = index in `target` of basis state `i` of `source`.
pub(crate) fn permutation_map(source: &Partition, target: &Partition) -> Result<Vec<usize>> {
    let pos = target
        .labels()
        .iter()
        .map(|l| source.position(l))
        .collect::<Result<Vec<_>>>()?;
    Ok((0..source.total_dim())
        .map(|i| {
            let d = source.digits(i);
            let td: Vec<usize> = pos.iter().map(|&p| d[p]).collect();
            target.index(&td)
        })
        .collect())
}
