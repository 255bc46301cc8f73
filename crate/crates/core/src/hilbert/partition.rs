use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ordered tensor-product decomposition of a Hilbert space into labelled factors.
///
/// Basis indices are row-major over the factors: the first factor is the
/// most significant digit.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Partition {
    labels: Vec<String>,
    dims: Vec<usize>,
}

impl Partition {
    pub fn new<S: Into<String>>(factors: impl IntoIterator<Item = (S, usize)>) -> Result<Self> {
        let (labels, dims): (Vec<String>, Vec<usize>) =
            factors.into_iter().map(|(l, d)| (l.into(), d)).unzip();
        if labels.is_empty() {
            return Err(Error::InvalidPartition("no factors".into()));
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(Error::InvalidPartition(format!("duplicate label `{l}`")));
            }
        }
        if let Some(pos) = dims.iter().position(|&d| d == 0) {
            return Err(Error::InvalidPartition(format!(
                "factor `{}` has dimension 0",
                labels[pos]
            )));
        }
        Ok(Self { labels, dims })
    }

    /// A single unstructured factor.
    pub fn single(label: impl Into<String>, dim: usize) -> Self {
        Self::new([(label.into(), dim)]).expect("single factor with dim > 0")
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn position(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn dim_of(&self, label: &str) -> Result<usize> {
        Ok(self.dims[self.position(label)?])
    }

    pub fn contains(&self, label: &str) -> bool {
        self.labels.iter().any(|l| l == label)
    }

    /// Concatenation `self ⊗ other`; labels must stay unique.
    pub fn concat(&self, other: &Partition) -> Result<Partition> {
        Partition::new(
            self.labels
                .iter()
                .chain(other.labels.iter())
                .cloned()
                .zip(self.dims.iter().chain(other.dims.iter()).copied()),
        )
    }

    /// Positions of `labels` sorted into partition order.
    pub fn positions(&self, labels: &[&str]) -> Result<Vec<usize>> {
        if labels.is_empty() {
            return Err(Error::EmptySelection);
        }
        let mut pos = labels
            .iter()
            .map(|l| self.position(l))
            .collect::<Result<Vec<_>>>()?;
        pos.sort_unstable();
        if pos.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::BadGrouping("repeat a label".into()));
        }
        Ok(pos)
    }

    /// Sub-partition on `labels`, kept in this partition's order.
    pub fn subset(&self, labels: &[&str]) -> Result<Partition> {
        let pos = self.positions(labels)?;
        Ok(Partition {
            labels: pos.iter().map(|&p| self.labels[p].clone()).collect(),
            dims: pos.iter().map(|&p| self.dims[p]).collect(),
        })
    }

    /// Labels not in `labels`, in partition order.
    pub fn complement(&self, labels: &[&str]) -> Vec<String> {
        self.labels
            .iter()
            .filter(|l| !labels.contains(&l.as_str()))
            .cloned()
            .collect()
    }

    /// Same factors with every label suffixed by `suffix`.
    pub fn renamed(&self, suffix: &str) -> Partition {
        Partition {
            labels: self.labels.iter().map(|l| format!("{l}{suffix}")).collect(),
            dims: self.dims.clone(),
        }
    }

    /// Mixed-radix digits of a basis index.
    pub fn digits(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.dims.len()];
        for (slot, &d) in out.iter_mut().zip(self.dims.iter()).rev() {
            *slot = index % d;
            index /= d;
        }
        out
    }

    /// Inverse of [`Partition::digits`].
    pub fn index(&self, digits: &[usize]) -> usize {
        digits
            .iter()
            .zip(self.dims.iter())
            .fold(0, |acc, (&x, &d)| acc * d + x)
    }
}

impl std::fmt::Display for Partition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self
            .labels
            .iter()
            .zip(self.dims.iter())
            .map(|(l, d)| format!("{l}:{d}"))
            .collect();
        write!(f, "[{}]", parts.join(" ⊗ "))
    }
}

/// Index bookkeeping for a partition split into disjoint groups of factors.
///
/// For every basis index of the full space it stores the combined index of
/// each group, and conversely.
#[derive(Clone, Debug)]
pub(crate) struct GroupLayout {
    pub group_dims: Vec<usize>,
    /// Flat `[full_index * n_groups + g]`.
    coords: Vec<usize>,
    n_groups: usize,
}

impl GroupLayout {
    /// Groups must be disjoint and cover `partition`.
    pub fn new(partition: &Partition, groups: &[Vec<usize>]) -> Result<Self> {
        let mut seen = vec![false; partition.len()];
        for g in groups {
            if g.is_empty() {
                return Err(Error::BadGrouping("contain an empty group".into()));
            }
            for &p in g {
                if p >= partition.len() {
                    return Err(Error::BadGrouping(format!("reference factor {p}")));
                }
                if seen[p] {
                    return Err(Error::BadGrouping(format!(
                        "overlap on `{}`",
                        partition.labels[p]
                    )));
                }
                seen[p] = true;
            }
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::BadGrouping(format!(
                "do not cover `{}`",
                partition.labels[missing]
            )));
        }
        let sorted: Vec<Vec<usize>> = groups
            .iter()
            .map(|g| {
                let mut g = g.clone();
                g.sort_unstable();
                g
            })
            .collect();
        let group_dims: Vec<usize> = sorted
            .iter()
            .map(|g| g.iter().map(|&p| partition.dims[p]).product())
            .collect();
        let n_groups = groups.len();
        let total = partition.total_dim();
        let mut coords = vec![0; total * n_groups];
        let mut digits = vec![0usize; partition.len()];
        for full in 0..total {
            for (gi, g) in sorted.iter().enumerate() {
                coords[full * n_groups + gi] = g
                    .iter()
                    .fold(0, |acc, &p| acc * partition.dims[p] + digits[p]);
            }
            // increment mixed-radix counter
            for p in (0..partition.len()).rev() {
                digits[p] += 1;
                if digits[p] < partition.dims[p] {
                    break;
                }
                digits[p] = 0;
            }
        }
        Ok(Self {
            group_dims,
            coords,
            n_groups,
        })
    }

    /// Two-group layout `(selected, rest)`; `rest` may be empty.
    pub fn split(partition: &Partition, selected: &[usize]) -> Result<Self> {
        let rest: Vec<usize> = (0..partition.len())
            .filter(|p| !selected.contains(p))
            .collect();
        if rest.is_empty() {
            return Self::new(partition, &[selected.to_vec()]).map(|mut l| {
                l.group_dims.push(1);
                let total = partition.total_dim();
                l.coords = (0..total).flat_map(|i| [i, 0]).collect();
                l.n_groups = 2;
                l
            });
        }
        Self::new(partition, &[selected.to_vec(), rest])
    }

    pub fn coord(&self, full: usize, group: usize) -> usize {
        self.coords[full * self.n_groups + group]
    }

    pub fn total(&self) -> usize {
        self.coords.len() / self.n_groups
    }

    /// `table[a * d_rest + e]` = full index for a two-group layout.
    pub fn inverse_pair(&self) -> Vec<usize> {
        debug_assert_eq!(self.n_groups, 2);
        let d_rest = self.group_dims[1];
        let mut inv = vec![0; self.total()];
        for full in 0..self.total() {
            inv[self.coord(full, 0) * d_rest + self.coord(full, 1)] = full;
        }
        inv
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digits_round_trip() {
        let p = Partition::new([("A", 2), ("B", 3), ("C", 2)]).unwrap();
        assert_eq!(p.total_dim(), 12);
        for i in 0..12 {
            assert_eq!(p.index(&p.digits(i)), i);
        }
        assert_eq!(p.digits(7), vec![1, 0, 1]);
    }

    #[test]
    fn rejects_duplicate_labels_and_zero_dims() {
        assert!(Partition::new([("A", 2), ("A", 2)]).is_err());
        assert!(Partition::new([("A", 0)]).is_err());
        let a = Partition::single("A", 2);
        assert!(a.concat(&a).is_err());
    }

    #[test]
    fn subset_keeps_partition_order() {
        let p = Partition::new([("A", 2), ("B", 3), ("C", 4)]).unwrap();
        let s = p.subset(&["C", "A"]).unwrap();
        assert_eq!(s.labels(), &["A".to_string(), "C".to_string()]);
        assert_eq!(s.dims(), &[2, 4]);
        assert!(matches!(p.subset(&[]), Err(Error::EmptySelection)));
        assert!(matches!(p.subset(&["Z"]), Err(Error::UnknownLabel(_))));
    }

    #[test]
    fn layout_rejects_overlap_and_gaps() {
        let p = Partition::new([("A", 2), ("B", 2), ("C", 2)]).unwrap();
        assert!(GroupLayout::new(&p, &[vec![0, 1], vec![1, 2]]).is_err());
        assert!(GroupLayout::new(&p, &[vec![0], vec![2]]).is_err());
        let l = GroupLayout::new(&p, &[vec![2, 0], vec![1]]).unwrap();
        // full index 0b101 -> digits (1,0,1): group {A,C} = (1,1) -> 3, group {B} = 0
        assert_eq!(l.coord(5, 0), 3);
        assert_eq!(l.coord(5, 1), 0);
    }
}
