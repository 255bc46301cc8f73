use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};

/// Entries in `(-CLIP_THRESHOLD, 0)` are clipped to zero; anything lower is an error.
pub const CLIP_THRESHOLD: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Axis {
    pub label: String,
    pub outcomes: usize,
}

/// `p(i_1, …, i_n | w)` stored row-major with the parent index `w` outermost.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConditionalProbabilityTable {
    axes: Vec<Axis>,
    parent_count: usize,
    values: Vec<f64>,
    /// Smallest entry before clipping.
    min_raw_entry: f64,
    /// Parent indices whose rows were clipped and renormalized.
    clipped_parents: Vec<usize>,
    /// Epistemic probabilities of the parent ontic states, when known.
    parent_probabilities: Vec<f64>,
    /// Gaps between consecutive parent probabilities.
    parent_gaps: Vec<f64>,
}

impl ConditionalProbabilityTable {
    /// Validates and clips raw values.
    pub fn from_raw(axes: Vec<Axis>, parent_count: usize, raw: Vec<f64>) -> Result<Self> {
        let row_len: usize = axes.iter().map(|a| a.outcomes).product();
        if raw.len() != row_len * parent_count {
            return Err(Error::DimensionMismatch {
                expected: row_len * parent_count,
                got: raw.len(),
            });
        }
        let (values, min_raw_entry, clipped_parents) = clip_rows(raw, row_len)?;
        Ok(Self {
            axes,
            parent_count,
            values,
            min_raw_entry,
            clipped_parents,
            parent_probabilities: vec![],
            parent_gaps: vec![],
        })
    }

    pub(crate) fn with_parent_probabilities(mut self, probs: Vec<f64>) -> Self {
        self.parent_gaps = probs.windows(2).map(|w| w[0] - w[1]).collect();
        self.parent_probabilities = probs;
        self
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn parent_count(&self) -> usize {
        self.parent_count
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn min_raw_entry(&self) -> f64 {
        self.min_raw_entry
    }

    pub fn clipped_parents(&self) -> &[usize] {
        &self.clipped_parents
    }

    pub fn parent_probabilities(&self) -> &[f64] {
        &self.parent_probabilities
    }

    pub fn parent_gaps(&self) -> &[f64] {
        &self.parent_gaps
    }

    pub fn row_len(&self) -> usize {
        self.axes.iter().map(|a| a.outcomes).product()
    }

    pub fn row(&self, w: usize) -> &[f64] {
        let n = self.row_len();
        &self.values[w * n..(w + 1) * n]
    }

    fn flat(&self, outcome: &[usize]) -> usize {
        outcome
            .iter()
            .zip(self.axes.iter())
            .fold(0, |acc, (&i, a)| acc * a.outcomes + i)
    }

    pub fn get(&self, w: usize, outcome: &[usize]) -> f64 {
        self.row(w)[self.flat(outcome)]
    }

    /// Largest `|Σ_i p(i | w) - 1|` over parents.
    pub fn normalization_residual(&self) -> f64 {
        (0..self.parent_count)
            .map(|w| (self.row(w).iter().sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// `p(i_α | w)` obtained by summing out all other axes.
    pub fn axis_marginal(&self, w: usize, axis: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.axes[axis].outcomes];
        let inner: usize = self.axes[axis + 1..].iter().map(|a| a.outcomes).product();
        let n = self.axes[axis].outcomes;
        for (k, &v) in self.row(w).iter().enumerate() {
            out[(k / inner) % n] += v;
        }
        out
    }

    /// `Σ_w p_W(w) p(i_α | w)`; requires parent probabilities.
    pub fn weighted_marginal(&self, axis: usize, parent_probs: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.axes[axis].outcomes];
        for (w, &pw) in parent_probs.iter().enumerate().take(self.parent_count) {
            for (o, m) in out.iter_mut().zip(self.axis_marginal(w, axis)) {
                *o += pw * m;
            }
        }
        out
    }

    /// Single-axis table as a column-stochastic matrix with `p(j | i)` at `[j, i]`.
    pub fn to_matrix(&self) -> DMatrix<f64> {
        let n = self.row_len();
        DMatrix::from_fn(n, self.parent_count, |j, i| self.row(i)[j])
    }
}

/// Clips entries in `(-1e-12, 0)` and renormalizes the affected rows.
pub(crate) fn clip_rows(mut raw: Vec<f64>, row_len: usize) -> Result<(Vec<f64>, f64, Vec<usize>)> {
    let min_raw = raw.iter().copied().fold(f64::INFINITY, f64::min);
    if let Some(&bad) = raw.iter().find(|&&v| v < -CLIP_THRESHOLD || v.is_nan()) {
        return Err(Error::NegativeProbability(bad));
    }
    let mut clipped = vec![];
    if row_len > 0 {
        for (w, row) in raw.chunks_mut(row_len).enumerate() {
            if row.iter().any(|&v| v < 0.0) {
                for v in row.iter_mut() {
                    *v = v.max(0.0);
                }
                let s: f64 = row.iter().sum();
                if s > 0.0 {
                    for v in row.iter_mut() {
                        *v /= s;
                    }
                }
                clipped.push(w);
            }
        }
    }
    Ok((raw, if min_raw.is_finite() { min_raw } else { 0.0 }, clipped))
}

/// Clipped column-stochastic matrix from raw `p(j | i)` at `[j, i]`.
pub(crate) fn clip_matrix(raw: DMatrix<f64>) -> Result<(DMatrix<f64>, f64)> {
    let (rows, cols) = raw.shape();
    // column-major storage: one column per parent
    let (v, min, _) = clip_rows(raw.as_slice().to_vec(), rows)?;
    Ok((DMatrix::from_vec(rows, cols, v), min))
}

/// Checks that `m` is column-stochastic within `tol`.
pub fn check_column_stochastic(m: &DMatrix<f64>, tol: f64) -> Result<()> {
    if let Some(&bad) = m.iter().find(|&&v| v < -CLIP_THRESHOLD || !v.is_finite()) {
        return Err(Error::NotStochastic(format!("entry {bad} is not a probability")));
    }
    for (i, col) in m.column_iter().enumerate() {
        let s: f64 = col.iter().sum();
        if (s - 1.0).abs() > tol {
            return Err(Error::NotStochastic(format!("column {i} sums to {s}")));
        }
    }
    Ok(())
}
