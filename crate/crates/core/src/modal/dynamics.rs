use nalgebra::DMatrix;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use serde::Serialize;

use super::cond_probs::dynamical_cond_probs_from_state;
use super::table::check_column_stochastic;
use crate::channels::KrausChannel;
use crate::error::{Error, Result};
use crate::hilbert::random::{rng_from_seed, split_seed};
use crate::hilbert::EpistemicState;

/// Column sums of a conditional matrix must be one within this tolerance.
pub const STOCHASTIC_TOL: f64 = 1e-10;

/// `p'_j = Σ_i p(j | i) p_i`.
pub fn propagate_epistemic(p: &[f64], cond: &DMatrix<f64>) -> Result<Vec<f64>> {
    if cond.ncols() != p.len() {
        return Err(Error::DimensionMismatch { expected: cond.ncols(), got: p.len() });
    }
    check_column_stochastic(cond, STOCHASTIC_TOL)?;
    Ok((0..cond.nrows())
        .map(|j| (0..p.len()).map(|i| cond[(j, i)] * p[i]).sum())
        .collect())
}

/// Transition rates `W(j | i) = (p(j; t + δt | i; t) - δ_ji) / δt` for a channel spanning `δt`.
pub fn transition_rates(channel: &KrausChannel, epi: &EpistemicState, dt: f64) -> Result<DMatrix<f64>> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidTime(format!("δt must be positive, got {dt}")));
    }
    let (p, _) = dynamical_cond_probs_from_state(channel, epi)?;
    let n = p.nrows().min(p.ncols());
    let mut w = p;
    for i in 0..n {
        w[(i, i)] -= 1.0;
    }
    Ok(w / dt)
}

/// Sequence of ontic-state indices at successive times.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OnticTrajectory {
    pub times: Vec<f64>,
    pub indices: Vec<usize>,
    pub seed: u64,
}

/// Sampled trajectories with per-time empirical occupation frequencies.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrajectoryEnsemble {
    pub seed: u64,
    pub trajectories: Vec<OnticTrajectory>,
    /// `occupation[t][i]`: fraction of trajectories in state `i` at step `t`.
    pub occupation: Vec<Vec<f64>>,
}

/// Samples `n` trajectories through a chain of column-stochastic matrices.
///
/// Trajectory `k` uses its own generator seeded with `split_seed(seed, k)`, so
/// the ensemble is identical for a given seed regardless of evaluation order.
/// Times default to `0, 1, …`.
pub fn sample_trajectories(
    cond_seq: &[DMatrix<f64>],
    initial: &[f64],
    n: usize,
    seed: u64,
) -> Result<TrajectoryEnsemble> {
    let times: Vec<f64> = (0..=cond_seq.len()).map(|t| t as f64).collect();
    sample_trajectories_at(cond_seq, initial, &times, n, seed)
}

pub fn sample_trajectories_at(
    cond_seq: &[DMatrix<f64>],
    initial: &[f64],
    times: &[f64],
    n: usize,
    seed: u64,
) -> Result<TrajectoryEnsemble> {
    if times.len() != cond_seq.len() + 1 {
        return Err(Error::DimensionMismatch { expected: cond_seq.len() + 1, got: times.len() });
    }
    let s: f64 = initial.iter().sum();
    if initial.iter().any(|&p| p < 0.0 || !p.is_finite()) || (s - 1.0).abs() > STOCHASTIC_TOL {
        return Err(Error::NotStochastic(format!("initial distribution sums to {s}")));
    }
    let mut width = initial.len();
    for (t, m) in cond_seq.iter().enumerate() {
        if m.ncols() != width {
            return Err(Error::NotStochastic(format!(
                "matrix {t} has {} columns but the previous step has {width} states",
                m.ncols()
            )));
        }
        check_column_stochastic(m, STOCHASTIC_TOL)?;
        width = m.nrows();
    }
    let init = WeightedIndex::new(initial).map_err(|e| Error::NotStochastic(e.to_string()))?;
    let steps: Vec<Vec<WeightedIndex<f64>>> = cond_seq
        .iter()
        .map(|m| {
            m.column_iter()
                .map(|c| {
                    let w: Vec<f64> = c.iter().map(|&v| v.max(0.0)).collect();
                    WeightedIndex::new(&w).map_err(|e| Error::NotStochastic(e.to_string()))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    let mut counts: Vec<Vec<usize>> = std::iter::once(initial.len())
        .chain(cond_seq.iter().map(|m| m.nrows()))
        .map(|w| vec![0; w])
        .collect();
    let mut trajectories = Vec::with_capacity(n);
    for k in 0..n {
        let tseed = split_seed(seed, k as u64);
        let mut rng = rng_from_seed(tseed);
        let mut idx = init.sample(&mut rng);
        let mut indices = Vec::with_capacity(times.len());
        indices.push(idx);
        counts[0][idx] += 1;
        for (t, dists) in steps.iter().enumerate() {
            idx = dists[idx].sample(&mut rng);
            indices.push(idx);
            counts[t + 1][idx] += 1;
        }
        trajectories.push(OnticTrajectory {
            times: times.to_vec(),
            indices,
            seed: tseed,
        });
    }
    let occupation = counts
        .into_iter()
        .map(|c| c.into_iter().map(|x| if n > 0 { x as f64 / n as f64 } else { 0.0 }).collect())
        .collect();
    Ok(TrajectoryEnsemble {
        seed,
        trajectories,
        occupation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::dephasing;
    use crate::hilbert::linalg::{c, r, CMatrix};
    use crate::hilbert::{spectral_decompose, DensityMatrix, Partition};

    #[test]
    fn identity_propagation() {
        let id = DMatrix::<f64>::identity(3, 3);
        let p = [0.2, 0.5, 0.3];
        assert_eq!(propagate_epistemic(&p, &id).unwrap(), p.to_vec());
        let bad = DMatrix::from_row_slice(2, 2, &[0.5, 0.5, 0.4, 0.5]);
        assert!(propagate_epistemic(&[0.5, 0.5], &bad).is_err());
    }

    #[test]
    fn rates_columns_sum_to_zero() {
        let q = Partition::single("Q", 2);
        let m = CMatrix::from_row_slice(2, 2, &[r(0.3), c(0.2, 0.0), c(0.2, 0.0), r(0.7)]);
        let rho = DensityMatrix::new(m, q.clone()).unwrap();
        let epi = spectral_decompose(&rho);
        let w = transition_rates(&KrausChannel::identity(q.clone()), &epi, 0.1).unwrap();
        assert!(w.abs().max() < 1e-10);
        let w = transition_rates(&dephasing(0.02, q.clone()).unwrap(), &epi, 0.01).unwrap();
        for col in w.column_iter() {
            assert!(col.sum().abs() < 1e-10);
        }
        assert!(transition_rates(&dephasing(0.02, q).unwrap(), &epi, 0.0).is_err());
    }

    #[test]
    fn delta_matrices_give_constant_trajectories() {
        let seq = vec![DMatrix::<f64>::identity(2, 2); 4];
        let ens = sample_trajectories(&seq, &[0.4, 0.6], 200, 3).unwrap();
        for tr in &ens.trajectories {
            assert!(tr.indices.windows(2).all(|w| w[0] == w[1]));
        }
        let again = sample_trajectories(&seq, &[0.4, 0.6], 200, 3).unwrap();
        assert_eq!(ens, again);
    }

    #[test]
    fn rejects_non_stochastic_sequences() {
        let bad = DMatrix::from_row_slice(2, 2, &[0.5, 0.5, 0.6, 0.5]);
        assert!(matches!(sample_trajectories(&[bad], &[0.5, 0.5], 10, 0), Err(Error::NotStochastic(_))));
        assert!(sample_trajectories(&[], &[0.5, 0.6], 10, 0).is_err());
    }
}
