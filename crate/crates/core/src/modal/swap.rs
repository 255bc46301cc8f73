use num_complex::Complex64;
use serde::Serialize;

use super::cond_probs::transition_matrix;
use super::matching::match_eigenstates;
use crate::error::{Error, Result};
use crate::hilbert::linalg::{self, r, CMatrix};

/// Near-degenerate 2×2 density-matrix block
/// `[[ρ0 + (t - t0)/τ, ρ0 ξ], [ρ0 ξ*, ρ0 - (t - t0)/τ]]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SwapBlockModel {
    pub rho0: f64,
    pub xi: Complex64,
    pub tau: f64,
    pub t0: f64,
}

impl SwapBlockModel {
    pub fn new(rho0: f64, xi: Complex64, tau: f64, t0: f64) -> Result<Self> {
        if !(rho0 > 0.0 && rho0 <= 1.0) {
            return Err(Error::InvalidModel(format!("rho0 must lie in (0, 1], got {rho0}")));
        }
        if !(xi.norm() > 0.0 && xi.norm() < 1.0) {
            return Err(Error::InvalidModel(format!("|xi| must lie in (0, 1), got {}", xi.norm())));
        }
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::InvalidModel(format!("tau must be positive, got {tau}")));
        }
        if !t0.is_finite() {
            return Err(Error::InvalidModel("t0 must be finite".into()));
        }
        Ok(Self { rho0, xi, tau, t0 })
    }

    pub fn block(&self, t: f64) -> CMatrix {
        let d = (t - self.t0) / self.tau;
        let off = self.xi * self.rho0;
        CMatrix::from_row_slice(2, 2, &[r(self.rho0 + d), off, off.conj(), r(self.rho0 - d)])
    }

    /// Closed-form eigenvalues `ρ0 ± sqrt(((t - t0)/τ)² + ρ0² |ξ|²)`, descending.
    pub fn analytic_eigenvalues(&self, t: f64) -> [f64; 2] {
        let d = (t - self.t0) / self.tau;
        let h = (d * d + (self.rho0 * self.xi.norm()).powi(2)).sqrt();
        [self.rho0 + h, self.rho0 - h]
    }

    /// `δt_swap = ρ0 |ξ| τ`.
    pub fn swap_time(&self) -> f64 {
        self.rho0 * self.xi.norm() * self.tau
    }

    /// Eigenvalue gap at closest approach, `2 ρ0 |ξ|`.
    pub fn minimum_gap(&self) -> f64 {
        2.0 * self.rho0 * self.xi.norm()
    }
}

/// Eigenvalue and eigenvector curves across an avoided crossing, plus the
/// conditional probabilities of following a label versus following a state.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SwapReport {
    pub times: Vec<f64>,
    /// Descending eigenvalues at each time.
    pub eigenvalues: Vec<[f64; 2]>,
    pub gaps: Vec<f64>,
    /// `|<Ψ_i(t)|Ψ_i(times[0])>|²` for labels 0 and 1.
    pub label_overlaps: Vec<[f64; 2]>,
    pub gap_at_t0: f64,
    pub analytic_gap_at_t0: f64,
    pub swap_time: f64,
    /// Half-width `Δt = 10 δt_swap` of the window straddling `t0`.
    pub window_half_width: f64,
    /// `p(i; t0 + Δt | i; t0 - Δt)` maximized over labels `i`.
    pub label_following: f64,
    /// `p(m(i); t0 + Δt | i; t0 - Δt)` minimized over `i`, with `m` the overlap matching.
    pub state_following: f64,
    /// `|<Ψ_i(t0 + Δt)|Ψ_i(t0 - Δt)>|²` maximized over labels.
    pub same_label_overlap: f64,
    /// `max_j |<Ψ_j(t0 + Δt)|Ψ_i(t0 - Δt)>|²` over the swapped label, minimized over `i`.
    pub swapped_label_overlap: f64,
    pub matching: Vec<usize>,
    /// `p(j | i)` at `[j][i]` across the window.
    pub window_conditionals: Vec<Vec<f64>>,
}

pub fn eigenstate_swap_analysis(model: &SwapBlockModel, times: &[f64]) -> Result<SwapReport> {
    if model.xi.norm() == 0.0 {
        return Err(Error::InvalidModel("xi must be nonzero".into()));
    }
    let decomp: Vec<linalg::Eigh> = times.iter().map(|&t| linalg::eigh(&model.block(t))).collect();
    let eigenvalues: Vec<[f64; 2]> = decomp.iter().map(|e| [e.values[0], e.values[1]]).collect();
    let gaps = eigenvalues.iter().map(|v| v[0] - v[1]).collect();
    let label_overlaps = match decomp.first() {
        Some(first) => decomp
            .iter()
            .map(|e| {
                [
                    linalg::inner(&e.vector(0), &first.vector(0)).norm_sqr(),
                    linalg::inner(&e.vector(1), &first.vector(1)).norm_sqr(),
                ]
            })
            .collect(),
        None => vec![],
    };
    let at_t0 = linalg::eigh(&model.block(model.t0));
    let dt = 10.0 * model.swap_time();
    let before = linalg::eigh(&model.block(model.t0 - dt));
    let after = linalg::eigh(&model.block(model.t0 + dt));
    // the block is frozen across the window: identity channel
    let p = transition_matrix(&[linalg::identity(2)], &before.vectors, &after.vectors);
    let matching = match_eigenstates(&before.vectors, &after.vectors);
    let label_following = (0..2).map(|i| p[(i, i)]).fold(0.0, f64::max);
    let state_following = (0..2).map(|i| p[(matching[i], i)]).fold(1.0, f64::min);
    let same_label_overlap = (0..2)
        .map(|i| linalg::inner(&after.vector(i), &before.vector(i)).norm_sqr())
        .fold(0.0, f64::max);
    let swapped_label_overlap = (0..2)
        .map(|i| linalg::inner(&after.vector(1 - i), &before.vector(i)).norm_sqr())
        .fold(1.0, f64::min);
    Ok(SwapReport {
        times: times.to_vec(),
        eigenvalues,
        gaps,
        label_overlaps,
        gap_at_t0: at_t0.values[0] - at_t0.values[1],
        analytic_gap_at_t0: model.minimum_gap(),
        swap_time: model.swap_time(),
        window_half_width: dt,
        label_following,
        state_following,
        same_label_overlap,
        swapped_label_overlap,
        matching,
        window_conditionals: (0..2).map(|j| (0..2).map(|i| p[(j, i)]).collect()).collect(),
    })
}

/// `n` evenly spaced times over `[t0 - half_width, t0 + half_width]`.
pub fn window_times(model: &SwapBlockModel, half_width: f64, n: usize) -> Vec<f64> {
    if n < 2 {
        return vec![model.t0];
    }
    (0..n)
        .map(|k| model.t0 - half_width + 2.0 * half_width * k as f64 / (n - 1) as f64)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::linalg::c;

    fn model() -> SwapBlockModel {
        SwapBlockModel::new(0.5, c(1e-4, 0.0), 1.0, 0.0).unwrap()
    }

    #[test]
    fn gap_at_closest_approach() {
        let m = model();
        let rep = eigenstate_swap_analysis(&m, &window_times(&m, 1e-3, 11)).unwrap();
        assert!((rep.gap_at_t0 - 2.0 * 0.5 * 1e-4).abs() < 1e-12);
        for (t, ev) in rep.times.iter().zip(rep.eigenvalues.iter()) {
            let a = m.analytic_eigenvalues(*t);
            assert!((ev[0] - a[0]).abs() < 1e-12 && (ev[1] - a[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn labels_swap_but_states_persist() {
        let m = model();
        let rep = eigenstate_swap_analysis(&m, &[]).unwrap();
        assert!(rep.same_label_overlap <= 0.05);
        assert!(rep.swapped_label_overlap >= 0.95);
        assert!(rep.label_following <= 0.05);
        assert!(rep.state_following >= 0.95);
        assert_eq!(rep.matching, vec![1, 0]);
    }

    #[test]
    fn complex_xi_and_validation() {
        let m = SwapBlockModel::new(0.3, c(0.0, 2e-3), 2.0, 1.0).unwrap();
        let rep = eigenstate_swap_analysis(&m, &[1.0]).unwrap();
        assert!((rep.gap_at_t0 - 2.0 * 0.3 * 2e-3).abs() < 1e-12);
        assert!(SwapBlockModel::new(0.5, c(0.0, 0.0), 1.0, 0.0).is_err());
        assert!(SwapBlockModel::new(0.0, c(1e-3, 0.0), 1.0, 0.0).is_err());
        assert!(SwapBlockModel::new(0.5, c(1e-3, 0.0), -1.0, 0.0).is_err());
    }
}
