use serde::Serialize;

use super::cond_probs::{check_dynamical_inputs, coarse_grained_cond_probs, transition_matrix};
use crate::channels::choi::{conditional_state, doubled};
use crate::channels::KrausChannel;
use crate::error::{Error, Result};
use crate::hilbert::linalg::{self, CMatrix};
use crate::hilbert::partial_trace::trace_out;
use crate::hilbert::partition::GroupLayout;
use crate::hilbert::{partial_trace, DensityMatrix, EpistemicState, Tolerances};

/// Largest deviation between `p(j | i)` and the diagonal elements
/// `<ψ_j(t') ⊗ ψ_i(t)| ϱ |ψ_j(t') ⊗ ψ_i(t)>` of the channel's conditional state.
pub fn leifer_spekkens_check(
    channel: &KrausChannel,
    epi_t: &EpistemicState,
    epi_t2: &EpistemicState,
) -> Result<f64> {
    check_dynamical_inputs(channel, epi_t, epi_t2)?;
    let p = transition_matrix(channel.ops(), epi_t.vectors(), epi_t2.vectors());
    let cs = conditional_state(channel);
    let mut worst: f64 = 0.0;
    for i in 0..epi_t.len() {
        let phi = epi_t.vector(i);
        for j in 0..epi_t2.len() {
            let d = cs.diagonal_element(&epi_t2.vector(j), &phi);
            worst = worst.max((d - p[(j, i)]).abs());
        }
    }
    Ok(worst)
}

/// Checks on the coarse-grained subsystem conditional state
/// `ϱ_{Q'|Q} = (1 ⊗ ρ_Q^{-1/2}) Tr_{E',E}[(1 ⊗ ρ_W^{1/2}) ϱ_W (1 ⊗ ρ_W^{1/2})] (1 ⊗ ρ_Q^{-1/2})`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoarseConditionalCheck {
    /// `max |Tr_Q[ϱ_{Q'|Q} (1 ⊗ ρ_Q)] - Tr_E E_W(ρ_W)|`.
    pub propagation_residual: f64,
    /// Largest deviation of the diagonal elements from the coarse-grained conditional probabilities.
    pub probability_deviation: f64,
}

pub fn coarse_conditional_state(channel_w: &KrausChannel, rho_w: &DensityMatrix, q_labels: &[&str]) -> Result<CMatrix> {
    let parent = rho_w.partition();
    if channel_w.input() != parent || channel_w.output() != parent {
        return Err(Error::InvalidPartition(format!("channel does not act on {parent}")));
    }
    let tol = Tolerances::default();
    let dw = parent.total_dim();
    let rho_q = partial_trace(rho_w, q_labels)?;
    let dq = rho_q.dim();
    let big = conditional_state(channel_w);
    let root = linalg::sqrt_psd(rho_w.entries());
    let lift = linalg::kron(&linalg::identity(dw), &root);
    let sandwiched = &lift * big.entries() * &lift;
    let doubled_p = doubled(parent, parent)?;
    let q_pos = parent.positions(q_labels)?;
    let keep: Vec<usize> = q_pos
        .iter()
        .copied()
        .chain(q_pos.iter().map(|&p| p + parent.len()))
        .collect();
    let reduced = trace_out(&sandwiched, &GroupLayout::split(&doubled_p, &keep)?);
    let s = linalg::pinv_sqrt(rho_q.entries(), tol.psd);
    let side = linalg::kron(&linalg::identity(dq), &s);
    Ok(&side * reduced * &side)
}

pub fn coarse_conditional_check(
    channel_w: &KrausChannel,
    rho_w: &DensityMatrix,
    q_labels: &[&str],
) -> Result<CoarseConditionalCheck> {
    let cs = coarse_conditional_state(channel_w, rho_w, q_labels)?;
    let rho_q = partial_trace(rho_w, q_labels)?;
    let dq = rho_q.dim();
    let propagated = CMatrix::from_fn(dq, dq, |o, p| {
        let mut s = linalg::ZERO;
        for i in 0..dq {
            for j in 0..dq {
                s += cs[(o * dq + i, p * dq + j)] * rho_q.entries()[(j, i)];
            }
        }
        s
    });
    let evolved = partial_trace(&channel_w.apply(rho_w)?, q_labels)?;
    let propagation_residual = linalg::max_abs_diff(&propagated, evolved.entries());
    let cg = coarse_grained_cond_probs(channel_w, rho_w, q_labels)?;
    let mut worst: f64 = 0.0;
    for i in 0..dq {
        for j in 0..dq {
            let v = linalg::kron_vec(&cg.evolved.vector(j), &cg.initial.vector(i));
            let d = linalg::inner(&v, &(&cs * &v)).re;
            worst = worst.max((d - cg.probabilities[(j, i)]).abs());
        }
    }
    Ok(CoarseConditionalCheck {
        propagation_residual,
        probability_deviation: worst,
    })
}
