use nalgebra::DMatrix;

use super::table::{clip_matrix, Axis, ConditionalProbabilityTable};
use crate::channels::assignment::assignment_map_with;
use crate::channels::KrausChannel;
use crate::error::{Error, Result};
use crate::hilbert::linalg::{self, CMatrix};
use crate::hilbert::partial_trace::trace_out;
use crate::hilbert::partition::GroupLayout;
use crate::hilbert::{partial_trace, spectral_decompose, DensityMatrix, EpistemicState, Operator, Partition, Tolerances};

/// Tolerance for checking that supplied epistemic states match the channel output.
pub const CONSISTENCY_TOL: f64 = 1e-8;

/// Resolves label groups into sorted factor positions; groups must be disjoint and cover `parent`.
pub(crate) fn resolve_groups(parent: &Partition, groups: &[&[&str]]) -> Result<(Vec<Vec<usize>>, GroupLayout)> {
    let pos = groups
        .iter()
        .map(|g| parent.positions(g))
        .collect::<Result<Vec<_>>>()?;
    let layout = GroupLayout::new(parent, &pos)?;
    Ok((pos, layout))
}

fn axes_for(parent: &Partition, pos: &[Vec<usize>]) -> Vec<Axis> {
    pos.iter()
        .map(|g| Axis {
            label: g.iter().map(|&p| parent.labels()[p].as_str()).collect::<Vec<_>>().join("+"),
            outcomes: g.iter().map(|&p| parent.dims()[p]).product(),
        })
        .collect()
}

/// Columns are the product vectors `⊗_k |ψ_{k, i_k}>` indexed by the flattened outcome tuple.
fn product_basis(layout: &GroupLayout, epis: &[&EpistemicState]) -> CMatrix {
    let d = layout.total();
    let dims: Vec<usize> = epis.iter().map(|e| e.len()).collect();
    let n: usize = dims.iter().product();
    let mut b = CMatrix::zeros(d, n);
    let mut digits = vec![0usize; dims.len()];
    for col in 0..n {
        let mut rem = col;
        for k in (0..dims.len()).rev() {
            digits[k] = rem % dims[k];
            rem /= dims[k];
        }
        for f in 0..d {
            let mut amp = linalg::ONE;
            for (k, e) in epis.iter().enumerate() {
                amp *= e.vectors()[(layout.coord(f, k), digits[k])];
                if amp == linalg::ZERO {
                    break;
                }
            }
            b[(f, col)] = amp;
        }
    }
    b
}

fn subsystem_states(rho: &DensityMatrix, parent: &Partition, pos: &[Vec<usize>]) -> Result<Vec<EpistemicState>> {
    pos.iter()
        .map(|g| {
            let labels: Vec<&str> = g.iter().map(|&p| parent.labels()[p].as_str()).collect();
            Ok(spectral_decompose(&partial_trace(rho, &labels)?))
        })
        .collect()
}

/// Kinematical conditional probabilities `p(i_1, …, i_n | w) = <Ψ_w| ⊗_k P_{k, i_k} |Ψ_w>`.
///
/// All projectors come from the spectral decompositions of `ρ_W` and of its
/// reductions onto each group.
pub fn kinematical_cond_probs(rho_w: &DensityMatrix, groups: &[&[&str]]) -> Result<ConditionalProbabilityTable> {
    let parent = rho_w.partition();
    let (pos, layout) = resolve_groups(parent, groups)?;
    let epi_w = spectral_decompose(rho_w);
    let subs = subsystem_states(rho_w, parent, &pos)?;
    let refs: Vec<&EpistemicState> = subs.iter().collect();
    let b = product_basis(&layout, &refs);
    let amps = b.adjoint() * epi_w.vectors();
    let (n, dw) = (b.ncols(), epi_w.len());
    let mut raw = Vec::with_capacity(n * dw);
    for w in 0..dw {
        for i in 0..n {
            raw.push(amps[(i, w)].norm_sqr());
        }
    }
    Ok(ConditionalProbabilityTable::from_raw(axes_for(parent, &pos), dw, raw)?
        .with_parent_probabilities(epi_w.probabilities().to_vec()))
}

/// General conditional probabilities
/// `p(i_1, …, i_n; t' | w; t) = Tr[(⊗_k P_{k, i_k}(t')) E(P_w(t))]`.
///
/// `subsystem_epis_t2` must be the spectral decompositions of the reductions of
/// the evolved parent, in the order of `groups`.
pub fn general_cond_probs(
    channel: &KrausChannel,
    parent_epi_t: &EpistemicState,
    groups: &[&[&str]],
    subsystem_epis_t2: &[EpistemicState],
) -> Result<ConditionalProbabilityTable> {
    if parent_epi_t.partition() != channel.input() {
        return Err(Error::InvalidPartition(format!(
            "parent state on {} does not match channel input {}",
            parent_epi_t.partition(),
            channel.input()
        )));
    }
    let out = channel.output();
    let (pos, layout) = resolve_groups(out, groups)?;
    if subsystem_epis_t2.len() != pos.len() {
        return Err(Error::BadGrouping(format!(
            "need {} subsystem states, got {}",
            pos.len(),
            subsystem_epis_t2.len()
        )));
    }
    let evolved = channel.apply_matrix(&parent_epi_t.rebuild_matrix());
    let mut worst: f64 = 0.0;
    for (k, g) in pos.iter().enumerate() {
        let labels: Vec<&str> = g.iter().map(|&p| out.labels()[p].as_str()).collect();
        let sub = out.subset(&labels)?;
        if subsystem_epis_t2[k].partition() != &sub {
            return Err(Error::InvalidPartition(format!(
                "subsystem state {k} is on {} but the group is {}",
                subsystem_epis_t2[k].partition(),
                sub
            )));
        }
        let reduced = trace_out(&evolved, &GroupLayout::split(out, g)?);
        worst = worst.max(linalg::max_abs_diff(&reduced, &subsystem_epis_t2[k].rebuild_matrix()));
    }
    if worst > CONSISTENCY_TOL {
        return Err(Error::EpistemicInconsistency(worst));
    }
    let refs: Vec<&EpistemicState> = subsystem_epis_t2.iter().collect();
    let b = product_basis(&layout, &refs);
    let dw = parent_epi_t.len();
    let n = b.ncols();
    let mut raw = Vec::with_capacity(n * dw);
    for w in 0..dw {
        let m = channel.apply_matrix(&parent_epi_t.projector(w));
        let mb = &m * &b;
        for i in 0..n {
            raw.push(linalg::inner(&b.column(i).into_owned(), &mb.column(i).into_owned()).re);
        }
    }
    Ok(ConditionalProbabilityTable::from_raw(axes_for(out, &pos), dw, raw)?
        .with_parent_probabilities(parent_epi_t.probabilities().to_vec()))
}

/// Convenience wrapper deriving every epistemic state from `rho_w` and the channel.
pub fn general_cond_probs_from_state(
    channel: &KrausChannel,
    rho_w: &DensityMatrix,
    groups: &[&[&str]],
) -> Result<ConditionalProbabilityTable> {
    let epi = spectral_decompose(rho_w);
    let evolved = channel.apply(rho_w)?;
    let (pos, _) = resolve_groups(channel.output(), groups)?;
    let subs = subsystem_states(&evolved, channel.output(), &pos)?;
    general_cond_probs(channel, &epi, groups, &subs)
}

/// `Σ_k |<ψ_j| E_k |φ_i>|²` with `φ` the columns of `v_in` and `ψ` of `v_out`.
pub(crate) fn transition_matrix(ops: &[CMatrix], v_in: &CMatrix, v_out: &CMatrix) -> DMatrix<f64> {
    let mut p = DMatrix::zeros(v_out.ncols(), v_in.ncols());
    for e in ops {
        let m = v_out.adjoint() * e * v_in;
        p += m.map(|z| z.norm_sqr());
    }
    p
}

/// Dynamical conditional probabilities `p(j; t' | i; t) = Tr[P_j(t') E(P_i(t))]` at `[j, i]`.
///
/// Columns are indexed by the initial ontic state and sum to one.
pub fn dynamical_cond_probs(
    channel: &KrausChannel,
    epi_t: &EpistemicState,
    epi_t2: &EpistemicState,
) -> Result<DMatrix<f64>> {
    check_dynamical_inputs(channel, epi_t, epi_t2)?;
    let raw = transition_matrix(channel.ops(), epi_t.vectors(), epi_t2.vectors());
    Ok(clip_matrix(raw)?.0)
}

pub(crate) fn check_dynamical_inputs(
    channel: &KrausChannel,
    epi_t: &EpistemicState,
    epi_t2: &EpistemicState,
) -> Result<()> {
    if epi_t.partition() != channel.input() || epi_t2.partition() != channel.output() {
        return Err(Error::InvalidPartition(format!(
            "epistemic states on {} -> {} do not match channel {} -> {}",
            epi_t.partition(),
            epi_t2.partition(),
            channel.input(),
            channel.output()
        )));
    }
    let evolved = channel.apply_matrix(&epi_t.rebuild_matrix());
    let res = linalg::max_abs_diff(&evolved, &epi_t2.rebuild_matrix());
    if res > CONSISTENCY_TOL {
        return Err(Error::EpistemicInconsistency(res));
    }
    Ok(())
}

/// Dynamical conditional probabilities with `epi_t2` computed from the channel.
pub fn dynamical_cond_probs_from_state(
    channel: &KrausChannel,
    epi_t: &EpistemicState,
) -> Result<(DMatrix<f64>, EpistemicState)> {
    let evolved = channel.apply(&epi_t.rebuild())?;
    let epi_t2 = spectral_decompose(&evolved);
    Ok((dynamical_cond_probs(channel, epi_t, &epi_t2)?, epi_t2))
}

/// Result of [`coarse_grained_cond_probs`].
#[derive(Clone, Debug)]
pub struct CoarseGrained {
    /// `p_{Q⊂W}(j; t' | i; t)` at `[j, i]`.
    pub probabilities: DMatrix<f64>,
    pub initial: EpistemicState,
    pub evolved: EpistemicState,
}

/// Coarse-grained subsystem conditional probabilities
/// `p(j; t' | i; t) = Tr_W[(P_Q(j; t') ⊗ 1_E) E_W(A[P_Q(i; t)])]`
/// where `A` is the assignment map of `rho_w`.
pub fn coarse_grained_cond_probs(
    channel_w: &KrausChannel,
    rho_w: &DensityMatrix,
    q_labels: &[&str],
) -> Result<CoarseGrained> {
    if channel_w.input() != rho_w.partition() || channel_w.output() != rho_w.partition() {
        return Err(Error::InvalidPartition(format!(
            "channel {} -> {} does not act on {}",
            channel_w.input(),
            channel_w.output(),
            rho_w.partition()
        )));
    }
    let tol = Tolerances::default();
    let parent = rho_w.partition();
    let rho_q = partial_trace(rho_w, q_labels)?;
    let initial = spectral_decompose(&rho_q);
    let evolved_w = channel_w.apply(rho_w)?;
    let evolved = spectral_decompose(&partial_trace(&evolved_w, q_labels)?);
    let layout = GroupLayout::split(parent, &parent.positions(q_labels)?)?;
    let d = initial.len();
    let mut raw = DMatrix::zeros(d, d);
    for i in 0..d {
        let p_i = Operator::new(initial.projector(i), rho_q.partition().clone())?;
        let lifted = assignment_map_with(rho_w, q_labels, &p_i, &tol)?;
        let out = channel_w.apply_matrix(lifted.entries());
        let reduced = trace_out(&out, &layout);
        for j in 0..d {
            let v = evolved.vector(j);
            raw[(j, i)] = linalg::inner(&v, &(&reduced * &v)).re;
        }
    }
    Ok(CoarseGrained {
        probabilities: clip_matrix(raw)?.0,
        initial,
        evolved,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{dephasing, random_channel, random_channel_with_rng};
    use crate::hilbert::linalg::{c, r, CVector};
    use crate::hilbert::random::{random_density_matrix_on, random_unitary, rng_from_seed};
    use crate::hilbert::StateVector;

    #[test]
    fn product_parent_gives_delta_table() {
        let p = Partition::new([("A", 2), ("B", 3)]).unwrap();
        let a = StateVector::normalized(CVector::from_vec(vec![r(0.6), c(0.0, 0.8)]), Partition::single("A", 2)).unwrap();
        let b = StateVector::normalized(CVector::from_vec(vec![r(1.0), r(-1.0), c(0.0, 2.0)]), Partition::single("B", 3)).unwrap();
        let psi = a.tensor(&b).unwrap();
        assert_eq!(psi.partition(), &p);
        let rho = DensityMatrix::from_pure(&psi).unwrap();
        let t = kinematical_cond_probs(&rho, &[&["A"], &["B"]]).unwrap();
        // reduced states are pure: the top eigenvectors are a and b
        assert!((t.get(0, &[0, 0]) - 1.0).abs() < 1e-12);
        assert!(t.row(0).iter().skip(1).all(|&v| v < 1e-12));
    }

    #[test]
    fn rows_sum_to_one_tripartite() {
        let p = Partition::new([("A", 2), ("B", 2), ("C", 2)]).unwrap();
        let rho = random_density_matrix_on(p, 8, 17).unwrap();
        let t = kinematical_cond_probs(&rho, &[&["A"], &["B", "C"]]).unwrap();
        assert!(t.normalization_residual() < 1e-10);
        assert!(t.min_raw_entry() >= -1e-12);
        let t3 = kinematical_cond_probs(&rho, &[&["C"], &["A"], &["B"]]).unwrap();
        assert_eq!(t3.axes().len(), 3);
        assert!(t3.normalization_residual() < 1e-10);
        assert!(kinematical_cond_probs(&rho, &[&["A"], &["A", "B"]]).is_err());
        assert!(kinematical_cond_probs(&rho, &[&["A"], &["B"]]).is_err());
    }

    #[test]
    fn unitary_and_identity_are_deterministic() {
        let q = Partition::single("Q", 3);
        let rho = random_density_matrix_on(q.clone(), 3, 3).unwrap();
        let epi = spectral_decompose(&rho);
        let mut rng = rng_from_seed(1);
        let u = KrausChannel::unitary(random_unitary(3, &mut rng), q.clone()).unwrap();
        for ch in [KrausChannel::identity(q.clone()), u] {
            let (p, _) = dynamical_cond_probs_from_state(&ch, &epi).unwrap();
            assert!((p - DMatrix::<f64>::identity(3, 3)).abs().max() < 1e-10);
        }
    }

    #[test]
    fn dephasing_direct_trace() {
        let q = Partition::single("Q", 2);
        // non-diagonal input so dephasing is not trivial
        let m = CMatrix::from_row_slice(2, 2, &[r(0.3), c(0.1, 0.1), c(0.1, -0.1), r(0.7)]);
        let rho = DensityMatrix::new(m, q.clone()).unwrap();
        let ch = dephasing(0.5, q.clone()).unwrap();
        let epi = spectral_decompose(&rho);
        let (p, epi2) = dynamical_cond_probs_from_state(&ch, &epi).unwrap();
        for i in 0..2 {
            let out = ch.apply_matrix(&epi.projector(i));
            for j in 0..2 {
                let oracle = (epi2.projector(j) * &out).trace().re;
                assert!((p[(j, i)] - oracle).abs() < 1e-12);
            }
        }
        let bogus = spectral_decompose(&DensityMatrix::maximally_mixed(q).unwrap());
        assert!(matches!(dynamical_cond_probs(&ch, &epi, &bogus), Err(Error::EpistemicInconsistency(_))));
    }

    #[test]
    fn general_reduces_to_dynamical() {
        let q = Partition::single("Q", 2);
        let ch = random_channel(q.clone(), 2, 4).unwrap();
        let rho = random_density_matrix_on(q, 2, 5).unwrap();
        let g = general_cond_probs_from_state(&ch, &rho, &[&["Q"]]).unwrap();
        let (d, _) = dynamical_cond_probs_from_state(&ch, &spectral_decompose(&rho)).unwrap();
        assert!((g.to_matrix() - d).abs().max() < 1e-12);
    }

    #[test]
    fn general_marginalizes() {
        let p = Partition::new([("A", 2), ("B", 3)]).unwrap();
        let mut rng = rng_from_seed(9);
        let ch = random_channel_with_rng(p.clone(), p.clone(), 3, &mut rng).unwrap();
        let rho = random_density_matrix_on(p, 6, 10).unwrap();
        let t = general_cond_probs_from_state(&ch, &rho, &[&["A"], &["B"]]).unwrap();
        let evolved = ch.apply(&rho).unwrap();
        for (axis, label) in ["A", "B"].iter().enumerate() {
            let target = spectral_decompose(&partial_trace(&evolved, &[label]).unwrap());
            let m = t.weighted_marginal(axis, t.parent_probabilities());
            for (x, y) in m.iter().zip(target.probabilities()) {
                assert!((x - y).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn coarse_grained_factorized_equals_dynamical() {
        let q = Partition::single("Q", 2);
        let e = Partition::single("E", 2);
        let rq = random_density_matrix_on(q.clone(), 2, 1).unwrap();
        let re = random_density_matrix_on(e.clone(), 2, 2).unwrap();
        let chq = random_channel(q.clone(), 2, 3).unwrap();
        let che = random_channel(e, 2, 4).unwrap();
        let chw = chq.tensor(&che).unwrap();
        let cg = coarse_grained_cond_probs(&chw, &rq.tensor(&re).unwrap(), &["Q"]).unwrap();
        let (d, _) = dynamical_cond_probs_from_state(&chq, &spectral_decompose(&rq)).unwrap();
        assert!((cg.probabilities - d).abs().max() < 1e-10);
    }
}
