use super::config::ParamSpec;
use super::Run;
use crate::channels::{amplitude_damping, dephasing, random_channel_with_rng, KrausChannel, LindbladGenerator};
use crate::error::{Error, Result};
use crate::hilbert::linalg::{self, r, CVector};
use crate::hilbert::random::{random_density_matrix_with_rng, random_hermitian, random_unitary, rng_from_seed};
use crate::hilbert::{partial_trace, DensityMatrix, Partition, StateVector};

pub fn ab_partition() -> Partition {
    Partition::new([("A", 2), ("B", 2)]).expect("valid partition")
}

/// `(|00> + |11>) / √2` on `A ⊗ B`.
pub fn bell_pair() -> Result<DensityMatrix> {
    let s = 0.5f64.sqrt();
    let v = CVector::from_vec(vec![r(s), linalg::ZERO, linalg::ZERO, r(s)]);
    DensityMatrix::from_pure(&StateVector::new(v, ab_partition())?)
}

fn check_local(parent: &Partition, keep: &[&str], acts_on: &Partition) -> Result<()> {
    for l in acts_on.labels() {
        if keep.contains(&l.as_str()) {
            return Err(Error::NonLocalOperation(format!("operation acts on the observed factor `{l}`")));
        }
        if !parent.contains(l) {
            return Err(Error::UnknownLabel(l.clone()));
        }
    }
    Ok(())
}

/// `max |Tr_rest[ρ] - Tr_rest[(1 ⊗ E)(ρ)]|` on the factors `keep`.
pub fn no_communication_deviation(rho: &DensityMatrix, keep: &[&str], local: &KrausChannel) -> Result<f64> {
    check_local(rho.partition(), keep, local.input())?;
    let after = local.embed(rho.partition())?.apply(rho)?;
    Ok(linalg::max_abs_diff(
        partial_trace(rho, keep)?.entries(),
        partial_trace(&after, keep)?.entries(),
    ))
}

/// Same deviation for Lindblad evolution generated on the complement of `keep`.
pub fn lindblad_no_communication_deviation(
    rho: &DensityMatrix,
    keep: &[&str],
    generator: &LindbladGenerator,
    t: f64,
    step: f64,
) -> Result<f64> {
    check_local(rho.partition(), keep, generator.partition())?;
    let after = generator.embed(rho.partition())?.evolve(rho, t, step)?;
    Ok(linalg::max_abs_diff(
        partial_trace(rho, keep)?.entries(),
        partial_trace(&after, keep)?.entries(),
    ))
}

pub(super) fn params() -> Vec<ParamSpec> {
    vec![
        ParamSpec::new("state", "bell or random (seeded, full rank)", "bell"),
        ParamSpec::new("dephasing", "dephasing strength λ on B", 0.5),
        ParamSpec::new("damping", "amplitude-damping probability on B", 0.3),
        ParamSpec::new("kraus_count", "Kraus operators of the random channel on B", 3),
        ParamSpec::new("gamma", "Lindblad dephasing rate on B", 0.4),
        ParamSpec::new("t", "evolution time", 1.0),
        ParamSpec::new("step", "integrator step", 1e-3),
    ]
}

pub(super) fn run(ctx: &mut Run) -> Result<()> {
    let mut rng = rng_from_seed(ctx.seed);
    let rho = match ctx.params.string("state")?.as_str() {
        "bell" => bell_pair()?,
        "random" => random_density_matrix_with_rng(ab_partition(), 4, &mut rng)?,
        other => return Err(Error::Config(format!("unknown state `{other}` (expected bell or random)"))),
    };
    let lambda = ctx.params.f64("dephasing")?;
    let damping = ctx.params.f64("damping")?;
    let n_kraus = ctx.params.usize("kraus_count")?;
    let gamma = ctx.params.f64("gamma")?;
    let t = ctx.params.f64("t")?;
    let step = ctx.params.f64("step")?;
    let b = Partition::single("B", 2);
    let keep = ["A"];

    let u = KrausChannel::unitary(random_unitary(2, &mut rng), b.clone())?;
    let dev_u = no_communication_deviation(&rho, &keep, &u)?;
    let kraus = random_channel_with_rng(b.clone(), b.clone(), n_kraus, &mut rng)?;
    let dev_k = no_communication_deviation(&rho, &keep, &kraus)?;
    let dev_d = no_communication_deviation(&rho, &keep, &dephasing(lambda, b.clone())?)?;
    let dev_a = no_communication_deviation(&rho, &keep, &amplitude_damping(damping, b.clone())?)?;
    ctx.at_most("unitary_deviation", dev_u, 1e-12);
    ctx.at_most("kraus_deviation", dev_k, 1e-12);
    ctx.at_most("dephasing_deviation", dev_d, 1e-12);
    ctx.at_most("amplitude_damping_deviation", dev_a, 1e-12);

    let h_b = random_hermitian(2, &mut rng);
    let gen_b = LindbladGenerator::new(h_b.clone(), vec![linalg::pauli_z()], vec![gamma], b.clone())?;
    let dev_l = lindblad_no_communication_deviation(&rho, &keep, &gen_b, t, step)?;
    ctx.at_most("lindblad_deviation", dev_l, 1e-9);

    let h_a = random_hermitian(2, &mut rng);
    let a = Partition::single("A", 2);
    let ab = ab_partition();
    let h = linalg::kron(&h_a, &linalg::identity(2)) + linalg::kron(&linalg::identity(2), &h_b);
    let joint = LindbladGenerator::hamiltonian_only(h, ab)?.evolve(&rho, t, step)?;
    let rho_a = partial_trace(&rho, &keep)?;
    let alone = LindbladGenerator::hamiltonian_only(h_a.clone(), a)?.evolve(&rho_a, t, step)?;
    let joint_a = partial_trace(&joint, &keep)?;
    let side_by_side = linalg::max_abs_diff(joint_a.entries(), alone.entries());
    let ua = linalg::unitary_evolution(&h_a, t);
    let exact = &ua * rho_a.entries() * ua.adjoint();
    ctx.at_most("separable_side_by_side", side_by_side, 1e-9);
    ctx.at_most("separable_vs_exact", linalg::max_abs_diff(joint_a.entries(), &exact), 1e-8);

    let nonlocal = KrausChannel::unitary(random_unitary(4, &mut rng), ab_partition())?;
    let rejected = matches!(
        no_communication_deviation(&rho, &keep, &nonlocal),
        Err(Error::NonLocalOperation(_))
    );
    ctx.count("nonlocal_operation_rejected", usize::from(rejected), 1);

    for (name, v) in [
        ("unitary_deviation", dev_u),
        ("kraus_deviation", dev_k),
        ("dephasing_deviation", dev_d),
        ("amplitude_damping_deviation", dev_a),
        ("lindblad_deviation", dev_l),
        ("separable_side_by_side", side_by_side),
    ] {
        ctx.scalar(name, v)?;
    }
    ctx.spectrum("rho_A", rho_a.eigenvalues())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn local_operations_are_invisible() {
        let rho = bell_pair().unwrap();
        let b = Partition::single("B", 2);
        let ch = dephasing(1.0, b).unwrap();
        assert!(no_communication_deviation(&rho, &["A"], &ch).unwrap() < 1e-15);
    }

    #[test]
    fn operations_on_a_are_rejected() {
        let rho = bell_pair().unwrap();
        let ch = dephasing(1.0, Partition::single("A", 2)).unwrap();
        assert!(matches!(
            no_communication_deviation(&rho, &["A"], &ch),
            Err(Error::NonLocalOperation(_))
        ));
        let ch = dephasing(1.0, Partition::single("C", 2)).unwrap();
        assert!(matches!(no_communication_deviation(&rho, &["A"], &ch), Err(Error::UnknownLabel(_))));
    }

    #[test]
    fn reduced_state_does_change_when_operating_on_a() {
        let rho = DensityMatrix::from_pure(&StateVector::basis(ab_partition(), 0).unwrap()).unwrap();
        let flip = KrausChannel::unitary(linalg::pauli_x(), Partition::single("A", 2)).unwrap();
        let after = flip.embed(rho.partition()).unwrap().apply(&rho).unwrap();
        let d = linalg::max_abs_diff(
            partial_trace(&rho, &["A"]).unwrap().entries(),
            partial_trace(&after, &["A"]).unwrap().entries(),
        );
        assert!((d - 1.0).abs() < 1e-15);
    }
}
