use rand::Rng;
use rand_distr::StandardNormal;
use serde_json::json;

use super::config::ParamSpec;
use super::measurement::dominant_labels;
use super::report::Table;
use super::{dot, unit_vector, Run};
use crate::channels::{luders_channel, KrausChannel};
use crate::error::{Error, Result};
use crate::hilbert::linalg::{self, c, r, CVector};
use crate::hilbert::random::rng_from_seed;
use crate::hilbert::{partial_trace, spectral_decompose, DensityMatrix, Operator, Partition, StateVector};
use crate::modal::kinematical_cond_probs;

/// Parent eigenstates below this weight carry no conditional statement.
const SIGNIFICANT_WEIGHT: f64 = 1e-9;

const SPIN_PAIRS: [&str; 4] = ["up,up", "up,down", "down,up", "down,down"];

pub fn pair_partition() -> Partition {
    Partition::new([("1", 2), ("2", 2)]).expect("valid partition")
}

/// Perturbed singlet
/// `((1 + ε)|↑↓> - (1 - ε)|↓↑> + (ε/2)|↑↑> + (ε/2)|↓↓>) / √2`, renormalized.
pub fn epr_pair(eps: f64) -> Result<StateVector> {
    if !(eps >= 0.0 && eps.is_finite()) {
        return Err(Error::InvalidModel(format!("eps must be non-negative, got {eps}")));
    }
    let s = 0.5f64.sqrt();
    let v = CVector::from_vec(vec![
        r(s * eps / 2.0),
        r(s * (1.0 + eps)),
        r(-s * (1.0 - eps)),
        r(s * eps / 2.0),
    ]);
    StateVector::normalized(v, pair_partition())
}

/// `<(a·σ) ⊗ (b·σ)>` in units of `ħ/2` per spin.
pub fn spin_correlation(state: &StateVector, a: [f64; 3], b: [f64; 3]) -> Result<f64> {
    let (a, b) = (unit_vector(a)?, unit_vector(b)?);
    if state.dim() != 4 {
        return Err(Error::DimensionMismatch { expected: 4, got: state.dim() });
    }
    let op = linalg::kron(&linalg::pauli_along(a), &linalg::pauli_along(b));
    Ok(linalg::inner(state.amplitudes(), &(op * state.amplitudes())).re)
}

pub fn epr_correlation(a: [f64; 3], b: [f64; 3], eps: f64) -> Result<f64> {
    spin_correlation(&epr_pair(eps)?, a, b)
}

/// Non-selective spin measurement along `n` on one factor, embedded in `parent`.
pub fn spin_measurement(n: [f64; 3], particle: &str, parent: &Partition) -> Result<KrausChannel> {
    let n = unit_vector(n)?;
    let local = Partition::single(particle, 2);
    let s = linalg::pauli_along(n);
    let id = linalg::identity(2);
    let plus = Operator::new((&id + &s) * c(0.5, 0.0), local.clone())?;
    let minus = Operator::new((&id - &s) * c(0.5, 0.0), local)?;
    luders_channel(&[plus, minus])?.embed(parent)
}

/// Uniform direction on the sphere.
pub(crate) fn random_direction<R: Rng + ?Sized>(rng: &mut R) -> [f64; 3] {
    loop {
        let v: [f64; 3] = [rng.sample(StandardNormal), rng.sample(StandardNormal), rng.sample(StandardNormal)];
        let n = dot(v, v).sqrt();
        if n > 1e-6 {
            return [v[0] / n, v[1] / n, v[2] / n];
        }
    }
}

/// Kinematical spin-pair probabilities for each significant parent eigenstate.
///
/// Returns `(weight, dominant parent basis index, p(s1, s2 | w))` with the
/// pairs ordered as `↑↑, ↑↓, ↓↑, ↓↓`.
pub fn spin_pair_probabilities(rho: &DensityMatrix) -> Result<Vec<(f64, usize, [f64; 4])>> {
    let table = kinematical_cond_probs(rho, &[&["1"], &["2"]])?;
    let l1 = dominant_labels(&partial_trace(rho, &["1"])?);
    let l2 = dominant_labels(&partial_trace(rho, &["2"])?);
    let parents = spectral_decompose(rho);
    let mut out = vec![];
    for (w, &pw) in parents.probabilities().iter().enumerate() {
        if pw <= SIGNIFICANT_WEIGHT {
            continue;
        }
        let mut probs = [0.0; 4];
        for (i1, &s1) in l1.iter().enumerate() {
            for (i2, &s2) in l2.iter().enumerate() {
                probs[s1 * 2 + s2] += table.get(w, &[i1, i2]);
            }
        }
        out.push((pw, super::measurement::dominant(&parents.vector(w)), probs));
    }
    Ok(out)
}

pub(super) fn params() -> Vec<ParamSpec> {
    vec![
        ParamSpec::new("a", "unit measurement direction for particle 1", json!([0.0, 0.0, 1.0])),
        ParamSpec::new("b", "unit measurement direction for particle 2", json!([0.0, 0.0, 1.0])),
        ParamSpec::new("eps", "degeneracy-breaking perturbation scale", 1e-6),
        ParamSpec::new("random_pairs", "random direction pairs checked against -a·b", 100),
    ]
}

pub(super) fn run(ctx: &mut Run) -> Result<()> {
    let a = unit_vector(ctx.params.vec3("a")?)?;
    let b = unit_vector(ctx.params.vec3("b")?)?;
    let eps = ctx.params.f64("eps")?;
    if eps < 0.0 {
        return Err(Error::Config(format!("eps must be non-negative, got {eps}")));
    }
    let pairs = ctx.params.usize("random_pairs")?;
    let pert = 1e-12 + 3.0 * eps;

    let psi = epr_pair(eps)?;
    let corr = spin_correlation(&psi, a, b)?;
    ctx.scalar("correlation", corr)?;
    ctx.scalar("minus_a_dot_b", -dot(a, b))?;
    ctx.approx("correlation", corr, -dot(a, b), pert);
    let ideal = epr_pair(0.0)?;
    ctx.approx("correlation_unperturbed", spin_correlation(&ideal, a, b)?, -dot(a, b), 1e-12);

    let mut rng = rng_from_seed(ctx.seed);
    let mut worst: f64 = 0.0;
    for _ in 0..pairs {
        let (x, y) = (random_direction(&mut rng), random_direction(&mut rng));
        worst = worst.max((spin_correlation(&ideal, x, y)? + dot(x, y)).abs());
    }
    if pairs > 0 {
        ctx.at_most("random_pairs_max_deviation", worst, 1e-9);
    }

    let before = DensityMatrix::from_pure(&psi)?;
    let rho1 = partial_trace(&before, &["1"])?;
    let rho2 = partial_trace(&before, &["2"])?;
    let parent_spec = before.eigenvalues();
    ctx.approx("before_parent_weight", parent_spec[0], 1.0, 1e-12);
    let half_dev = |v: &[f64]| v.iter().map(|x| (x - 0.5).abs()).fold(0.0, f64::max);
    ctx.at_most("before_marginal_1", half_dev(&rho1.eigenvalues()), pert);
    ctx.at_most("before_marginal_2", half_dev(&rho2.eigenvalues()), pert);
    let joint_before = spin_pair_probabilities(&before)?;
    let (_, _, jb) = joint_before[0];
    ctx.approx("before_joint_up_down", jb[1], 0.5, pert);
    ctx.approx("before_joint_down_up", jb[2], 0.5, pert);
    ctx.at_most("before_joint_same_spin", jb[0] + jb[3], pert);
    ctx.spectrum("before_1+2", parent_spec)?;
    ctx.spectrum("before_1", rho1.eigenvalues())?;
    ctx.spectrum("before_2", rho2.eigenvalues())?;
    ctx.table(
        "joint_before",
        Table::new(
            vec!["Psi".into()],
            SPIN_PAIRS.iter().map(|s| s.to_string()).collect(),
            vec![jb.to_vec()],
        ),
    )?;
    ctx.matrix("rho_1+2_before", before.entries())?;

    let after = spin_measurement(a, "1", &pair_partition())?.apply(&before)?;
    let after_spec = after.eigenvalues();
    let target = [0.5, 0.5, 0.0, 0.0];
    let dev = after_spec
        .iter()
        .zip(target.iter())
        .map(|(x, t)| (x - t).abs())
        .fold(0.0, f64::max);
    ctx.at_most("after_parent_spectrum", dev, pert);
    ctx.spectrum("after_1+2", after_spec)?;
    ctx.spectrum("after_1", partial_trace(&after, &["1"])?.eigenvalues())?;
    ctx.spectrum("after_2", partial_trace(&after, &["2"])?.eigenvalues())?;
    ctx.matrix("rho_1+2_after", after.entries())?;
    if a[2].abs() >= 1.0 - 1e-12 {
        let joint_after = spin_pair_probabilities(&after)?;
        let mut rows = vec![];
        let mut values = vec![];
        let mut worst_match: f64 = 1.0;
        let mut anti_parents = 0;
        for (_, d, probs) in &joint_after {
            rows.push(format!("({})'", SPIN_PAIRS[*d]));
            values.push(probs.to_vec());
            if *d == 1 || *d == 2 {
                anti_parents += 1;
            }
            worst_match = worst_match.min(probs[*d]);
        }
        ctx.count("after_anticorrelated_parents", anti_parents, joint_after.len());
        ctx.count("after_significant_parents", joint_after.len(), 2);
        ctx.at_least("after_joint_given_parent", worst_match, 1.0, pert);
        ctx.table(
            "joint_after",
            Table::new(rows, SPIN_PAIRS.iter().map(|s| s.to_string()).collect(), values),
        )?;
    } else {
        ctx.note("after-measurement joint spin probabilities are tabulated only for a measurement along ±z");
    }
    Ok(())
}
