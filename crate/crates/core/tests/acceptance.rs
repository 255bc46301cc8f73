//! Acceptance run: one pass/fail line per criterion with pinned tolerances and runtime budgets.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use modal_lab::channels::{amplitude_damping, dephasing, random_channel_with_rng, KrausChannel, LindbladGenerator, DEFAULT_STEP};
use modal_lab::hilbert::linalg::{self, c};
use modal_lab::hilbert::random::{random_density_matrix_with_rng, random_hermitian, random_unitary, rng_from_seed};
use modal_lab::hilbert::{reduced_from_pure, spectral_decompose, Partition};
use modal_lab::modal::{
    dynamical_cond_probs_from_state, eigenstate_swap_analysis, propagate_epistemic, sample_trajectories,
    SwapBlockModel,
};
use modal_lab::properties::{occupation_z_score, verify, verify_property, Suite};
use modal_lab::scenarios::bell::{bell_terms, lhv_strategies};
use modal_lab::scenarios::epr::epr_correlation;
use modal_lab::scenarios::ghz::{consistent_instruction_sets, ghz_eigenvalues};
use modal_lab::scenarios::kochen_specker::{consistent_assignments, line_commutator, line_product, lines};
use modal_lab::scenarios::measurement::{analyze, MeasurementLabels, MeasurementModel};
use modal_lab::scenarios::myrvold::{psi_alpha, psi_beta, transport_residual, wing_hadamard};
use modal_lab::scenarios::no_communication::{bell_pair, lindblad_no_communication_deviation, no_communication_deviation};
use modal_lab::scenarios::pbr::{pbr_basis, product_states};
use modal_lab::Result;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

const SEED: u64 = 20240611;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { passed, detail })
}

fn max_dev(x: &[f64], y: &[f64]) -> f64 {
    if x.len() != y.len() {
        return f64::INFINITY;
    }
    x.iter().zip(y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

fn unit<R: Rng>(rng: &mut R) -> [f64; 3] {
    loop {
        let v: [f64; 3] = [rng.sample(StandardNormal), rng.sample(StandardNormal), rng.sample(StandardNormal)];
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-6 {
            return v.map(|x| x / n);
        }
    }
}

fn epr() -> Result<Outcome> {
    let mut rng = rng_from_seed(SEED);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let (a, b) = (unit(&mut rng), unit(&mut rng));
        let dot: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
        worst = worst.max((epr_correlation(a, b, 0.0)? + dot).abs());
    }
    let a = unit(&mut rng);
    let same = (epr_correlation(a, a, 0.0)? + 1.0).abs();
    outcome(
        worst <= 1e-9 && same <= 1e-12,
        format!("max |E(a,b) + a·b| = {worst:.2e} (≤ 1e-9) over 100 pairs; |E(a,a) + 1| = {same:.2e} (≤ 1e-12)"),
    )
}

fn bell() -> Result<Outcome> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let t = bell_terms([0.0, 0.0, 1.0], [1.0, 0.0, 0.0], [s, 0.0, s])?;
    let satisfying = lhv_strategies().iter().filter(|x| x.satisfied).count();
    outcome(
        (t.lhs - 0.7071).abs() <= 1e-3 && (t.rhs - 0.2929).abs() <= 1e-3 && t.violated() && satisfying == 8,
        format!(
            "LHS = {:.6} (0.7071 ± 1e-3), RHS = {:.6} (0.2929 ± 1e-3), violated = {}, LHV satisfying = {satisfying}/8",
            t.lhs,
            t.rhs,
            t.violated()
        ),
    )
}

fn ghz() -> Result<Outcome> {
    let eig = ghz_eigenvalues();
    let expected = [1.0, 1.0, 1.0, -1.0];
    let worst = eig
        .iter()
        .zip(expected)
        .map(|((l, res), e)| (l - e).abs().max(*res))
        .fold(0.0, f64::max);
    let targets: Vec<f64> = eig.iter().map(|(l, _)| l.round()).collect();
    let consistent = consistent_instruction_sets(&targets).len();
    outcome(
        worst <= 1e-12 && consistent == 0,
        format!("eigenvalue equations residual = {worst:.2e} (≤ 1e-12); consistent instruction sets = {consistent}/64"),
    )
}

fn myrvold() -> Result<Outcome> {
    let third = 1.0 / 3.0;
    let spec_a = reduced_from_pure(&psi_alpha()?, &["1", "2"])?.eigenvalues();
    let spec_b = reduced_from_pure(&psi_beta()?, &["1", "2"])?.eigenvalues();
    let da = max_dev(&spec_a, &[0.75, 1.0 / 12.0, 1.0 / 12.0, 1.0 / 12.0]);
    let db = max_dev(&spec_b, &[third, third, third, 0.0]);
    let tr = transport_residual(&wing_hadamard(true))?;
    outcome(
        da <= 1e-12 && db <= 1e-12 && tr <= 1e-12,
        format!("spectrum α dev = {da:.2e}, spectrum β dev = {db:.2e}, transport residual = {tr:.2e} (all ≤ 1e-12)"),
    )
}

fn kochen_specker() -> Result<Outcome> {
    let expected = [1.0, 1.0, 1.0, 1.0, 1.0, -1.0];
    let mut comm: f64 = 0.0;
    let mut prod: f64 = 0.0;
    let mut signs = vec![];
    for (l, e) in lines().iter().zip(expected) {
        comm = comm.max(line_commutator(l));
        let (s, res) = line_product(l);
        prod = prod.max(res).max((s - e).abs());
        signs.push(s);
    }
    let consistent = consistent_assignments(&signs);
    outcome(
        comm <= 1e-12 && prod <= 1e-12 && consistent == 0,
        format!(
            "commutators ≤ {comm:.2e}, line products vs (+,+,+ | +,+,-)·1 ≤ {prod:.2e} (≤ 1e-12); consistent assignments = {consistent}/512"
        ),
    )
}

fn pbr() -> Result<Outcome> {
    let xi = pbr_basis();
    let gram = linalg::max_abs_diff(&(xi.adjoint() * &xi), &linalg::identity(4));
    let overlap = product_states()
        .iter()
        .enumerate()
        .map(|(k, phi)| linalg::inner(&xi.column(k).into_owned(), phi).norm())
        .fold(0.0, f64::max);
    outcome(
        gram <= 1e-12 && overlap <= 1e-12,
        format!("designated overlaps ≤ {overlap:.2e}, Gram - 1 = {gram:.2e} (≤ 1e-12)"),
    )
}

fn suite_check(suite: Suite, trials: usize, pinned: &[(&str, f64)]) -> Result<Outcome> {
    let summary = verify(suite, trials, SEED)?;
    let mut passed = true;
    let mut parts = vec![];
    for (name, tol) in pinned {
        match summary.property(name) {
            Some(p) => {
                let ok = p.ok() && p.worst_residual <= *tol;
                passed &= ok;
                parts.push(format!("{name} {:.2e} (≤ {tol:.0e}, {}/{})", p.worst_residual, p.passed, p.trials));
            }
            None => {
                passed = false;
                parts.push(format!("{name} missing"));
            }
        }
    }
    outcome(passed, parts.join("; "))
}

fn conditional_probs() -> Result<Outcome> {
    suite_check(
        Suite::ConditionalProbs,
        200,
        &[
            ("non_negativity", 1e-12),
            ("normalization", 1e-10),
            ("marginalization", 1e-10),
            ("unitary_trivialization", 1e-10),
            ("unitary_invariance", 1e-10),
        ],
    )
}

fn partial_trace() -> Result<Outcome> {
    suite_check(
        Suite::PartialTrace,
        200,
        &[("diagram_commutation", 1e-12), ("classical_partial_sums", 1e-12)],
    )
}

fn channels() -> Result<Outcome> {
    suite_check(
        Suite::Channels,
        200,
        &[
            ("tp_residual", 1e-9),
            ("cp_residual", 1e-9),
            ("choi_round_trip", 1e-10),
            ("lindblad_dephasing_closed_form", 1e-6),
            ("lindblad_zero_rate_unitary", 1e-8),
        ],
    )
}

fn born_rule() -> Result<Outcome> {
    let amps = vec![Complex64::new(0.3f64.sqrt(), 0.0), Complex64::new(0.7f64.sqrt(), 0.0)];
    let theta = std::f64::consts::FRAC_PI_4;
    let labels = MeasurementLabels::preset("none")?;
    let model = MeasurementModel::new(amps.clone(), 12, theta, labels.clone())?;
    let s = analyze(&model)?;
    let dev = max_dev(&s.pointer_probabilities[1..], &[0.3, 0.7]);
    let mut off = vec![];
    for k in [4, 8, 12] {
        off.push(analyze(&MeasurementModel::new(amps.clone(), k, theta, labels.clone())?)?.off_diagonal);
    }
    let decreasing = off.windows(2).all(|w| w[1] < w[0]);
    outcome(
        dev <= 1e-6 && decreasing,
        format!(
            "pointer probabilities dev = {dev:.2e} (≤ 1e-6); off-diagonal k=4,8,12: {:.3e}, {:.3e}, {:.3e} strictly decreasing = {decreasing}",
            off[0], off[1], off[2]
        ),
    )
}

fn swap() -> Result<Outcome> {
    let model = SwapBlockModel::new(0.5, c(1e-4, 0.0), 1.0, 0.0)?;
    let rep = eigenstate_swap_analysis(&model, &[model.t0])?;
    outcome(
        rep.label_following <= 0.05 && rep.state_following >= 0.95,
        format!(
            "window ±{:.2e}: label-following = {:.3e} (≤ 0.05), state-following = {:.6} (≥ 0.95)",
            rep.window_half_width, rep.label_following, rep.state_following
        ),
    )
}

fn trajectories() -> Result<Outcome> {
    let n = 100_000;
    let mut rng = rng_from_seed(SEED);
    let s = Partition::single("S", 3);
    let rho = random_density_matrix_with_rng(s.clone(), 3, &mut rng)?;
    let mut epi = spectral_decompose(&rho);
    let initial = epi.probabilities().to_vec();
    let mut matrices = vec![];
    for _ in 0..3 {
        let ch = random_channel_with_rng(s.clone(), s.clone(), 2, &mut rng)?;
        let (p, next) = dynamical_cond_probs_from_state(&ch, &epi)?;
        matrices.push(p);
        epi = next;
    }
    let mut expected = vec![initial.clone()];
    for m in &matrices {
        let next = propagate_epistemic(expected.last().expect("nonempty"), m)?;
        expected.push(next);
    }
    let ens = sample_trajectories(&matrices, &initial, n, SEED)?;
    let z = occupation_z_score(&ens.occupation, &expected, n);
    outcome(
        z <= 3.0,
        format!("{n} trajectories, 3 steps, qutrit: worst cell deviation = {z:.3} binomial SE (≤ 3)"),
    )
}

fn leifer_spekkens() -> Result<Outcome> {
    let p = verify_property("leifer_spekkens", 50, SEED)?.expect("property is registered");
    outcome(
        p.ok() && p.worst_residual <= 1e-10,
        format!("deviation = {:.2e} (≤ 1e-10) over {} random channels", p.worst_residual, p.trials),
    )
}

fn no_communication() -> Result<Outcome> {
    let mut rng = rng_from_seed(SEED);
    let rho = bell_pair()?;
    let b = Partition::single("B", 2);
    let keep = ["A"];
    let mut exact: f64 = 0.0;
    for _ in 0..20 {
        let u = KrausChannel::unitary(random_unitary(2, &mut rng), b.clone())?;
        let k = random_channel_with_rng(b.clone(), b.clone(), 3, &mut rng)?;
        exact = exact
            .max(no_communication_deviation(&rho, &keep, &u)?)
            .max(no_communication_deviation(&rho, &keep, &k)?);
    }
    exact = exact
        .max(no_communication_deviation(&rho, &keep, &dephasing(0.5, b.clone())?)?)
        .max(no_communication_deviation(&rho, &keep, &amplitude_damping(0.3, b.clone())?)?);
    let gen = LindbladGenerator::new(random_hermitian(2, &mut rng), vec![linalg::pauli_z()], vec![0.4], b)?;
    let lind = lindblad_no_communication_deviation(&rho, &keep, &gen, 1.0, DEFAULT_STEP)?;
    outcome(
        exact <= 1e-12 && lind <= 1e-9,
        format!("unitary/Kraus deviation = {exact:.2e} (≤ 1e-12); Lindblad deviation = {lind:.2e} (≤ 1e-9)"),
    )
}

type Criterion = (&'static str, u64, fn() -> Result<Outcome>);

const CRITERIA: [Criterion; 14] = [
    ("EPR correlation", 1, epr),
    ("Bell violation", 1, bell),
    ("GHZ", 1, ghz),
    ("Myrvold", 1, myrvold),
    ("Kochen-Specker", 1, kochen_specker),
    ("PBR", 1, pbr),
    ("conditional-probability suite", 30, conditional_probs),
    ("partial-trace suite", 10, partial_trace),
    ("channel suite", 30, channels),
    ("Born-rule emergence", 5, born_rule),
    ("eigenstate-swap avoidance", 1, swap),
    ("trajectory ensembles", 30, trajectories),
    ("Leifer-Spekkens equivalence", 10, leifer_spekkens),
    ("no-communication", 5, no_communication),
];

fn main() -> ExitCode {
    let mut failures = 0;
    for (k, (name, budget, f)) in CRITERIA.iter().enumerate() {
        let start = Instant::now();
        let result = f();
        let elapsed = start.elapsed();
        let in_time = elapsed < Duration::from_secs(*budget);
        let (passed, detail) = match result {
            Ok(o) => (o.passed && in_time, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !passed {
            failures += 1;
        }
        println!(
            "[{}] {:>2}. {name}: {detail}; runtime {:.3}s (< {budget}s)",
            if passed { "PASS" } else { "FAIL" },
            k + 1,
            elapsed.as_secs_f64()
        );
    }
    println!("acceptance: {}/{} criteria passed", CRITERIA.len() - failures, CRITERIA.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
