//! Randomized invariant suites.
//!
//! Every property draws fresh instances per trial. Trial `k` of property `p`
//! uses the seed `split_seed(split_seed(seed, hash(p)), k)`, so a suite run is
//! reproducible from its seed and each failing trial can be replayed alone.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::channels::{
    amplitude_damping, assignment_map, choi, conditional_state, dephasing, depolarizing, kraus_from_choi,
    luders_channel, random_channel_with_rng, verify_cpt, KrausChannel, LindbladGenerator, DEFAULT_STEP,
};
use crate::error::{Error, Result};
use crate::hilbert::linalg::{self, c, r, CMatrix};
use crate::hilbert::random::{random_density_matrix_with_rng, random_hermitian, random_unitary, rng_from_seed};
use crate::hilbert::{partial_trace, spectral_decompose, split_seed, DensityMatrix, Operator, Partition};
use crate::modal::{
    coarse_grained_cond_probs, dynamical_cond_probs_from_state, general_cond_probs_from_state,
    kinematical_cond_probs, leifer_spekkens_check, propagate_epistemic, sample_trajectories, transition_rates,
};
use crate::scenarios::report::SCHEMA_VERSION;

/// Counterexamples kept per property.
pub const MAX_COUNTEREXAMPLES: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Channels,
    ConditionalProbs,
    PartialTrace,
    Trajectories,
    All,
}

impl Suite {
    pub const INDIVIDUAL: [Suite; 4] = [
        Suite::PartialTrace,
        Suite::Channels,
        Suite::ConditionalProbs,
        Suite::Trajectories,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Channels => "channels",
            Suite::ConditionalProbs => "conditional_probs",
            Suite::PartialTrace => "partial_trace",
            Suite::Trajectories => "trajectories",
            Suite::All => "all",
        }
    }

    fn members(self) -> Vec<Suite> {
        match self {
            Suite::All => Self::INDIVIDUAL.to_vec(),
            s => vec![s],
        }
    }

    fn properties(self) -> Vec<Property> {
        match self {
            Suite::PartialTrace => partial_trace_properties(),
            Suite::Channels => channel_properties(),
            Suite::ConditionalProbs => conditional_properties(),
            Suite::Trajectories => trajectory_properties(),
            Suite::All => vec![],
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [Suite::All]
            .into_iter()
            .chain(Self::INDIVIDUAL)
            .find(|x| x.name() == s)
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown suite `{s}` (expected channels, conditional_probs, partial_trace, trajectories or all)"
                ))
            })
    }
}

/// Outcome of one randomized instance.
struct Trial {
    residual: f64,
    config: Value,
}

struct Property {
    name: &'static str,
    threshold: f64,
    run: fn(u64) -> Result<Trial>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Counterexample {
    pub trial: usize,
    pub seed: u64,
    pub residual: Option<f64>,
    pub error: Option<String>,
    pub config: Value,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PropertyResult {
    pub suite: String,
    pub name: String,
    pub threshold: f64,
    pub trials: usize,
    pub passed: usize,
    pub worst_residual: f64,
    pub counterexamples: Vec<Counterexample>,
}

impl PropertyResult {
    pub fn ok(&self) -> bool {
        self.passed == self.trials
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifySummary {
    pub schema_version: u32,
    pub suite: String,
    pub seed: u64,
    pub trials: usize,
    pub properties: Vec<PropertyResult>,
    pub passed: bool,
}

impl VerifySummary {
    pub fn property(&self, name: &str) -> Option<&PropertyResult> {
        self.properties.iter().find(|p| p.name == name)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self)
            .map(|s| s + "\n")
            .map_err(|e| Error::Config(e.to_string()))
    }
}

/// Property names of a suite, in execution order.
pub fn property_names(suite: Suite) -> Vec<&'static str> {
    suite
        .members()
        .into_iter()
        .flat_map(|s| s.properties().into_iter().map(|p| p.name))
        .collect()
}

fn name_stream(name: &str) -> u64 {
    name.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

/// Seed of trial `trial` of the named property.
pub fn trial_seed(seed: u64, property: &str, trial: usize) -> u64 {
    split_seed(split_seed(seed, name_stream(property)), trial as u64)
}

fn run_property(suite: Suite, p: &Property, trials: usize, seed: u64) -> PropertyResult {
    let mut passed = 0;
    let mut worst: f64 = 0.0;
    let mut counterexamples = vec![];
    for k in 0..trials {
        let tseed = trial_seed(seed, p.name, k);
        let failure = match (p.run)(tseed) {
            Ok(t) if t.residual.is_finite() && t.residual <= p.threshold => {
                worst = worst.max(t.residual);
                passed += 1;
                None
            }
            Ok(t) => {
                worst = if t.residual.is_nan() { f64::INFINITY } else { worst.max(t.residual) };
                Some((Some(t.residual).filter(|v| v.is_finite()), None, t.config))
            }
            Err(e) => {
                worst = f64::INFINITY;
                Some((None, Some(e.to_string()), json!({ "seed": tseed })))
            }
        };
        if let Some((residual, error, config)) = failure {
            if counterexamples.len() < MAX_COUNTEREXAMPLES {
                counterexamples.push(Counterexample {
                    trial: k,
                    seed: tseed,
                    residual,
                    error,
                    config,
                });
            }
        }
    }
    PropertyResult {
        suite: suite.name().into(),
        name: p.name.into(),
        threshold: p.threshold,
        trials,
        passed,
        worst_residual: worst,
        counterexamples,
    }
}

/// Runs every property of `suite` for `trials` random instances each.
pub fn verify(suite: Suite, trials: usize, seed: u64) -> Result<VerifySummary> {
    if trials == 0 {
        return Err(Error::Config("trials must be at least 1".into()));
    }
    let mut properties = vec![];
    for s in suite.members() {
        for p in s.properties() {
            properties.push(run_property(s, &p, trials, seed));
        }
    }
    let passed = properties.iter().all(PropertyResult::ok);
    Ok(VerifySummary {
        schema_version: SCHEMA_VERSION,
        suite: suite.name().into(),
        seed,
        trials,
        properties,
        passed,
    })
}

/// Runs a single named property; `None` if no suite defines it.
pub fn verify_property(name: &str, trials: usize, seed: u64) -> Result<Option<PropertyResult>> {
    if trials == 0 {
        return Err(Error::Config("trials must be at least 1".into()));
    }
    for s in Suite::INDIVIDUAL {
        if let Some(p) = s.properties().into_iter().find(|p| p.name == name) {
            return Ok(Some(run_property(s, &p, trials, seed)));
        }
    }
    Ok(None)
}

const LABELS: [&str; 3] = ["A", "B", "C"];

fn random_dims(rng: &mut ChaCha8Rng, n: usize, max: usize) -> Vec<usize> {
    (0..n).map(|_| rng.random_range(2..=max)).collect()
}

fn partition_of(dims: &[usize]) -> Result<Partition> {
    Partition::new(LABELS.iter().copied().zip(dims.iter().copied()))
}

fn random_state(partition: Partition, full_rank: bool, rng: &mut ChaCha8Rng) -> Result<DensityMatrix> {
    let d = partition.total_dim();
    let rank = if full_rank { d } else { rng.random_range(1..=d) };
    random_density_matrix_with_rng(partition, rank, rng)
}

fn max_vec_diff(a: &[f64], b: &[f64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn max_mat_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    if a.shape() != b.shape() {
        return f64::INFINITY;
    }
    (a - b).abs().max()
}

fn trial(residual: f64, config: Value) -> Result<Trial> {
    Ok(Trial { residual, config })
}

fn partial_trace_properties() -> Vec<Property> {
    vec![
        Property { name: "diagram_commutation", threshold: 1e-12, run: pt_diagram },
        Property { name: "classical_partial_sums", threshold: 1e-12, run: pt_classical },
        Property { name: "spectral_rebuild", threshold: 1e-12, run: pt_rebuild },
        Property { name: "entropy_additivity", threshold: 1e-10, run: pt_entropy },
        Property { name: "reduced_trace_and_hermiticity", threshold: 1e-9, run: pt_trace_herm },
    ]
}

/// Every route from the tripartite state to a subsystem gives the same matrix.
fn pt_diagram(seed: u64) -> Result<Trial> {
    let mut rng = rng_from_seed(seed);
    let dims = random_dims(&mut rng, 3, 3);
    let rho = random_state(partition_of(&dims)?, false, &mut rng)?;
    let mut worst: f64 = 0.0;
    for single in LABELS {
        let direct = partial_trace(&rho, &[single])?;
        for other in LABELS.iter().filter(|&&l| l != single) {
            let pair: Vec<&str> = LABELS.iter().copied().filter(|l| l == &single || l == other).collect();
            let via = partial_trace(&partial_trace(&rho, &pair)?, &[single])?;
            worst = worst.max(linalg::max_abs_diff(direct.entries(), via.entries()));
        }
    }
    for drop in LABELS {
        let pair: Vec<&str> = LABELS.iter().copied().filter(|&l| l != drop).collect();
        let direct = partial_trace(&rho, &pair)?;
        let full = partial_trace(&rho, &LABELS)?;
        let via = partial_trace(&full, &pair)?;
        worst = worst.max(linalg::max_abs_diff(direct.entries(), via.entries()));
    }
    trial(worst, json!({ "seed": seed, "dims": dims }))
}

/// Diagonal states reduce to marginal sums of their probability table.
fn pt_classical(seed: u64) -> Result<Trial> {
    let mut rng = rng_from_seed(seed);
    let d = random_dims(&mut rng, 3, 3);
    let n = d[0] * d[1] * d[2];
    let raw: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
    let total: f64 = raw.iter().sum();
    let p: Vec<f64> = raw.iter().map(|x| x / total).collect();
    let rho = DensityMatrix::diagonal(&p, partition_of(&d)?)?;
    let at = |a: usize, b: usize, cc: usize| p[(a * d[1] + b) * d[2] + cc];
    let mut worst: f64 = 0.0;
    for (keep, axes) in [
        (vec!["A"], vec![0]),
        (vec!["B"], vec![1]),
        (vec!["C"], vec![2]),
        (vec!["A", "B"], vec![0, 1]),
        (vec!["A", "C"], vec![0, 2]),
        (vec!["B", "C"], vec![1, 2]),
    ] {
        let red = partial_trace(&rho, &keep)?;
        let kd: Vec<usize> = axes.iter().map(|&x| d[x]).collect();
        let m: usize = kd.iter().product();
        let mut marginal = vec![0.0; m];
        for a in 0..d[0] {
            for b in 0..d[1] {
                for cc in 0..d[2] {
                    let idx = [a, b, cc];
                    let k = axes.iter().fold(0, |acc, &x| acc * d[x] + idx[x]);
                    marginal[k] += at(a, b, cc);
                }
            }
        }
        let expected = CMatrix::from_fn(m, m, |i, j| if i == j { r(marginal[i]) } else { linalg::ZERO });
        worst = worst.max(linalg::max_abs_diff(red.entries(), &expected));
    }
    trial(worst, json!({ "seed": seed, "dims": d }))
}

fn pt_rebuild(seed: u64) -> Result<Trial> {
    let mut rng = rng_from_seed(seed);
    let dims = random_dims(&mut rng, 2, 3);
    let rho = random_state(Partition::new([("A", dims[0]), ("B", dims[1])])?, false, &mut rng)?;
    let rebuilt = spectral_decompose(&rho).rebuild_matrix();
    trial(linalg::max_abs_diff(&rebuilt, rho.entries()), json!({ "seed": seed, "dims": dims }))
}

fn pt_entropy(seed: u64) -> Result<Trial> {
    let mut rng = rng_from_seed(seed);
    let dims = random_dims(&mut rng, 2, 3);
    let a = random_state(Partition::single("A", dims[0]), false, &mut rng)?;
    let b = random_state(Partition::single("B", dims[1]), false, &mut rng)?;
    let ab = a.tensor(&b)?;
    trial((ab.entropy() - a.entropy() - b.entropy()).abs(), json!({ "seed": seed, "dims": dims }))
}

fn pt_trace_herm(seed: u64) -> Result<Trial> {
    let mut rng = rng_from_seed(seed);
    let dims = random_dims(&mut rng, 3, 3);
    let rho = random_state(partition_of(&dims)?, false, &mut rng)?;
    let mut worst: f64 = 0.0;
    for keep in [&["A"][..], &["B"], &["C"], &["A", "B"], &["A", "C"], &["B", "C"]] {
        let red = partial_trace(&rho, keep)?;
        worst = worst
            .max((linalg::trace(red.entries()).re - 1.0).abs())
            .max(linalg::trace(red.entries()).im.abs())
            .max(linalg::hermiticity_residual(red.entries()));
    }
    trial(worst, json!({ "seed": seed, "dims": dims }))
}

fn channel_properties() -> Vec<Property> {
    vec![
        Property { name: "tp_residual", threshold: 1e-9, run: ch_tp },
        Property { name: "cp_residual", threshold: 1e-9, run: ch_cp },
        Property { name: "output_positivity", threshold: 1e-9, run: ch_output_psd },
        Property { name: "choi_round_trip", threshold: 1e-10, run: ch_choi_round_trip },
        Property { name: "conditional_state_propagation", threshold: 1e-10, run: ch_conditional_state },
        Property { name: "lindblad_dephasing_closed_form", threshold: 1e-6, run: ch_lindblad_dephasing },
        Property { name: "lindblad_zero_rate_unitary", threshold: 1e-8, run: ch_lindblad_unitary },
        Property { name: "assignment_identity", threshold: 1e-10, run: ch_assignment },
        Property { name: "luders_block_diagonal", threshold: 1e-12, run: ch_luders },
    ]
}

fn random_projectors(partition: &Partition, rng: &mut ChaCha8Rng) -> Result<Vec<Operator>> {
    let d = partition.total_dim();
    let u = random_unitary(d, rng);
    let blocks = rng.random_range(1..=d);
    let mut sizes = vec![1; blocks];
    for _ in blocks..d {
        let k = rng.random_range(0..blocks);
        sizes[k] += 1;
    }
    let mut start = 0;
    sizes
        .iter()
        .map(|&s| {
            let cols = u.columns(start, s);
            start += s;
            Operator::new(&cols * cols.adjoint(), partition.clone())
        })
        .collect()
}

/// One channel of every constructor with random parameters.
fn constructed_channels(rng: &mut ChaCha8Rng) -> Result<(Vec<(&'static str, KrausChannel)>, Value)> {
    let d = rng.random_range(2..=3);
    let s = Partition::single("S", d);
    let q = Partition::single("Q", 2);
    let p_dep = rng.random::<f64>();
    let gamma = rng.random::<f64>();
    let lambda = rng.random::<f64>();
    let n_kraus = rng.random_range(1..=4);
    let t = rng.random_range(0.05..0.25);
    let rate = rng.random_range(0.0..1.0);
    let list = vec![
        ("identity", KrausChannel::identity(s.clone())),
        ("unitary", KrausChannel::unitary(random_unitary(d, rng), s.clone())?),
        ("depolarizing", depolarizing(p_dep, s.clone())?),
        ("amplitude_damping", amplitude_damping(gamma, q.clone())?),
        ("dephasing", dephasing(lambda, s.clone())?),
        ("random", random_channel_with_rng(s.clone(), s.clone(), n_kraus, rng)?),
        ("luders", luders_channel(&random_projectors(&s, rng)?)?),
        (
            "lindblad",
            LindbladGenerator::new(random_hermitian(d, rng), vec![linalg::identity(d) - random_hermitian(d, rng)], vec![rate], s.clone())?
                .to_channel(t, DEFAULT_STEP)?,
        ),
    ];
    let config = json!({
        "dim": d, "depolarizing": p_dep, "damping": gamma, "dephasing": lambda,
        "kraus_count": n_kraus, "lindblad_t": t, "lindblad_rate": rate,
    });
    Ok((list, config))
}

fn worst_over_channels(seed: u64, f: impl Fn(&KrausChannel, &mut ChaCha8Rng) -> Result<f64>) -> Result<Trial> {
    let mut rng = rng_from_seed(seed);
    let (list, mut config) = constructed_channels(&mut rng)?;
    let mut worst: f64 = 0.0;
    let mut at = "";
    for (name, ch) in &list {
        let v = f(ch, &mut rng)?;
        if !(v <= worst) {
            worst = v;
            at = name;
        }
    }
    config["seed"] = json!(seed);
    config["worst_constructor"] = json!(at);
    trial(worst, config)
}

fn ch_tp(seed: u64) -> Result<Trial> {
    worst_over_channels(seed, |ch, _| Ok(verify_cpt(ch).tp_residual))
}

fn ch_cp(seed: u64) -> Result<Trial> {
    worst_over_channels(seed, |ch, _| Ok((-verify_cpt(ch).choi_min_eigenvalue).max(0.0)))
}

fn ch_output_psd(seed: u64) -> Result<Trial> {
    worst_over_channels(seed, |ch, rng| {
        let rho = random_state(ch.input().clone(), false, rng)?;
        let out = ch.apply_matrix(rho.entries());
        Ok(linalg::hermiticity_residual(&out).max(-linalg::min_eigenvalue(&linalg::hermitian_part(&out))))
    })
}

fn ch_choi_round_trip(seed: u64) -> Result<Trial> {
    worst_over_channels(seed, |ch, rng| {
        let back = kraus_from_choi(&choi(ch))?;
        let rho = random_state(ch.input().clone(), false, rng)?;
        Ok(linalg::max_abs_diff(&back.apply_matrix(rho.entries()), &ch.apply_matrix(rho.entries())))
    })
}

fn ch_conditional_state(seed: u64) -> Result<Trial> {
    worst_over_channels(seed, |ch, rng| {
        let rho = random_state(ch.input().clone(), false, rng)?;
        let cs = conditional_state(ch);
        Ok(linalg::max_abs_diff(&cs.propagate(rho.entries()), &ch.apply_matrix(rho.entries())))
    })
}

/// `A = σ_z` with `H = ω σ_z / 2`: `ρ_01(t) = ρ_01(0) e^{-(2γ + iω) t}`, populations fixed.
fn ch_lindblad_dephasing(seed: u64) -> Result<Trial> {
    let mut rng = rng_from_seed(seed);
    let gamma = rng.random_range(0.5..2.0);
    let omega = rng.random_range(-1.0..1.0);
    let q = Partition::single("Q", 2);
    let rho = random_state(q.clone(), false, &mut rng)?;
    let h = linalg::pauli_z() * r(omega / 2.0);
    let gen = LindbladGenerator::new(h, vec![linalg::pauli_z()], vec![gamma], q)?;
    let t = 2.0 / gamma;
    let out = gen.evolve(&rho, t, DEFAULT_STEP)?;
    let m = rho.entries();
    let decay = c(-2.0 * gamma * t, -omega * t).exp();
    let expected = CMatrix::from_row_slice(2, 2, &[m[(0, 0)], m[(0, 1)] * decay, m[(1, 0)] * decay.conj(), m[(1, 1)]]);
    trial(
        linalg::max_abs_diff(out.entries(), &expected),
        json!({ "seed": seed, "gamma": gamma, "omega": omega, "t": t }),
    )
}

fn ch_lindblad_unitary(seed: u64) -> Result<Trial> {
    let mut rng = rng_from_seed(seed);
    let d = rng.random_range(2..=3);
    let t = rng.random_range(0.5..2.0);
    let s = Partition::single("S", d);
    let h = random_hermitian(d, &mut rng);
    let jump = random_hermitian(d, &mut rng);
    let rho = random_state(s.clone(), false, &mut rng)?;
    let out = LindbladGenerator::new(h.clone(), vec![jump], vec![0.0], s)?.evolve(&rho, t, DEFAULT_STEP)?;
    let u = linalg::unitary_evolution(&h, t);
    let exact = &u * rho.entries() * u.adjoint();
    trial(linalg::max_abs_diff(out.entries(), &exact), json!({ "seed": seed, "dim": d, "t": t }))
}

fn ch_assignment(seed: u64) -> Result<Trial> {
    let mut rng = rng_from_seed(seed);
    let dims = random_dims(&mut rng, 2, 3);
    let w = Partition::new([("Q", dims[0]), ("E", dims[1])])?;
    let rho_w = random_state(w, true, &mut rng)?;
    let rho_q = partial_trace(&rho_w, &["Q"])?;
    let x = Operator::new(rho_q.entries().clone(), rho_q.partition().clone())?;
    let lifted = assignment_map(&rho_w, &["Q"], &x)?;
    trial(linalg::max_abs_diff(lifted.entries(), rho_w.entries()), json!({ "seed": seed, "dims": dims }))
}

fn ch_luders(seed: u64) -> Result<Trial> {
    let mut rng = rng_from_seed(seed);
    let d = rng.random_range(2..=4);
    let s = Partition::single("S", d);
    let projectors = random_projectors(&s, &mut rng)?;
    let ch = luders_channel(&projectors)?;
    let rho = random_state(s, false, &mut rng)?;
    let out = ch.apply_matrix(rho.entries());
    let worst = projectors
        .iter()
        .map(|p| linalg::max_abs(&(&out * p.entries() - p.entries() * &out)))
        .fold(0.0, f64::max);
    trial(worst, json!({ "seed": seed, "dim": d, "projectors": projectors.len() }))
}

fn conditional_properties() -> Vec<Property> {
    vec![
        Property { name: "non_negativity", threshold: 1e-12, run: cp_non_negative },
        Property { name: "normalization", threshold: 1e-10, run: cp_normalization },
        Property { name: "marginalization", threshold: 1e-10, run: cp_marginalization },
        Property { name: "unitary_trivialization", threshold: 1e-10, run: cp_unitary_delta },
        Property { name: "unitary_invariance", threshold: 1e-10, run: cp_unitary_invariance },
        Property { name: "leifer_spekkens", threshold: 1e-10, run: cp_leifer_spekkens },
        Property { name: "coarse_grained_factorized", threshold: 1e-10, run: cp_coarse_factorized },
    ]
}

struct Instance {
    rho: DensityMatrix,
    channel: KrausChannel,
    config: Value,
}

fn tripartite_instance(seed: u64, full_rank: bool) -> Result<Instance> {
    let mut rng = rng_from_seed(seed);
    let dims = random_dims(&mut rng, 3, 3);
    let w = partition_of(&dims)?;
    let rho = random_state(w.clone(), full_rank, &mut rng)?;
    let n_kraus = rng.random_range(1..=3);
    let channel = random_channel_with_rng(w.clone(), w, n_kraus, &mut rng)?;
    Ok(Instance {
        rho,
        channel,
        config: json!({ "seed": seed, "dims": dims, "kraus_count": n_kraus, "full_rank": full_rank }),
    })
}

const GROUPS: [&[&str]; 3] = [&["A"], &["B"], &["C"]];

fn cp_non_negative(seed: u64) -> Result<Trial> {
    let inst = tripartite_instance(seed, false)?;
    let general = general_cond_probs_from_state(&inst.channel, &inst.rho, &GROUPS)?;
    let kinematical = kinematical_cond_probs(&inst.rho, &GROUPS)?;
    trial((-general.min_raw_entry().min(kinematical.min_raw_entry())).max(0.0), inst.config)
}

fn cp_normalization(seed: u64) -> Result<Trial> {
    let inst = tripartite_instance(seed, false)?;
    let general = general_cond_probs_from_state(&inst.channel, &inst.rho, &GROUPS)?;
    let kinematical = kinematical_cond_probs(&inst.rho, &GROUPS)?;
    trial(general.normalization_residual().max(kinematical.normalization_residual()), inst.config)
}

/// `Σ_w p_W(w) p(i_α | w)` equals the evolved subsystem spectrum.
fn cp_marginalization(seed: u64) -> Result<Trial> {
    let inst = tripartite_instance(seed, false)?;
    let table = general_cond_probs_from_state(&inst.channel, &inst.rho, &GROUPS)?;
    let weights = spectral_decompose(&inst.rho).probabilities().to_vec();
    let evolved = inst.channel.apply(&inst.rho)?;
    let mut worst: f64 = 0.0;
    for (axis, g) in GROUPS.iter().enumerate() {
        let sub = spectral_decompose(&partial_trace(&evolved, g)?);
        worst = worst.max(max_vec_diff(&table.weighted_marginal(axis, &weights), sub.probabilities()));
    }
    trial(worst, inst.config)
}

fn cp_unitary_delta(seed: u64) -> Result<Trial> {
    let mut rng = rng_from_seed(seed);
    let dims = random_dims(&mut rng, 3, 3);
    let w = partition_of(&dims)?;
    let rho = random_state(w.clone(), true, &mut rng)?;
    let ch = KrausChannel::unitary(random_unitary(w.total_dim(), &mut rng), w)?;
    let (p, _) = dynamical_cond_probs_from_state(&ch, &spectral_decompose(&rho))?;
    let n = p.nrows();
    trial(max_mat_diff(&p, &DMatrix::identity(n, n)), json!({ "seed": seed, "dims": dims }))
}

/// Conjugating the state and the channel by a local unitary leaves every table unchanged.
fn cp_unitary_invariance(seed: u64) -> Result<Trial> {
    let inst = tripartite_instance(seed, true)?;
    let mut rng = rng_from_seed(split_seed(seed, 1));
    let dims = inst.rho.partition().dims().to_vec();
    let v = dims
        .iter()
        .map(|&d| random_unitary(d, &mut rng))
        .reduce(|a, b| linalg::kron(&a, &b))
        .expect("three factors");
    let rho_v = DensityMatrix::new(&v * inst.rho.entries() * v.adjoint(), inst.rho.partition().clone())?;
    let ch_v = inst.channel.conjugated(&v);
    let (p, _) = dynamical_cond_probs_from_state(&inst.channel, &spectral_decompose(&inst.rho))?;
    let (p_v, _) = dynamical_cond_probs_from_state(&ch_v, &spectral_decompose(&rho_v))?;
    let t = general_cond_probs_from_state(&inst.channel, &inst.rho, &GROUPS)?;
    let t_v = general_cond_probs_from_state(&ch_v, &rho_v, &GROUPS)?;
    let k = kinematical_cond_probs(&inst.rho, &GROUPS)?;
    let k_v = kinematical_cond_probs(&rho_v, &GROUPS)?;
    let worst = max_mat_diff(&p, &p_v)
        .max(max_vec_diff(t.values(), t_v.values()))
        .max(max_vec_diff(k.values(), k_v.values()));
    trial(worst, inst.config)
}

fn cp_leifer_spekkens(seed: u64) -> Result<Trial> {
    let mut rng = rng_from_seed(seed);
    let dims = random_dims(&mut rng, 2, 3);
    let w = Partition::new([("A", dims[0]), ("B", dims[1])])?;
    let rho = random_state(w.clone(), true, &mut rng)?;
    let n_kraus = rng.random_range(1..=3);
    let ch = random_channel_with_rng(w.clone(), w, n_kraus, &mut rng)?;
    let epi = spectral_decompose(&rho);
    let (_, epi2) = dynamical_cond_probs_from_state(&ch, &epi)?;
    trial(
        leifer_spekkens_check(&ch, &epi, &epi2)?,
        json!({ "seed": seed, "dims": dims, "kraus_count": n_kraus }),
    )
}

/// Product states under product dynamics reduce to the subsystem's own table.
fn cp_coarse_factorized(seed: u64) -> Result<Trial> {
    let mut rng = rng_from_seed(seed);
    let dims = random_dims(&mut rng, 2, 3);
    let q = Partition::single("Q", dims[0]);
    let e = Partition::single("E", dims[1]);
    let rho_q = random_state(q.clone(), true, &mut rng)?;
    let rho_e = random_state(e.clone(), false, &mut rng)?;
    let ch_q = random_channel_with_rng(q.clone(), q, rng.random_range(1..=3), &mut rng)?;
    let ch_e = random_channel_with_rng(e.clone(), e, rng.random_range(1..=3), &mut rng)?;
    let cg = coarse_grained_cond_probs(&ch_q.tensor(&ch_e)?, &rho_q.tensor(&rho_e)?, &["Q"])?;
    let (exact, _) = dynamical_cond_probs_from_state(&ch_q, &spectral_decompose(&rho_q))?;
    trial(max_mat_diff(&cg.probabilities, &exact), json!({ "seed": seed, "dims": dims }))
}

fn trajectory_properties() -> Vec<Property> {
    vec![
        Property { name: "epistemic_propagation", threshold: 1e-10, run: tr_propagation },
        Property { name: "ensemble_z_score", threshold: ENSEMBLE_Z, run: tr_ensemble },
        Property { name: "rate_conservation", threshold: 1e-9, run: tr_rates },
        Property { name: "sampling_determinism", threshold: 0.0, run: tr_determinism },
    ]
}

/// Trajectories per trial of `ensemble_z_score`.
pub const ENSEMBLE_SIZE: usize = 2000;
/// Largest per-cell deviation, in binomial standard errors, accepted by `ensemble_z_score`.
pub const ENSEMBLE_Z: f64 = 5.0;

struct Chain {
    initial: Vec<f64>,
    matrices: Vec<DMatrix<f64>>,
    spectra: Vec<Vec<f64>>,
    config: Value,
}

fn random_chain(seed: u64, steps: usize) -> Result<Chain> {
    let mut rng = rng_from_seed(seed);
    let d = rng.random_range(2..=4);
    let s = Partition::single("S", d);
    let rho = random_state(s.clone(), true, &mut rng)?;
    let mut epi = spectral_decompose(&rho);
    let initial = epi.probabilities().to_vec();
    let mut matrices = vec![];
    let mut spectra = vec![];
    for _ in 0..steps {
        let n_kraus = rng.random_range(1..=3);
        let ch = random_channel_with_rng(s.clone(), s.clone(), n_kraus, &mut rng)?;
        let (p, next) = dynamical_cond_probs_from_state(&ch, &epi)?;
        matrices.push(p);
        spectra.push(next.probabilities().to_vec());
        epi = next;
    }
    Ok(Chain {
        initial,
        matrices,
        spectra,
        config: json!({ "seed": seed, "dim": d, "steps": steps }),
    })
}

fn tr_propagation(seed: u64) -> Result<Trial> {
    let chain = random_chain(seed, 3)?;
    let mut p = chain.initial.clone();
    let mut worst: f64 = 0.0;
    for (m, spec) in chain.matrices.iter().zip(&chain.spectra) {
        p = propagate_epistemic(&p, m)?;
        worst = worst.max(max_vec_diff(&p, spec));
    }
    trial(worst, chain.config)
}

/// Largest `|f - p| / sqrt(p (1 - p) / n)` over every time and state.
pub fn occupation_z_score(occupation: &[Vec<f64>], expected: &[Vec<f64>], n: usize) -> f64 {
    let mut worst: f64 = 0.0;
    for (f_t, p_t) in occupation.iter().zip(expected) {
        for (&f, &p) in f_t.iter().zip(p_t) {
            let se = (p * (1.0 - p) / n as f64).max(0.0).sqrt();
            let dev = (f - p).abs();
            let z = if se > 0.0 {
                dev / se
            } else if dev <= 1e-12 {
                0.0
            } else {
                f64::INFINITY
            };
            worst = worst.max(z);
        }
    }
    worst
}

fn tr_ensemble(seed: u64) -> Result<Trial> {
    let chain = random_chain(seed, 2)?;
    let ens = sample_trajectories(&chain.matrices, &chain.initial, ENSEMBLE_SIZE, seed)?;
    let mut expected = vec![chain.initial.clone()];
    for m in &chain.matrices {
        let next = propagate_epistemic(expected.last().expect("nonempty"), m)?;
        expected.push(next);
    }
    trial(occupation_z_score(&ens.occupation, &expected, ENSEMBLE_SIZE), chain.config)
}

fn tr_rates(seed: u64) -> Result<Trial> {
    let mut rng = rng_from_seed(seed);
    let d = rng.random_range(2..=4);
    let s = Partition::single("S", d);
    let rho = random_state(s.clone(), true, &mut rng)?;
    let n_kraus = rng.random_range(1..=3);
    let dt = 0.1;
    let ch = random_channel_with_rng(s.clone(), s, n_kraus, &mut rng)?;
    let w = transition_rates(&ch, &spectral_decompose(&rho), dt)?;
    let worst = w.column_iter().map(|col| col.sum().abs()).fold(0.0, f64::max);
    trial(worst, json!({ "seed": seed, "dim": d, "kraus_count": n_kraus, "dt": dt }))
}

fn tr_determinism(seed: u64) -> Result<Trial> {
    let chain = random_chain(seed, 2)?;
    let a = sample_trajectories(&chain.matrices, &chain.initial, 200, seed)?;
    let b = sample_trajectories(&chain.matrices, &chain.initial, 200, seed)?;
    trial(if a == b { 0.0 } else { 1.0 }, chain.config)
}
