use serde_json::json;

use super::config::ParamSpec;
use super::report::Curve;
use super::Run;
use crate::channels::{luders_channel, KrausChannel};
use crate::error::{Error, Result};
use crate::hilbert::linalg::{self, r, CMatrix};
use crate::hilbert::{DensityMatrix, Operator, Partition, StateVector};

/// `H = β σ_x`, whose energy variance in `|0>` is `β²`.
pub fn zeno_hamiltonian(beta: f64) -> CMatrix {
    linalg::pauli_x() * r(beta)
}

/// `|<0| e^{-iHΔt} |0>|²`.
pub fn single_interval_survival(beta: f64, dt: f64) -> f64 {
    let u = linalg::unitary_evolution(&zeno_hamiltonian(beta), dt);
    u[(0, 0)].norm_sqr()
}

/// Survival after `n` intervals of length `t / n`, each followed by a
/// selective reset onto the initial state.
pub fn selective_survival(beta: f64, t: f64, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidModel("reset count must be at least 1".into()));
    }
    let u = linalg::unitary_evolution(&zeno_hamiltonian(beta), t / n as f64);
    let q = Partition::single("Q", 2);
    let mut psi = StateVector::basis(q.clone(), 0)?;
    let mut survival = 1.0;
    for _ in 0..n {
        let evolved = &u * psi.amplitudes();
        let p = evolved[0].norm_sqr();
        survival *= p;
        if p == 0.0 {
            break;
        }
        psi = StateVector::normalized(linalg::CVector::from_vec(vec![evolved[0], linalg::ZERO]), q.clone())?;
    }
    Ok(survival)
}

/// Population of `|0>` after `n` rounds of evolution followed by the
/// non-selective Lüders measurement `{|0><0|, |1><1|}`.
pub fn luders_survival(beta: f64, t: f64, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidModel("reset count must be at least 1".into()));
    }
    let q = Partition::single("Q", 2);
    let u = linalg::unitary_evolution(&zeno_hamiltonian(beta), t / n as f64);
    let proj = |i: usize| Operator::projector(&StateVector::basis(q.clone(), i)?);
    let step = KrausChannel::unitary(u, q.clone())?.then(&luders_channel(&[proj(0)?, proj(1)?])?)?;
    let mut rho = DensityMatrix::from_pure(&StateVector::basis(q, 0)?)?;
    for _ in 0..n {
        rho = step.apply(&rho)?;
    }
    Ok(rho.entries()[(0, 0)].re)
}

pub(super) fn params() -> Vec<ParamSpec> {
    vec![
        ParamSpec::new("beta", "energy spread β (inverse time)", 1.0),
        ParamSpec::new("t", "total time", 1.0),
        ParamSpec::new("n_list", "reset counts N", json!([1, 2, 5, 10, 20, 50, 100, 200, 500, 1000])),
        ParamSpec::new("dt_single", "single-interval check duration", 0.01),
        ParamSpec::new("alpha", "decay rate of the linear regime", 0.5),
        ParamSpec::new("linear_n", "subdivisions for the linear-regime limit", 1000),
    ]
}

pub(super) fn run(ctx: &mut Run) -> Result<()> {
    let beta = ctx.params.f64("beta")?;
    let t = ctx.params.f64("t")?;
    let dt = ctx.params.f64("dt_single")?;
    let alpha = ctx.params.f64("alpha")?;
    let linear_n = ctx.params.usize("linear_n")?;
    let mut n_list = ctx.params.usize_list("n_list")?;
    if !(beta > 0.0 && t > 0.0 && dt > 0.0) {
        return Err(Error::Config("beta, t and dt_single must be positive".into()));
    }
    if alpha < 0.0 || linear_n == 0 || n_list.contains(&0) {
        return Err(Error::Config("alpha must be non-negative and counts must be at least 1".into()));
    }
    n_list.sort_unstable();
    n_list.dedup();

    let single = single_interval_survival(beta, dt);
    let quad = 1.0 - (beta * dt).powi(2);
    ctx.scalar("single_interval_survival", single)?;
    ctx.approx("single_interval_relative", (single - quad) / quad, 0.0, 1e-6);

    let mut curve = Curve::new(&[
        ("N", "count"),
        ("survival_selective", "probability"),
        ("survival_luders", "probability"),
        ("quadratic_estimate", "probability"),
    ]);
    let mut quadratic_regime = vec![];
    for &n in &n_list {
        let sel = selective_survival(beta, t, n)?;
        let lu = luders_survival(beta, t, n)?;
        let est = (1.0 - (beta * t / n as f64).powi(2)).max(0.0).powi(n as i32);
        curve.push(vec![n as f64, sel, lu, est]);
        if beta * t / (n as f64) < std::f64::consts::FRAC_PI_2 {
            quadratic_regime.push(sel);
        }
    }
    if quadratic_regime.len() >= 2 {
        let drops = quadratic_regime.windows(2).filter(|w| w[1] <= w[0]).count();
        ctx.count("survival_non_increasing_steps", drops, 0);
        let last = *quadratic_regime.last().expect("nonempty");
        let n_max = *n_list.last().expect("nonempty") as f64;
        ctx.scalar("survival_at_max_n", last)?;
        ctx.at_least("survival_approaches_one", last, 1.0 - (beta * t).powi(2) / n_max, 1e-12);
    }
    ctx.curve("zeno_survival", curve)?;

    let at = alpha * t;
    let product = (1.0 - at / linear_n as f64).powi(linear_n as i32);
    let exact = (-at).exp();
    ctx.scalar("linear_regime_product", product)?;
    ctx.scalar("exponential_law", exact)?;
    ctx.approx("linear_regime_relative", (product - exact) / exact, 0.0, 0.01);
    let mut law = Curve::new(&[("t", "time"), ("exponential", "probability"), ("product", "probability")]);
    for k in 0..=50 {
        let tk = t * k as f64 / 50.0;
        let x = alpha * tk;
        law.push(vec![tk, (-x).exp(), (1.0 - x / linear_n as f64).powi(linear_n as i32)]);
    }
    ctx.curve("exponential_law", law)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms() {
        for (beta, dt) in [(1.0, 0.01), (2.0, 0.3)] {
            let cos2 = ((beta * dt) as f64).cos().powi(2);
            assert!((single_interval_survival(beta, dt) - cos2).abs() < 1e-14);
        }
        let n = 7;
        let oracle = (1.3f64 / n as f64).cos().powi(2 * n as i32);
        assert!((selective_survival(1.3, 1.0, n).unwrap() - oracle).abs() < 1e-13);
    }

    #[test]
    fn luders_survival_single_round() {
        let s = luders_survival(1.0, 0.4, 1).unwrap();
        assert!((s - 0.4f64.cos().powi(2)).abs() < 1e-13);
        assert!(luders_survival(1.0, 1.0, 50).unwrap() > luders_survival(1.0, 1.0, 5).unwrap());
        assert!(selective_survival(1.0, 1.0, 0).is_err());
    }
}
