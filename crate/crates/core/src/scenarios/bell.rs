use std::f64::consts::FRAC_1_SQRT_2;

use serde::Serialize;
use serde_json::json;

use super::config::ParamSpec;
use super::epr::{epr_pair, spin_correlation};
use super::report::{Curve, Table};
use super::{dot, unit_vector, Run};
use crate::error::Result;

/// Singlet correlations and both sides of `|E(a,b) - E(a,c)| <= 1 + E(b,c)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BellTerms {
    pub ab: f64,
    pub ac: f64,
    pub bc: f64,
    pub lhs: f64,
    pub rhs: f64,
}

impl BellTerms {
    pub fn violated(&self) -> bool {
        self.lhs > self.rhs
    }
}

pub fn bell_terms(a: [f64; 3], b: [f64; 3], c: [f64; 3]) -> Result<BellTerms> {
    let psi = epr_pair(0.0)?;
    let ab = spin_correlation(&psi, a, b)?;
    let ac = spin_correlation(&psi, a, c)?;
    let bc = spin_correlation(&psi, b, c)?;
    Ok(BellTerms {
        ab,
        ac,
        bc,
        lhs: (ab - ac).abs(),
        rhs: 1.0 + bc,
    })
}

/// Deterministic anti-correlated local strategy: particle 1 answers
/// `values[k]` along direction `k`, particle 2 answers `-values[k]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LhvStrategy {
    pub values: [i8; 3],
    pub lhs: f64,
    pub rhs: f64,
    pub satisfied: bool,
}

/// All eight strategies over the directions `(a, b, c)`.
pub fn lhv_strategies() -> Vec<LhvStrategy> {
    (0..8u8)
        .map(|bits| {
            let v = [0, 1, 2].map(|k| if bits >> k & 1 == 1 { -1i8 } else { 1 });
            // E(x, y) = A(x) B(y) = -A(x) A(y)
            let e = |x: usize, y: usize| -(v[x] as f64) * (v[y] as f64);
            let lhs = (e(0, 1) - e(0, 2)).abs();
            let rhs = 1.0 + e(1, 2);
            LhvStrategy {
                values: v,
                lhs,
                rhs,
                satisfied: lhs <= rhs,
            }
        })
        .collect()
}

/// Unit vector orthogonal to `a` in the plane of `a` and `b`, or any orthogonal one if they are parallel.
fn orthogonal_in_plane(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    let proj = dot(a, b);
    let mut v = [b[0] - proj * a[0], b[1] - proj * a[1], b[2] - proj * a[2]];
    if dot(v, v) < 1e-12 {
        let seed = if a[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
        let p = dot(a, seed);
        v = [seed[0] - p * a[0], seed[1] - p * a[1], seed[2] - p * a[2]];
    }
    let n = dot(v, v).sqrt();
    [v[0] / n, v[1] / n, v[2] / n]
}

pub(super) fn params() -> Vec<ParamSpec> {
    vec![
        ParamSpec::new("a", "unit direction a", json!([0.0, 0.0, 1.0])),
        ParamSpec::new("b", "unit direction b", json!([1.0, 0.0, 0.0])),
        ParamSpec::new("c", "unit direction c", json!([FRAC_1_SQRT_2, 0.0, FRAC_1_SQRT_2])),
        ParamSpec::new("scan_points", "samples of the angle scan of c in the a-b plane", 91),
    ]
}

pub(super) fn run(ctx: &mut Run) -> Result<()> {
    let a = unit_vector(ctx.params.vec3("a")?)?;
    let b = unit_vector(ctx.params.vec3("b")?)?;
    let c = unit_vector(ctx.params.vec3("c")?)?;
    let points = ctx.params.usize("scan_points")?;
    let t = bell_terms(a, b, c)?;
    ctx.approx("lhs", t.lhs, (dot(a, c) - dot(a, b)).abs(), 1e-9);
    ctx.approx("rhs", t.rhs, 1.0 - dot(b, c), 1e-9);
    for (name, v) in [("E_ab", t.ab), ("E_ac", t.ac), ("E_bc", t.bc), ("lhs", t.lhs), ("rhs", t.rhs)] {
        ctx.scalar(name, v)?;
    }
    ctx.scalar("violation", t.lhs - t.rhs)?;
    ctx.scalar("violated", if t.violated() { 1.0 } else { 0.0 })?;

    let strategies = lhv_strategies();
    let ok = strategies.iter().filter(|s| s.satisfied).count();
    ctx.count("lhv_strategies_satisfying", ok, strategies.len());
    ctx.table(
        "lhv_strategies",
        Table::new(
            strategies
                .iter()
                .map(|s| format!("A=({:+},{:+},{:+})", s.values[0], s.values[1], s.values[2]))
                .collect(),
            vec!["lhs".into(), "rhs".into(), "satisfied".into()],
            strategies
                .iter()
                .map(|s| vec![s.lhs, s.rhs, if s.satisfied { 1.0 } else { 0.0 }])
                .collect(),
        ),
    )?;
    ctx.note("every mixture of the enumerated strategies satisfies the inequality by convexity");

    if points >= 2 {
        let perp = orthogonal_in_plane(a, b);
        let mut curve = Curve::new(&[("theta", "rad"), ("lhs", "(hbar/2)^2"), ("rhs", "(hbar/2)^2"), ("violated", "bool")]);
        for k in 0..points {
            let th = std::f64::consts::PI * k as f64 / (points - 1) as f64;
            let (s, co) = th.sin_cos();
            let cv = [co * a[0] + s * perp[0], co * a[1] + s * perp[1], co * a[2] + s * perp[2]];
            let n = dot(cv, cv).sqrt();
            let cv = [cv[0] / n, cv[1] / n, cv[2] / n];
            let tk = bell_terms(a, b, cv)?;
            curve.push(vec![th, tk.lhs, tk.rhs, if tk.violated() { 1.0 } else { 0.0 }]);
        }
        ctx.curve("angle_scan", curve)?;
    }
    Ok(())
}
