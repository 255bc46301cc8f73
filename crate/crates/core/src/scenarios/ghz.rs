use super::config::ParamSpec;
use super::report::Table;
use super::Run;
use crate::error::Result;
use crate::hilbert::linalg::{self, r, CMatrix, CVector};

/// `(|↑↑↑> - |↓↓↓>) / √2` with `↑ = 0`.
pub fn ghz_state() -> CVector {
    let mut v = CVector::zeros(8);
    v[0] = r(0.5f64.sqrt());
    v[7] = r(-(0.5f64.sqrt()));
    v
}

/// Product of Pauli matrices, `axes[k]` being `'x'`, `'y'` or `'z'` for spin `k`.
pub fn pauli_product(axes: &[char]) -> CMatrix {
    axes.iter().fold(linalg::identity(1), |acc, ax| {
        let p = match ax {
            'x' => linalg::pauli_x(),
            'y' => linalg::pauli_y(),
            'z' => linalg::pauli_z(),
            _ => linalg::identity(2),
        };
        linalg::kron(&acc, &p)
    })
}

/// The four GHZ observables, named by their axis pattern.
pub const GHZ_OPERATORS: [&str; 4] = ["xyy", "yxy", "yyx", "xxx"];

/// `(eigenvalue, residual)` with residual `|| O ψ - λ ψ ||` for each operator.
pub fn ghz_eigenvalues() -> Vec<(f64, f64)> {
    let psi = ghz_state();
    GHZ_OPERATORS
        .iter()
        .map(|name| {
            let op = pauli_product(&name.chars().collect::<Vec<_>>());
            let out = &op * &psi;
            let lambda = linalg::inner(&psi, &out).re;
            (lambda, (out - &psi * r(lambda)).norm())
        })
        .collect()
}

/// Local instruction sets `(m_x^k, m_y^k)` consistent with all product constraints.
///
/// Bit `2k` of the index encodes `m_x^k` and bit `2k + 1` encodes `m_y^k` (set = −1).
pub fn consistent_instruction_sets(targets: &[f64]) -> Vec<u8> {
    (0..64u8)
        .filter(|&bits| {
            let m = |k: usize, ax: char| {
                let bit = 2 * k + usize::from(ax == 'y');
                if bits >> bit & 1 == 1 {
                    -1.0
                } else {
                    1.0
                }
            };
            GHZ_OPERATORS.iter().zip(targets.iter()).all(|(name, &t)| {
                let prod: f64 = name.chars().enumerate().map(|(k, ax)| m(k, ax)).product();
                prod == t.round()
            })
        })
        .collect()
}

pub(super) fn params() -> Vec<ParamSpec> {
    vec![]
}

pub(super) fn run(ctx: &mut Run) -> Result<()> {
    let eig = ghz_eigenvalues();
    let expected = [1.0, 1.0, 1.0, -1.0];
    for ((name, (lambda, res)), e) in GHZ_OPERATORS.iter().zip(eig.iter()).zip(expected.iter()) {
        ctx.approx(&format!("eigenvalue_{name}"), *lambda, *e, 1e-12);
        ctx.at_most(&format!("eigen_residual_{name}"), *res, 1e-12);
    }
    let targets: Vec<f64> = eig.iter().map(|(l, _)| *l).collect();
    let consistent = consistent_instruction_sets(&targets);
    ctx.count("consistent_instruction_sets", consistent.len(), 0);
    ctx.scalar("instruction_sets_searched", 64.0)?;
    ctx.table(
        "eigenvalues",
        Table::new(
            GHZ_OPERATORS.iter().map(|s| format!("S_{s}")).collect(),
            vec!["eigenvalue".into(), "residual".into()],
            eig.iter().map(|(l, r)| vec![*l, *r]).collect(),
        ),
    )?;
    Ok(())
}
