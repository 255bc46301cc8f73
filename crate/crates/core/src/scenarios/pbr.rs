use super::config::ParamSpec;
use super::report::Table;
use super::Run;
use crate::error::Result;
use crate::hilbert::linalg::{self, r, CMatrix, CVector};

fn ket(a: [f64; 2], b: [f64; 2]) -> CVector {
    let v = |x: [f64; 2]| CVector::from_vec(vec![r(x[0]), r(x[1])]);
    linalg::kron_vec(&v(a), &v(b))
}

const ZERO: [f64; 2] = [1.0, 0.0];
const ONE: [f64; 2] = [0.0, 1.0];
const S: f64 = std::f64::consts::FRAC_1_SQRT_2;
const PLUS: [f64; 2] = [S, S];
const MINUS: [f64; 2] = [S, -S];

/// Columns `ξ_1 … ξ_4`.
pub fn pbr_basis() -> CMatrix {
    let s = r(S);
    let cols = [
        (ket(ZERO, ONE) + ket(ONE, ZERO)) * s,
        (ket(ZERO, MINUS) + ket(ONE, PLUS)) * s,
        (ket(PLUS, ONE) + ket(MINUS, ZERO)) * s,
        (ket(PLUS, MINUS) + ket(MINUS, PLUS)) * s,
    ];
    CMatrix::from_columns(&cols)
}

pub const PRODUCT_STATES: [&str; 4] = ["00", "0+", "+0", "++"];

pub fn product_states() -> Vec<CVector> {
    vec![ket(ZERO, ZERO), ket(ZERO, PLUS), ket(PLUS, ZERO), ket(PLUS, PLUS)]
}

/// `table[k][i] = |<ξ_i|φ_k>|²` for the four product states `φ_k`.
pub fn born_table() -> Vec<Vec<f64>> {
    let xi = pbr_basis();
    product_states()
        .iter()
        .map(|phi| (0..4).map(|i| linalg::inner(&xi.column(i).into_owned(), phi).norm_sqr()).collect())
        .collect()
}

pub(super) fn params() -> Vec<ParamSpec> {
    vec![]
}

pub(super) fn run(ctx: &mut Run) -> Result<()> {
    let xi = pbr_basis();
    let gram = xi.adjoint() * &xi;
    ctx.at_most("gram_identity", linalg::max_abs_diff(&gram, &linalg::identity(4)), 1e-12);
    let phis = product_states();
    for (k, (phi, name)) in phis.iter().zip(PRODUCT_STATES).enumerate() {
        let overlap = linalg::inner(&xi.column(k).into_owned(), phi).norm();
        ctx.at_most(&format!("overlap_xi{}_{name}", k + 1), overlap, 1e-12);
    }
    let table = born_table();
    for (row, name) in table.iter().zip(PRODUCT_STATES) {
        let zeros = row.iter().filter(|&&p| p < 1e-12).count();
        ctx.count(&format!("zero_outcomes_{name}"), zeros, 1);
        ctx.approx(&format!("row_sum_{name}"), row.iter().sum(), 1.0, 1e-12);
    }
    ctx.table(
        "born_weights",
        Table::new(
            PRODUCT_STATES.iter().map(|s| s.to_string()).collect(),
            (1..=4).map(|i| format!("xi_{i}")).collect(),
            table,
        ),
    )?;
    ctx.matrix("basis", &xi)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn designated_overlaps_vanish() {
        let xi = pbr_basis();
        for (k, phi) in product_states().iter().enumerate() {
            assert!(linalg::inner(&xi.column(k).into_owned(), phi).norm() < 1e-15);
        }
        assert!(linalg::max_abs_diff(&(xi.adjoint() * &xi), &linalg::identity(4)) < 1e-15);
    }

    #[test]
    fn one_excluded_outcome_each() {
        for row in born_table() {
            assert_eq!(row.iter().filter(|&&p| p < 1e-12).count(), 1);
        }
    }
}
