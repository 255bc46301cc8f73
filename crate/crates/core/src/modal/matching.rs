use pathfinding::kuhn_munkres::kuhn_munkres;
use pathfinding::matrix::Matrix;

use crate::hilbert::linalg::CMatrix;

const SCALE: f64 = 1e12;

/// Matches final eigenstates to initial ones by maximum total `|<ψ_j(t')|ψ_i(t)>|`.
///
/// Returns `m` with `m[i]` the final index assigned to initial state `i`.
/// Both inputs hold eigenvectors as columns.
pub fn match_eigenstates(initial: &CMatrix, fin: &CMatrix) -> Vec<usize> {
    let overlaps = initial.adjoint() * fin;
    let n = overlaps.nrows();
    if n == 0 {
        return vec![];
    }
    let weights = Matrix::from_fn(n, overlaps.ncols().max(n), |(i, j)| {
        if j < overlaps.ncols() {
            (overlaps[(i, j)].norm() * SCALE).round() as i64
        } else {
            0
        }
    });
    kuhn_munkres(&weights).1
}
