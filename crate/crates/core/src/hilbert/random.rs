//! Seeded random states, unitaries and channels.
//!
//! Every generator is deterministic for a given seed; all use `ChaCha8Rng`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::density::DensityMatrix;
use super::linalg::{self, c, CMatrix, CVector};
use super::partition::Partition;
use super::state::StateVector;
use crate::error::{Error, Result};

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// SplitMix64 mix of `(seed, stream)`; used to derive independent per-stream seeds.
pub fn split_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed
        .wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(stream.wrapping_add(1)));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        c(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

pub fn gaussian_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CVector {
    CVector::from_fn(dim, |_, _| c(rng.sample(StandardNormal), rng.sample(StandardNormal)))
}

/// Normalized complex-Gaussian vector (unitarily invariant).
pub fn random_pure_state_on<R: Rng + ?Sized>(partition: Partition, rng: &mut R) -> Result<StateVector> {
    let v = gaussian_vector(partition.total_dim(), rng);
    StateVector::normalized(v, partition)
}

pub fn random_pure_state(dim: usize, seed: u64) -> Result<StateVector> {
    random_pure_state_on(Partition::single("S", dim), &mut rng_from_seed(seed))
}

/// `G G^dag / Tr` with `G` a `dim × rank` complex-Gaussian matrix.
pub fn random_density_matrix_with_rng<R: Rng + ?Sized>(
    partition: Partition,
    rank: usize,
    rng: &mut R,
) -> Result<DensityMatrix> {
    let dim = partition.total_dim();
    if rank == 0 || rank > dim {
        return Err(Error::RankOutOfRange { rank, dim });
    }
    let g = gaussian_matrix(dim, rank, rng);
    let w = &g * g.adjoint();
    let tr = linalg::trace(&w).re;
    DensityMatrix::new(w / linalg::r(tr), partition)
}

pub fn random_density_matrix_on(partition: Partition, rank: usize, seed: u64) -> Result<DensityMatrix> {
    random_density_matrix_with_rng(partition, rank, &mut rng_from_seed(seed))
}

pub fn random_density_matrix(dim: usize, rank: usize, seed: u64) -> Result<DensityMatrix> {
    random_density_matrix_on(Partition::single("S", dim), rank, seed)
}

/// Haar-random unitary via QR of a Gaussian matrix with phase correction.
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    phase_corrected_q(gaussian_matrix(dim, dim, rng))
}

/// Thin `Q` of `g = QR` with the phases of `diag(R)` moved into `Q`.
fn phase_corrected_q(g: CMatrix) -> CMatrix {
    let qr = g.qr();
    let mut q = qr.q();
    let rr = qr.r();
    for j in 0..q.ncols() {
        let d = rr[(j, j)];
        let ph = if d.norm() > 0.0 { d / d.norm() } else { linalg::ONE };
        for i in 0..q.nrows() {
            q[(i, j)] *= ph;
        }
    }
    q
}

/// Random Hermitian matrix from the Gaussian unitary ensemble (unit variance off-diagonal).
pub fn random_hermitian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    let g = gaussian_matrix(dim, dim, rng);
    (&g + g.adjoint()) * linalg::r(0.5)
}

/// Random isometry split into `n_kraus` blocks of shape `d_out × d_in`.
pub fn random_kraus_ops<R: Rng + ?Sized>(
    d_in: usize,
    d_out: usize,
    n_kraus: usize,
    rng: &mut R,
) -> Vec<CMatrix> {
    let g = gaussian_matrix(d_out * n_kraus, d_in, rng);
    let v = if d_out * n_kraus >= d_in {
        phase_corrected_q(g)
    } else {
        let gram = g.adjoint() * &g;
        &g * linalg::pinv_sqrt(&gram, 1e-300)
    };
    (0..n_kraus)
        .map(|k| v.rows(k * d_out, d_out).into_owned())
        .collect()
}
