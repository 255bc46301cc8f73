use rand::Rng;

use crate::error::{Error, Result};
use crate::hilbert::linalg::{self, CMatrix};
use crate::hilbert::random::{random_kraus_ops, rng_from_seed};
use crate::hilbert::{DensityMatrix, Operator, Partition, Tolerances};

/// Linear map `ρ ↦ Σ E_α ρ E_α^dag` in Kraus form.
///
/// Operators are `dim_out × dim_in`. Channels built with [`KrausChannel::new`]
/// are trace preserving; [`KrausChannel::trace_nonincreasing`] admits
/// `Σ E^dag E ≤ 1` for selective operations.
#[derive(Clone, Debug, PartialEq)]
pub struct KrausChannel {
    ops: Vec<CMatrix>,
    input: Partition,
    output: Partition,
}

impl KrausChannel {
    pub fn new(ops: Vec<CMatrix>, input: Partition, output: Partition) -> Result<Self> {
        Self::new_with(ops, input, output, &Tolerances::default())
    }

    pub fn new_with(ops: Vec<CMatrix>, input: Partition, output: Partition, tol: &Tolerances) -> Result<Self> {
        let ch = Self::shaped(ops, input, output, tol)?;
        let res = ch.completeness_residual();
        if res > tol.tp {
            return Err(Error::NotTracePreserving(res));
        }
        Ok(ch)
    }

    pub fn trace_nonincreasing(ops: Vec<CMatrix>, input: Partition, output: Partition) -> Result<Self> {
        let tol = Tolerances::default();
        let ch = Self::shaped(ops, input, output, &tol)?;
        let top = linalg::eigvalsh(&ch.completeness()).first().copied().unwrap_or(0.0);
        if top > 1.0 + tol.tp {
            return Err(Error::TraceIncreasing(top));
        }
        Ok(ch)
    }

    pub(crate) fn from_parts_unchecked(ops: Vec<CMatrix>, input: Partition, output: Partition) -> Self {
        Self { ops, input, output }
    }

    fn shaped(ops: Vec<CMatrix>, input: Partition, output: Partition, tol: &Tolerances) -> Result<Self> {
        let (di, d_out) = (input.total_dim(), output.total_dim());
        if ops.is_empty() {
            return Err(Error::InvalidModel("a channel needs at least one Kraus operator".into()));
        }
        for d in [di, d_out] {
            if d > tol.max_dim {
                return Err(Error::DimensionLimit { dim: d, limit: tol.max_dim });
            }
        }
        for e in &ops {
            if e.ncols() != di {
                return Err(Error::DimensionMismatch { expected: di, got: e.ncols() });
            }
            if e.nrows() != d_out {
                return Err(Error::DimensionMismatch { expected: d_out, got: e.nrows() });
            }
        }
        Ok(Self { ops, input, output })
    }

    pub fn identity(partition: Partition) -> Self {
        let d = partition.total_dim();
        Self {
            ops: vec![linalg::identity(d)],
            input: partition.clone(),
            output: partition,
        }
    }

    pub fn unitary(u: CMatrix, partition: Partition) -> Result<Self> {
        let d = partition.total_dim();
        if u.nrows() != d || u.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, got: u.nrows() });
        }
        Self::new(vec![u], partition.clone(), partition)
    }

    pub fn ops(&self) -> &[CMatrix] {
        &self.ops
    }

    pub fn input(&self) -> &Partition {
        &self.input
    }

    pub fn output(&self) -> &Partition {
        &self.output
    }

    pub fn dim_in(&self) -> usize {
        self.input.total_dim()
    }

    pub fn dim_out(&self) -> usize {
        self.output.total_dim()
    }

    /// `Σ E^dag E`.
    pub fn completeness(&self) -> CMatrix {
        let d = self.dim_in();
        self.ops
            .iter()
            .fold(CMatrix::zeros(d, d), |acc, e| acc + e.adjoint() * e)
    }

    /// `max |Σ E^dag E - 1|`.
    pub fn completeness_residual(&self) -> f64 {
        linalg::max_abs_diff(&self.completeness(), &linalg::identity(self.dim_in()))
    }

    /// Applies the map to an arbitrary matrix.
    pub fn apply_matrix(&self, m: &CMatrix) -> CMatrix {
        let d = self.dim_out();
        self.ops
            .iter()
            .fold(CMatrix::zeros(d, d), |acc, e| acc + e * m * e.adjoint())
    }

    /// Heisenberg-picture map `X ↦ Σ E^dag X E`.
    pub fn apply_adjoint(&self, x: &CMatrix) -> CMatrix {
        let d = self.dim_in();
        self.ops
            .iter()
            .fold(CMatrix::zeros(d, d), |acc, e| acc + e.adjoint() * x * e)
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.partition() != &self.input {
            if rho.dim() != self.dim_in() {
                return Err(Error::DimensionMismatch { expected: self.dim_in(), got: rho.dim() });
            }
            return Err(Error::InvalidPartition(format!(
                "state on {} does not match channel input {}",
                rho.partition(),
                self.input
            )));
        }
        Ok(DensityMatrix::from_parts_unchecked(
            self.apply_matrix(rho.entries()),
            self.output.clone(),
        ))
    }

    /// `next ∘ self`.
    pub fn then(&self, next: &KrausChannel) -> Result<KrausChannel> {
        if next.input != self.output {
            return Err(Error::InvalidPartition(format!(
                "cannot compose output {} with input {}",
                self.output, next.input
            )));
        }
        let ops = next
            .ops
            .iter()
            .flat_map(|b| self.ops.iter().map(move |a| b * a))
            .collect();
        Ok(Self::from_parts_unchecked(ops, self.input.clone(), next.output.clone()))
    }

    pub fn tensor(&self, other: &KrausChannel) -> Result<KrausChannel> {
        let input = self.input.concat(&other.input)?;
        let output = self.output.concat(&other.output)?;
        let tol = Tolerances::default();
        for d in [input.total_dim(), output.total_dim()] {
            if d > tol.max_dim {
                return Err(Error::DimensionLimit { dim: d, limit: tol.max_dim });
            }
        }
        let ops = self
            .ops
            .iter()
            .flat_map(|a| other.ops.iter().map(move |b| linalg::kron(a, b)))
            .collect();
        Ok(Self::from_parts_unchecked(ops, input, output))
    }

    /// Extends a channel acting on some factors of `parent` by the identity on the rest.
    pub fn embed(&self, parent: &Partition) -> Result<KrausChannel> {
        if self.input != self.output {
            return Err(Error::NonLocalOperation(
                "only channels with identical input and output factors can be embedded".into(),
            ));
        }
        let ops = self
            .ops
            .iter()
            .map(|e| {
                Operator::new(e.clone(), self.input.clone())?
                    .embed(parent)
                    .map(Operator::into_entries)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_parts_unchecked(ops, parent.clone(), parent.clone()))
    }

    /// `U E_α U^dag` for every Kraus operator (square channels).
    pub fn conjugated(&self, u: &CMatrix) -> KrausChannel {
        let ops = self.ops.iter().map(|e| u * e * u.adjoint()).collect();
        Self::from_parts_unchecked(ops, self.input.clone(), self.output.clone())
    }
}

/// `ρ ↦ (1 - p) ρ + p 1/d`, realized with the `d²` Weyl operators.
pub fn depolarizing(p: f64, partition: Partition) -> Result<KrausChannel> {
    if !(0.0..=1.0 + 1.0 / ((partition.total_dim().pow(2) - 1).max(1)) as f64).contains(&p) {
        return Err(Error::InvalidModel(format!("depolarizing strength {p} out of range")));
    }
    let d = partition.total_dim();
    let d2 = (d * d) as f64;
    let omega = |k: usize| num_complex::Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / d as f64);
    let mut ops = Vec::with_capacity(d * d);
    for a in 0..d {
        for b in 0..d {
            // X^a Z^b
            let w = CMatrix::from_fn(d, d, |i, j| {
                if i == (j + a) % d {
                    omega(j * b)
                } else {
                    linalg::ZERO
                }
            });
            let weight = if a == 0 && b == 0 {
                1.0 - p + p / d2
            } else {
                p / d2
            };
            ops.push(w * linalg::r(weight.sqrt()));
        }
    }
    KrausChannel::new(ops, partition.clone(), partition)
}

/// Qubit amplitude damping with decay probability `gamma`.
pub fn amplitude_damping(gamma: f64, partition: Partition) -> Result<KrausChannel> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::InvalidModel(format!("damping probability {gamma} out of range")));
    }
    if partition.total_dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: partition.total_dim() });
    }
    let e0 = linalg::from_real_rows(&[&[1.0, 0.0], &[0.0, (1.0 - gamma).sqrt()]]);
    let e1 = linalg::from_real_rows(&[&[0.0, gamma.sqrt()], &[0.0, 0.0]]);
    KrausChannel::new(vec![e0, e1], partition.clone(), partition)
}

/// `ρ ↦ (1 - λ) ρ + λ Σ_i |i><i| ρ |i><i|` in the computational basis.
pub fn dephasing(lambda: f64, partition: Partition) -> Result<KrausChannel> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::InvalidModel(format!("dephasing strength {lambda} out of range")));
    }
    let d = partition.total_dim();
    let mut ops = Vec::with_capacity(d + 1);
    if lambda < 1.0 {
        ops.push(linalg::identity(d) * linalg::r((1.0 - lambda).sqrt()));
    }
    if lambda > 0.0 {
        for i in 0..d {
            let mut p = CMatrix::zeros(d, d);
            p[(i, i)] = linalg::r(lambda.sqrt());
            ops.push(p);
        }
    }
    KrausChannel::new(ops, partition.clone(), partition)
}

/// Random channel from a Gaussian isometry with `n_kraus` operators.
pub fn random_channel_with_rng<R: Rng + ?Sized>(
    input: Partition,
    output: Partition,
    n_kraus: usize,
    rng: &mut R,
) -> Result<KrausChannel> {
    if n_kraus == 0 {
        return Err(Error::InvalidModel("n_kraus must be at least 1".into()));
    }
    let ops = random_kraus_ops(input.total_dim(), output.total_dim(), n_kraus, rng);
    KrausChannel::new(ops, input, output)
}

pub fn random_channel(partition: Partition, n_kraus: usize, seed: u64) -> Result<KrausChannel> {
    random_channel_with_rng(partition.clone(), partition, n_kraus, &mut rng_from_seed(seed))
}

/// Non-selective projective measurement `ρ ↦ Σ P ρ P`.
pub fn luders_channel(projectors: &[Operator]) -> Result<KrausChannel> {
    luders_channel_with(projectors, &Tolerances::default())
}

pub fn luders_channel_with(projectors: &[Operator], tol: &Tolerances) -> Result<KrausChannel> {
    let first = projectors
        .first()
        .ok_or_else(|| Error::InvalidProjectors("empty projector set".into()))?;
    let partition = first.partition().clone();
    let d = partition.total_dim();
    for (k, p) in projectors.iter().enumerate() {
        if p.partition() != &partition {
            return Err(Error::InvalidProjectors(format!("projector {k} lives on a different space")));
        }
        let m = p.entries();
        let herm = linalg::hermiticity_residual(m);
        let idem = linalg::max_abs_diff(&(m * m), m);
        if herm > tol.herm || idem > tol.tp {
            return Err(Error::InvalidProjectors(format!(
                "operator {k} is not an orthogonal projector (hermiticity {herm:.3e}, idempotency {idem:.3e})"
            )));
        }
    }
    for i in 0..projectors.len() {
        for j in (i + 1)..projectors.len() {
            let overlap = linalg::max_abs(&(projectors[i].entries() * projectors[j].entries()));
            if overlap > tol.orth {
                return Err(Error::InvalidProjectors(format!(
                    "projectors {i} and {j} are not mutually orthogonal ({overlap:.3e})"
                )));
            }
        }
    }
    let sum = projectors
        .iter()
        .fold(CMatrix::zeros(d, d), |acc, p| acc + p.entries());
    let res = linalg::max_abs_diff(&sum, &linalg::identity(d));
    if res > tol.tp {
        return Err(Error::InvalidProjectors(format!(
            "projectors do not sum to the identity (residual {res:.3e})"
        )));
    }
    let ops = projectors.iter().map(|p| p.entries().clone()).collect();
    KrausChannel::new_with(ops, partition.clone(), partition, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::linalg::{c, from_real_rows, max_abs_diff};
    use crate::hilbert::random::random_density_matrix_on;

    fn q() -> Partition {
        Partition::single("Q", 2)
    }

    #[test]
    fn identity_and_unitary() {
        let rho = random_density_matrix_on(q(), 2, 3).unwrap();
        let id = KrausChannel::identity(q());
        assert_eq!(id.apply(&rho).unwrap().entries(), rho.entries());
        let u = linalg::hadamard();
        let ch = KrausChannel::unitary(u.clone(), q()).unwrap();
        let expected = &u * rho.entries() * u.adjoint();
        assert!(max_abs_diff(ch.apply(&rho).unwrap().entries(), &expected) < 1e-15);
    }

    #[test]
    fn full_dephasing_kills_coherence() {
        let m = CMatrix::from_row_slice(2, 2, &[c(0.4, 0.0), c(0.1, 0.2), c(0.1, -0.2), c(0.6, 0.0)]);
        let rho = DensityMatrix::new(m, q()).unwrap();
        let p0 = Operator::new(from_real_rows(&[&[1.0, 0.0], &[0.0, 0.0]]), q()).unwrap();
        let p1 = Operator::new(from_real_rows(&[&[0.0, 0.0], &[0.0, 1.0]]), q()).unwrap();
        let out = luders_channel(&[p0, p1]).unwrap().apply(&rho).unwrap();
        assert!(max_abs_diff(out.entries(), &from_real_rows(&[&[0.4, 0.0], &[0.0, 0.6]])) < 1e-15);
        let dep = dephasing(1.0, q()).unwrap().apply(&rho).unwrap();
        assert!(max_abs_diff(dep.entries(), out.entries()) < 1e-15);
    }

    #[test]
    fn luders_rejects_bad_sets() {
        let p0 = Operator::new(from_real_rows(&[&[1.0, 0.0], &[0.0, 0.0]]), q()).unwrap();
        assert!(matches!(luders_channel(&[p0.clone()]), Err(Error::InvalidProjectors(_))));
        let s = 0.5f64.sqrt();
        let plus = Operator::new(from_real_rows(&[&[0.5, 0.5], &[0.5, 0.5]]), q()).unwrap();
        assert!(matches!(luders_channel(&[p0, plus]), Err(Error::InvalidProjectors(_))));
        let skew = Operator::new(from_real_rows(&[&[s, 0.0], &[0.0, 0.0]]), q()).unwrap();
        assert!(luders_channel(&[skew]).is_err());
        assert!(luders_channel(&[]).is_err());
    }

    #[test]
    fn identity_projector_is_identity_channel() {
        let id = Operator::identity(q()).unwrap();
        let ch = luders_channel(&[id]).unwrap();
        let rho = random_density_matrix_on(q(), 2, 1).unwrap();
        assert!(max_abs_diff(ch.apply(&rho).unwrap().entries(), rho.entries()) < 1e-15);
    }

    #[test]
    fn constructors_are_trace_preserving() {
        let p3 = Partition::single("Q", 3);
        for ch in [
            depolarizing(0.3, q()).unwrap(),
            depolarizing(0.5, p3.clone()).unwrap(),
            amplitude_damping(0.2, q()).unwrap(),
            dephasing(0.4, p3.clone()).unwrap(),
            random_channel(p3, 3, 8).unwrap(),
        ] {
            assert!(ch.completeness_residual() < 1e-12);
        }
    }

    #[test]
    fn depolarizing_mixes_toward_identity() {
        let p3 = Partition::single("Q", 3);
        let rho = random_density_matrix_on(p3.clone(), 3, 2).unwrap();
        let out = depolarizing(0.25, p3).unwrap().apply(&rho).unwrap();
        let expected = rho.entries() * linalg::r(0.75) + linalg::identity(3) * linalg::r(0.25 / 3.0);
        assert!(max_abs_diff(out.entries(), &expected) < 1e-14);
    }

    #[test]
    fn rejects_non_trace_preserving() {
        let ops = vec![linalg::identity(2) * linalg::r(0.9)];
        assert!(matches!(KrausChannel::new(ops.clone(), q(), q()), Err(Error::NotTracePreserving(_))));
        assert!(KrausChannel::trace_nonincreasing(ops, q(), q()).is_ok());
        let big = vec![linalg::identity(2) * linalg::r(1.1)];
        assert!(matches!(KrausChannel::trace_nonincreasing(big, q(), q()), Err(Error::TraceIncreasing(_))));
    }

    #[test]
    fn embed_and_tensor_agree() {
        let ab = Partition::new([("A", 2), ("B", 2)]).unwrap();
        let b = Partition::single("B", 2);
        let local = amplitude_damping(0.3, b.clone()).unwrap();
        let embedded = local.embed(&ab).unwrap();
        let tensored = KrausChannel::identity(Partition::single("A", 2)).tensor(&local).unwrap();
        let rho = random_density_matrix_on(ab, 4, 5).unwrap();
        let x = embedded.apply(&rho).unwrap();
        let y = tensored.apply(&rho).unwrap();
        assert!(max_abs_diff(x.entries(), y.entries()) < 1e-15);
    }

    #[test]
    fn composition() {
        let a = amplitude_damping(0.3, q()).unwrap();
        let b = dephasing(0.5, q()).unwrap();
        let ab = a.then(&b).unwrap();
        let rho = random_density_matrix_on(q(), 2, 6).unwrap();
        let seq = b.apply(&a.apply(&rho).unwrap()).unwrap();
        assert!(max_abs_diff(ab.apply(&rho).unwrap().entries(), seq.entries()) < 1e-15);
        assert!(ab.completeness_residual() < 1e-14);
    }
}
