use super::choi::{choi_of_map, kraus_from_choi};
use super::kraus::KrausChannel;
use crate::error::{Error, Result};
use crate::hilbert::linalg::{self, CMatrix, I};
use crate::hilbert::{DensityMatrix, Operator, Partition, Tolerances};

pub const DEFAULT_STEP: f64 = 1e-3;

/// Diagonal-form Lindblad generator with `ħ = 1`:
///
/// `dρ/dt = -i[H, ρ] + Σ_k γ_k (A_k ρ A_k^dag - ½ A_k^dag A_k ρ - ½ ρ A_k^dag A_k)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LindbladGenerator {
    hamiltonian: CMatrix,
    jumps: Vec<CMatrix>,
    rates: Vec<f64>,
    partition: Partition,
}

impl LindbladGenerator {
    pub fn new(hamiltonian: CMatrix, jumps: Vec<CMatrix>, rates: Vec<f64>, partition: Partition) -> Result<Self> {
        Self::new_with(hamiltonian, jumps, rates, partition, &Tolerances::default())
    }

    pub fn new_with(
        hamiltonian: CMatrix,
        jumps: Vec<CMatrix>,
        rates: Vec<f64>,
        partition: Partition,
        tol: &Tolerances,
    ) -> Result<Self> {
        let d = partition.total_dim();
        if d > tol.max_dim {
            return Err(Error::DimensionLimit { dim: d, limit: tol.max_dim });
        }
        if hamiltonian.nrows() != d || hamiltonian.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, got: hamiltonian.nrows() });
        }
        let herm = linalg::hermiticity_residual(&hamiltonian);
        if herm > tol.herm {
            return Err(Error::NotHermitian(herm));
        }
        if jumps.len() != rates.len() {
            return Err(Error::InvalidGenerator(format!(
                "{} jump operators but {} rates",
                jumps.len(),
                rates.len()
            )));
        }
        for (k, (a, &g)) in jumps.iter().zip(rates.iter()).enumerate() {
            if a.nrows() != d || a.ncols() != d {
                return Err(Error::DimensionMismatch { expected: d, got: a.nrows() });
            }
            if !(g >= 0.0 && g.is_finite()) {
                return Err(Error::InvalidGenerator(format!("rate {k} is {g}; rates must be finite and non-negative")));
            }
        }
        Ok(Self {
            hamiltonian: linalg::hermitian_part(&hamiltonian),
            jumps,
            rates,
            partition,
        })
    }

    /// Closed evolution `-i[H, ρ]`.
    pub fn hamiltonian_only(hamiltonian: CMatrix, partition: Partition) -> Result<Self> {
        Self::new(hamiltonian, vec![], vec![], partition)
    }

    pub fn hamiltonian(&self) -> &CMatrix {
        &self.hamiltonian
    }

    pub fn jumps(&self) -> &[CMatrix] {
        &self.jumps
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    /// Same generator acting on the matching factors of `parent`, identity elsewhere.
    pub fn embed(&self, parent: &Partition) -> Result<LindbladGenerator> {
        let lift = |m: &CMatrix| -> Result<CMatrix> {
            Ok(Operator::new(m.clone(), self.partition.clone())?.embed(parent)?.into_entries())
        };
        let jumps = self.jumps.iter().map(lift).collect::<Result<Vec<_>>>()?;
        Self::new(lift(&self.hamiltonian)?, jumps, self.rates.clone(), parent.clone())
    }

    /// Right-hand side of the master equation at `ρ`.
    pub fn derivative(&self, rho: &CMatrix) -> CMatrix {
        let h = &self.hamiltonian;
        let mut out = (h * rho - rho * h) * (-I);
        for (a, &g) in self.jumps.iter().zip(self.rates.iter()) {
            if g == 0.0 {
                continue;
            }
            let ad = a.adjoint();
            let ada = &ad * a;
            out += (a * rho * &ad - (&ada * rho + rho * &ada) * linalg::r(0.5)) * linalg::r(g);
        }
        out
    }

    fn rk4_step(&self, m: &CMatrix, h: f64) -> CMatrix {
        let hc = linalg::r(h);
        let half = linalg::r(h / 2.0);
        let k1 = self.derivative(m);
        let k2 = self.derivative(&(m + &k1 * half));
        let k3 = self.derivative(&(m + &k2 * half));
        let k4 = self.derivative(&(m + &k3 * hc));
        m + (k1 + k2 * linalg::r(2.0) + k3 * linalg::r(2.0) + k4) * (hc / linalg::r(6.0))
    }

    /// Fixed-step RK4 from `0` to `t`.
    ///
    /// The step is shortened so that an integer number of steps lands exactly on
    /// `t`. After each step the state is symmetrized and its trace reset to the
    /// initial trace. Any eigenvalue below `-ε_psd` aborts with
    /// [`Error::StepTooLarge`].
    pub fn evolve(&self, rho: &DensityMatrix, t: f64, step: f64) -> Result<DensityMatrix> {
        self.evolve_with(rho, t, step, &Tolerances::default())
    }

    pub fn evolve_with(&self, rho: &DensityMatrix, t: f64, step: f64, tol: &Tolerances) -> Result<DensityMatrix> {
        let samples = self.evolve_sampled_with(rho, &[t], step, tol)?;
        Ok(samples.into_iter().next().expect("one sample"))
    }

    /// States at each of the increasing `times`, integrated from `0`.
    pub fn evolve_sampled(&self, rho: &DensityMatrix, times: &[f64], step: f64) -> Result<Vec<DensityMatrix>> {
        self.evolve_sampled_with(rho, times, step, &Tolerances::default())
    }

    pub fn evolve_sampled_with(
        &self,
        rho: &DensityMatrix,
        times: &[f64],
        step: f64,
        tol: &Tolerances,
    ) -> Result<Vec<DensityMatrix>> {
        if rho.partition() != &self.partition {
            return Err(Error::DimensionMismatch { expected: self.partition.total_dim(), got: rho.dim() });
        }
        check_times(times, step)?;
        let tr0 = rho.trace();
        let mut m = rho.entries().clone();
        let mut now = 0.0;
        let mut out = Vec::with_capacity(times.len());
        for &target in times {
            let span = target - now;
            let n = (span / step).ceil().max(0.0) as usize;
            let h = if n > 0 { span / n as f64 } else { 0.0 };
            for k in 0..n {
                m = linalg::hermitian_part(&self.rk4_step(&m, h));
                let tr = linalg::trace(&m).re;
                if tr.abs() > 0.0 {
                    m *= linalg::r(tr0 / tr);
                }
                let min = linalg::min_eigenvalue(&m);
                if min < -tol.psd {
                    return Err(Error::StepTooLarge {
                        time: now + (k + 1) as f64 * h,
                        min_eigenvalue: min,
                    });
                }
            }
            now = target;
            out.push(DensityMatrix::from_parts_unchecked(m.clone(), self.partition.clone()));
        }
        Ok(out)
    }

    /// Linear propagation of an arbitrary matrix (no renormalization or positivity checks).
    pub fn propagate_matrix(&self, m: &CMatrix, t: f64, step: f64) -> Result<CMatrix> {
        check_times(&[t], step)?;
        let n = (t / step).ceil() as usize;
        let h = if n > 0 { t / n as f64 } else { 0.0 };
        let mut m = m.clone();
        for _ in 0..n {
            m = self.rk4_step(&m, h);
        }
        Ok(m)
    }

    /// Kraus form of the map `e^{tL}` obtained from the propagated Choi matrix.
    pub fn to_channel(&self, t: f64, step: f64) -> Result<KrausChannel> {
        check_times(&[t], step)?;
        let j = choi_of_map(
            |m| self.propagate_matrix(m, t, step).expect("times checked"),
            self.partition.clone(),
            self.partition.clone(),
        )?;
        let herm = linalg::hermitian_part(j.entries());
        let j = super::choi::ChoiMatrix::new(herm, self.partition.clone(), self.partition.clone())?;
        let tol = Tolerances {
            tp: 1e-8,
            psd: 1e-9,
            ..Tolerances::default()
        };
        super::choi::kraus_from_choi_with(&j, &tol).or_else(|_| kraus_from_choi(&j))
    }
}

fn check_times(times: &[f64], step: f64) -> Result<()> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidTime(format!("step must be positive, got {step}")));
    }
    let mut prev = 0.0;
    for &t in times {
        if !(t >= prev && t.is_finite()) {
            return Err(Error::InvalidTime(format!(
                "times must be finite, non-negative and increasing (got {t} after {prev})"
            )));
        }
        prev = t;
    }
    Ok(())
}
