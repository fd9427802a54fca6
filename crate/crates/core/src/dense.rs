//! Dense state-vector and density-matrix oracles for small systems.
//!
//! Qubit `j` corresponds to bit `j` of the computational-basis index.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::circuit::{CliffordCircuit, Gate};
use crate::pauli::{Pauli, PauliOperator};
use crate::tableau::StabilizerTableau;

pub type C64 = Complex64;

/// Fixed seed for the generic starting vector of `tableau_to_dense`.
const ORACLE_SEED: u64 = 0x5eed_0f0a;

/// Largest system the dense oracle accepts.
pub const MAX_DENSE_QUBITS: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DenseError {
    #[error("{0} qubits exceeds the dense oracle limit of {MAX_DENSE_QUBITS}")]
    TooLarge(usize),
    #[error("operator acts on {found} qubits, state has {expected}")]
    SizeMismatch { expected: usize, found: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct DenseState {
    n: usize,
    amps: Vec<C64>,
}

impl DenseState {
    pub fn zero(n: usize) -> Result<Self, DenseError> {
        if n > MAX_DENSE_QUBITS {
            return Err(DenseError::TooLarge(n));
        }
        let mut amps = vec![C64::new(0.0, 0.0); 1 << n];
        amps[0] = C64::new(1.0, 0.0);
        Ok(Self { n, amps })
    }

    pub fn from_amplitudes(amps: Vec<C64>) -> Self {
        assert!(amps.len().is_power_of_two(), "length must be a power of two");
        let n = amps.len().trailing_zeros() as usize;
        Self { n, amps }
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalize(&mut self) {
        let norm = self.norm();
        for a in &mut self.amps {
            *a /= norm;
        }
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &DenseState) -> C64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn overlap(&self, other: &DenseState) -> f64 {
        self.inner(other).norm_sqr()
    }

    pub fn equal_up_to_phase(&self, other: &DenseState, tol: f64) -> bool {
        self.n == other.n && (self.overlap(other) - 1.0).abs() < tol
    }

    pub fn apply_gate(&mut self, gate: &Gate) {
        let dim = self.amps.len();
        match *gate {
            Gate::H(q) => {
                let m = 1 << q;
                let s = std::f64::consts::FRAC_1_SQRT_2;
                for i in (0..dim).filter(|i| i & m == 0) {
                    let (a, b) = (self.amps[i], self.amps[i | m]);
                    self.amps[i] = (a + b) * s;
                    self.amps[i | m] = (a - b) * s;
                }
            }
            Gate::S(q) => {
                for (i, a) in self.amps.iter_mut().enumerate() {
                    if i >> q & 1 == 1 {
                        *a *= C64::i();
                    }
                }
            }
            Gate::Cnot(c, t) => {
                let (mc, mt) = (1 << c, 1 << t);
                for i in (0..dim).filter(|i| i & mc != 0 && i & mt == 0) {
                    self.amps.swap(i, i | mt);
                }
            }
            Gate::Cz(a, b) => {
                let m = (1 << a) | (1 << b);
                for (i, amp) in self.amps.iter_mut().enumerate() {
                    if i & m == m {
                        *amp = -*amp;
                    }
                }
            }
            Gate::Pauli(q, p) => {
                let op = PauliOperator::single(self.n, q, p);
                self.apply_pauli(&op).expect("size checked by construction");
            }
        }
    }

    /// Applies a Pauli operator including its phase.
    pub fn apply_pauli(&mut self, p: &PauliOperator) -> Result<(), DenseError> {
        if p.n_qubits() != self.n {
            return Err(DenseError::SizeMismatch {
                expected: self.n,
                found: p.n_qubits(),
            });
        }
        let (xm, zm) = masks(p);
        let k = (p.phase().exponent() as u32 + (xm & zm).count_ones()) & 3;
        let factor = C64::i().powu(k);
        let mut out = vec![C64::new(0.0, 0.0); self.amps.len()];
        for (i, &a) in self.amps.iter().enumerate() {
            let sign = if (zm & i as u64).count_ones() & 1 == 1 { -1.0 } else { 1.0 };
            out[i ^ xm as usize] = a * factor * sign;
        }
        self.amps = out;
        Ok(())
    }

    /// `⟨ψ|P|ψ⟩`.
    pub fn expectation(&self, p: &PauliOperator) -> Result<C64, DenseError> {
        let mut moved = self.clone();
        moved.apply_pauli(p)?;
        Ok(self.inner(&moved))
    }

    /// Applies `(I + (-1)^bit P) / 2` without renormalizing.
    pub fn project(&mut self, p: &PauliOperator, bit: bool) -> Result<(), DenseError> {
        let mut moved = self.clone();
        moved.apply_pauli(p)?;
        let s = if bit { -0.5 } else { 0.5 };
        for (a, b) in self.amps.iter_mut().zip(&moved.amps) {
            *a = *a * 0.5 + *b * s;
        }
        Ok(())
    }

    /// Rotates the global phase so the first nonzero amplitude is real
    /// and positive.
    pub fn canonicalize_phase(&mut self) {
        if let Some(a) = self.amps.iter().find(|a| a.norm() > 1e-9).copied() {
            let rot = a.conj() / a.norm();
            for x in &mut self.amps {
                *x *= rot;
            }
        }
    }

    pub fn density_matrix(&self) -> DMatrix<C64> {
        let d = self.amps.len();
        DMatrix::from_fn(d, d, |i, j| self.amps[i] * self.amps[j].conj())
    }
}

fn masks(p: &PauliOperator) -> (u64, u64) {
    let x = p.x_bits().words().first().copied().unwrap_or(0);
    let z = p.z_bits().words().first().copied().unwrap_or(0);
    (x, z)
}

/// State vector of the stabilizer state held by `tableau`, obtained by
/// projecting a generic vector onto the joint +1 eigenspace of the
/// stabilizers. Global phase is fixed by `canonicalize_phase`.
pub fn tableau_to_dense(tableau: &StabilizerTableau) -> Result<DenseState, DenseError> {
    let n = tableau.n_qubits();
    if n > MAX_DENSE_QUBITS {
        return Err(DenseError::TooLarge(n));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(ORACLE_SEED);
    let amps = (0..1usize << n)
        .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    let mut psi = DenseState { n, amps };
    for s in tableau.stabilizers() {
        psi.project(&s, false)?;
    }
    psi.normalize();
    psi.canonicalize_phase();
    Ok(psi)
}

/// Dense simulation of the gates of `circuit` starting from `|0…0⟩`.
pub fn simulate_gates(circuit: &CliffordCircuit) -> Result<DenseState, DenseError> {
    let mut psi = DenseState::zero(circuit.n_qubits())?;
    for g in circuit.gates() {
        psi.apply_gate(g);
    }
    Ok(psi)
}

/// `2^n x 2^n` matrix of a Pauli operator (phase included).
pub fn pauli_matrix(p: &PauliOperator) -> DMatrix<C64> {
    let n = p.n_qubits();
    assert!(n <= MAX_DENSE_QUBITS);
    let d = 1usize << n;
    let mut m = DMatrix::zeros(d, d);
    for j in 0..d {
        let mut e = vec![C64::new(0.0, 0.0); d];
        e[j] = C64::new(1.0, 0.0);
        let mut col = DenseState { n, amps: e };
        col.apply_pauli(p).expect("sizes match");
        for i in 0..d {
            m[(i, j)] = col.amps[i];
        }
    }
    m
}

/// Matrix of a single-qubit Pauli embedded on `qubit` of an `n`-qubit system.
pub fn single_pauli_matrix(n: usize, qubit: usize, pauli: Pauli) -> DMatrix<C64> {
    pauli_matrix(&PauliOperator::single(n, qubit, pauli))
}

/// Random full-rank density matrix `A A† / tr(A A†)` with Gaussian `A`.
pub fn random_density<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<C64> {
    let d = 1usize << n;
    let a = DMatrix::from_fn(d, d, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let rho = &a * a.adjoint();
    let tr = rho.trace();
    rho / tr
}

/// Checks Hermiticity, unit trace and positive semidefiniteness within `tol`.
pub fn is_density_matrix(rho: &DMatrix<C64>, tol: f64) -> bool {
    if !rho.is_square() {
        return false;
    }
    if (rho - rho.adjoint()).iter().any(|z| z.norm() > tol) {
        return false;
    }
    if (rho.trace() - C64::new(1.0, 0.0)).norm() > tol {
        return false;
    }
    let eig = rho.clone().symmetric_eigenvalues();
    eig.iter().all(|&l| l > -tol)
}

pub fn max_abs_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}
