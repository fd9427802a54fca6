//! Local depolarizing noise (LDN).
//!
//! `D_j(p) ρ = p ρ + (1-p)/4 (ρ + X_j ρ X_j + Y_j ρ Y_j + Z_j ρ Z_j)`, so a
//! single particle is left alone with probability `(1+3p)/4` and hit by each
//! of X, Y, Z with probability `(1-p)/4`. Channels compose multiplicatively:
//! `D(p) D(q) = D(pq)`.

use nalgebra::DMatrix;
use rand::Rng;
use thiserror::Error;

use crate::dense::{is_density_matrix, max_abs_diff, single_pauli_matrix, DenseState, C64};
use crate::pauli::{Pauli, PauliOperator};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NoiseError {
    #[error("{name} = {value} is outside [0, 1]")]
    OutOfRange { name: &'static str, value: f64 },
    #[error("input is not a valid density operator")]
    InvalidDensity,
    #[error("expected a {expected}x{expected} matrix, got {rows}x{cols}")]
    Shape {
        expected: usize,
        rows: usize,
        cols: usize,
    },
    #[error("qubit index {index} out of range for {n_qubits} qubits")]
    QubitOutOfRange { index: usize, n_qubits: usize },
}

pub(crate) fn check_unit(name: &'static str, value: f64) -> Result<f64, NoiseError> {
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(NoiseError::OutOfRange { name, value })
    }
}

/// LDN reliability parameters: `p` for resource-state particles, `q` for
/// the particles of the states being purified.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseParams {
    p: f64,
    q: f64,
}

impl NoiseParams {
    pub fn new(p: f64, q: f64) -> Result<Self, NoiseError> {
        Ok(Self {
            p: check_unit("p", p)?,
            q: check_unit("q", q)?,
        })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// Input parameter after the resource noise has been moved onto it.
    pub fn effective_input(&self) -> f64 {
        compose_ldn(self.p, self.q)
    }
}

/// Probabilities of `[I, X, Y, Z]` for one particle under `D(p)`.
pub fn ldn_single_qubit_distribution(p: f64) -> Result<[f64; 4], NoiseError> {
    let p = check_unit("p", p)?;
    let e = (1.0 - p) / 4.0;
    Ok([1.0 - 3.0 * e, e, e, e])
}

pub(crate) fn draw_pauli<R: Rng + ?Sized>(dist: &[f64; 4], rng: &mut R) -> Pauli {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (k, &w) in dist.iter().enumerate().skip(1) {
        acc += w;
        if u < acc {
            return Pauli::ALL[k];
        }
    }
    Pauli::I
}

/// One Monte Carlo draw of `⊗_{j ∈ qubits} D_j(p)` on an `n`-qubit register.
pub fn sample_ldn<R: Rng + ?Sized>(
    p: f64,
    n: usize,
    qubits: &[usize],
    rng: &mut R,
) -> Result<PauliOperator, NoiseError> {
    let dist = ldn_single_qubit_distribution(p)?;
    let mut op = PauliOperator::identity(n);
    for &q in qubits {
        if q >= n {
            return Err(NoiseError::QubitOutOfRange {
                index: q,
                n_qubits: n,
            });
        }
        op.set(q, draw_pauli(&dist, rng));
    }
    Ok(op)
}

pub fn compose_ldn(p: f64, q: f64) -> f64 {
    p * q
}

/// Werner fidelity of `Φ+` after `D(q)` on both particles: `(3q²+1)/4`.
pub fn fidelity_exact(q: f64) -> f64 {
    (3.0 * q * q + 1.0) / 4.0
}

/// Per-particle product approximation `((3q+1)/4)²` of the same quantity.
pub fn fidelity_paper_product(q: f64) -> f64 {
    let f1 = (3.0 * q + 1.0) / 4.0;
    f1 * f1
}

/// Inverse of [`fidelity_exact`] on `F ∈ [1/4, 1]`.
pub fn q_from_fidelity_exact(f: f64) -> f64 {
    ((4.0 * f - 1.0) / 3.0).max(0.0).sqrt()
}

/// Leading-order fidelity of an `n`-particle state under per-particle LDN:
/// `((3p+1)/4)^n`.
pub fn fidelity_scaling(p: f64, n: u32) -> Result<f64, NoiseError> {
    let p = check_unit("p", p)?;
    Ok(((3.0 * p + 1.0) / 4.0).powi(n as i32))
}

// ---- dense channel oracle ----

/// `D_qubit(p) ρ` for an `n`-qubit density matrix.
pub fn ldn_dense(rho: &DMatrix<C64>, n: usize, qubit: usize, p: f64) -> DMatrix<C64> {
    let mut out = rho * C64::new(p + (1.0 - p) / 4.0, 0.0);
    for pauli in [Pauli::X, Pauli::Y, Pauli::Z] {
        let m = single_pauli_matrix(n, qubit, pauli);
        out += &m * rho * &m * C64::new((1.0 - p) / 4.0, 0.0);
    }
    out
}

/// 4x4 superoperator of single-qubit `D(p)` acting on column-stacked `ρ`.
pub fn ldn_superoperator(p: f64) -> DMatrix<C64> {
    let mut s = DMatrix::zeros(4, 4);
    for j in 0..2 {
        for i in 0..2 {
            let mut basis = DMatrix::zeros(2, 2);
            basis[(i, j)] = C64::new(1.0, 0.0);
            let img = ldn_dense(&basis, 1, 0, p);
            for c in 0..2 {
                for r in 0..2 {
                    s[(r + 2 * c, i + 2 * j)] = img[(r, c)];
                }
            }
        }
    }
    s
}

/// `(I ⊗ X^a Z^b)|Φ+⟩`: `(0,0)=Φ+`, `(1,0)=Ψ+`, `(0,1)=Φ-`, `(1,1)∝Ψ-`.
pub fn bell_state(amplitude: bool, phase: bool) -> DenseState {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut psi = DenseState::from_amplitudes(vec![
        C64::new(s, 0.0),
        C64::new(0.0, 0.0),
        C64::new(0.0, 0.0),
        C64::new(s, 0.0),
    ]);
    let mut err = PauliOperator::identity(2);
    err.set(1, Pauli::from_bits(amplitude, phase));
    psi.apply_pauli(&err).expect("two-qubit operator");
    psi
}

pub fn bell_projector(amplitude: bool, phase: bool) -> DMatrix<C64> {
    bell_state(amplitude, phase).density_matrix()
}

/// Checks `P_B D_1(p) ρ P_B† = P_B D_2(p) ρ P_B†` to machine precision for
/// a two-qubit density matrix `ρ`.
pub fn verify_noise_exchange(
    p: f64,
    rho: &DMatrix<C64>,
    bell: (bool, bool),
) -> Result<bool, NoiseError> {
    check_unit("p", p)?;
    if rho.nrows() != 4 || rho.ncols() != 4 {
        return Err(NoiseError::Shape {
            expected: 4,
            rows: rho.nrows(),
            cols: rho.ncols(),
        });
    }
    if !is_density_matrix(rho, 1e-9) {
        return Err(NoiseError::InvalidDensity);
    }
    let proj = bell_projector(bell.0, bell.1);
    let left = &proj * ldn_dense(rho, 2, 0, p) * &proj;
    let right = &proj * ldn_dense(rho, 2, 1, p) * &proj;
    Ok(max_abs_diff(&left, &right) <= 1e-12)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::random_density;
    use crate::rng::{trial_rng, Purpose};

    #[test]
    fn distribution_examples() {
        assert_eq!(ldn_single_qubit_distribution(1.0).unwrap(), [1.0, 0.0, 0.0, 0.0]);
        assert_eq!(ldn_single_qubit_distribution(0.0).unwrap(), [0.25; 4]);
        let d = ldn_single_qubit_distribution(0.8).unwrap();
        for (got, want) in d.iter().zip([0.85, 0.05, 0.05, 0.05]) {
            assert!((got - want).abs() < 1e-15);
        }
        assert!(matches!(
            ldn_single_qubit_distribution(1.5),
            Err(NoiseError::OutOfRange { name: "p", .. })
        ));
        assert!(ldn_single_qubit_distribution(-0.1).is_err());
    }

    #[test]
    fn distribution_sums_to_one() {
        for k in 0..=1000 {
            let d = ldn_single_qubit_distribution(k as f64 / 1000.0).unwrap();
            assert!((d.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn noiseless_sampling_is_identity() {
        let mut rng = trial_rng(1, 0, Purpose::Test);
        for _ in 0..100 {
            assert!(sample_ldn(1.0, 5, &[0, 2, 4], &mut rng).unwrap().is_identity());
        }
    }

    #[test]
    fn unlisted_qubits_stay_clean() {
        let mut rng = trial_rng(2, 0, Purpose::Test);
        for _ in 0..200 {
            let op = sample_ldn(0.0, 4, &[1, 3], &mut rng).unwrap();
            assert_eq!(op.get(0), Pauli::I);
            assert_eq!(op.get(2), Pauli::I);
        }
        assert!(sample_ldn(0.5, 2, &[2], &mut rng).is_err());
    }

    #[test]
    fn full_depolarization_is_uniform() {
        let mut rng = trial_rng(3, 0, Purpose::Test);
        let draws = 100_000;
        let mut counts = [0usize; 4];
        for _ in 0..draws {
            let op = sample_ldn(0.0, 1, &[0], &mut rng).unwrap();
            counts[Pauli::ALL.iter().position(|&p| p == op.get(0)).unwrap()] += 1;
        }
        let sigma = (draws as f64 * 0.25 * 0.75).sqrt();
        for c in counts {
            assert!((c as f64 - draws as f64 * 0.25).abs() < 5.0 * sigma, "{counts:?}");
        }
    }

    #[test]
    fn composition_examples() {
        assert_eq!(compose_ldn(1.0, 0.37), 0.37);
        assert!((compose_ldn(0.9, 0.9) - 0.81).abs() < 1e-15);
    }

    #[test]
    fn superoperators_compose_multiplicatively() {
        let mut rng = trial_rng(4, 0, Purpose::Test);
        for _ in 0..50 {
            let p: f64 = rng.random();
            let q: f64 = rng.random();
            let lhs = ldn_superoperator(p) * ldn_superoperator(q);
            let rhs = ldn_superoperator(compose_ldn(p, q));
            assert!(max_abs_diff(&lhs, &rhs) <= 1e-12);
        }
    }

    #[test]
    fn noise_exchange_examples() {
        let mixed = DMatrix::<C64>::identity(4, 4) * C64::new(0.25, 0.0);
        let mut rng = trial_rng(5, 0, Purpose::Test);
        for (a, b) in [(false, false), (true, false), (false, true), (true, true)] {
            assert!(verify_noise_exchange(0.3, &mixed, (a, b)).unwrap());
            let rho = random_density(2, &mut rng);
            assert!(verify_noise_exchange(1.0, &rho, (a, b)).unwrap());
            assert!(verify_noise_exchange(rng.random(), &rho, (a, b)).unwrap());
        }
    }

    #[test]
    fn noise_exchange_rejects_bad_input() {
        let mut not_psd = DMatrix::<C64>::zeros(4, 4);
        not_psd[(0, 0)] = C64::new(1.5, 0.0);
        not_psd[(1, 1)] = C64::new(-0.5, 0.0);
        assert_eq!(
            verify_noise_exchange(0.5, &not_psd, (false, false)),
            Err(NoiseError::InvalidDensity)
        );
        let unnormalized = DMatrix::<C64>::identity(4, 4);
        assert_eq!(
            verify_noise_exchange(0.5, &unnormalized, (false, false)),
            Err(NoiseError::InvalidDensity)
        );
        assert!(matches!(
            verify_noise_exchange(0.5, &DMatrix::<C64>::identity(2, 2), (false, false)),
            Err(NoiseError::Shape { .. })
        ));
    }

    #[test]
    fn fidelity_scaling_values() {
        assert_eq!(fidelity_scaling(1.0, 17).unwrap(), 1.0);
        assert_eq!(fidelity_scaling(0.3, 0).unwrap(), 1.0);
        // mpmath, 30 digits: 0.543794342926747257...
        assert!((fidelity_scaling(0.96, 20).unwrap() - 0.543_794_342_926_747_3).abs() < 1e-14);
    }

    #[test]
    fn fidelity_conventions() {
        assert_eq!(fidelity_exact(1.0), 1.0);
        assert_eq!(fidelity_paper_product(1.0), 1.0);
        assert!((fidelity_exact(0.95) - 0.926_875).abs() < 1e-15);
        assert!((q_from_fidelity_exact(fidelity_exact(0.87)) - 0.87).abs() < 1e-14);
        // Product form over-counts the doubly-hit case, so it lies below.
        assert!(fidelity_paper_product(0.9) < fidelity_exact(0.9));
    }
}
