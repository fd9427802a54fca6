use std::ops::BitXor;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

use crate::analytics::shannon_entropy;
use crate::gf2::BitVec;
use crate::noise::{fidelity_exact, ldn_single_qubit_distribution};
use crate::pauli::Pauli;

use super::EngineError;

/// Label `(a, b)` of a Bell pair `(I ⊗ X^a Z^b)|Φ+⟩`; `(0, 0)` is `Φ+`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct BellLabel {
    pub a: bool,
    pub b: bool,
}

impl BellLabel {
    pub const PHI_PLUS: BellLabel = BellLabel { a: false, b: false };

    pub fn new(a: bool, b: bool) -> Self {
        Self { a, b }
    }

    /// `2a + b`, the index into a [`BellDistribution`].
    pub fn index(self) -> usize {
        (self.a as usize) << 1 | self.b as usize
    }

    pub fn from_index(i: usize) -> Self {
        Self {
            a: i & 2 != 0,
            b: i & 1 != 0,
        }
    }

    /// Label change caused by a Pauli on either particle of the pair.
    pub fn from_pauli(p: Pauli) -> Self {
        let (x, z) = p.bits();
        Self { a: x, b: z }
    }

    pub fn is_phi_plus(self) -> bool {
        !self.a && !self.b
    }
}

impl BitXor for BellLabel {
    type Output = BellLabel;
    fn bitxor(self, rhs: BellLabel) -> BellLabel {
        BellLabel {
            a: self.a ^ rhs.a,
            b: self.b ^ rhs.b,
        }
    }
}

/// I.i.d. Bell-diagonal state, probabilities indexed by [`BellLabel::index`]:
/// `(λ00, λ01, λ10, λ11)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BellDistribution {
    probs: [f64; 4],
}

impl BellDistribution {
    pub fn new(probs: [f64; 4]) -> Result<Self, EngineError> {
        let sum: f64 = probs.iter().sum();
        if probs.iter().any(|&p| !(0.0..=1.0).contains(&p)) || (sum - 1.0).abs() > 1e-9 {
            return Err(EngineError::InvalidDistribution(probs));
        }
        Ok(Self { probs })
    }

    /// `W(F) = (F, (1−F)/3, (1−F)/3, (1−F)/3)`.
    pub fn werner(f: f64) -> Result<Self, EngineError> {
        let e = (1.0 - f) / 3.0;
        Self::new([f, e, e, e])
    }

    /// `Φ+` after `D(q)` on both particles.
    pub fn from_ldn(q: f64) -> Result<Self, EngineError> {
        Self::werner(fidelity_exact(q))
    }

    /// Label flip caused by `D(p)` on one particle.
    pub fn single_particle_ldn(p: f64) -> Result<Self, EngineError> {
        let d = ldn_single_qubit_distribution(p)?;
        let mut probs = [0.0; 4];
        for (pauli, w) in Pauli::ALL.into_iter().zip(d) {
            probs[BellLabel::from_pauli(pauli).index()] += w;
        }
        Self::new(probs)
    }

    pub fn probs(&self) -> [f64; 4] {
        self.probs
    }

    pub fn prob(&self, label: BellLabel) -> f64 {
        self.probs[label.index()]
    }

    pub fn fidelity(&self) -> f64 {
        self.probs[0]
    }

    /// Von Neumann entropy in bits.
    pub fn entropy(&self) -> f64 {
        shannon_entropy(&self.probs).expect("validated distribution")
    }

    /// Distribution of `l1 ⊕ l2` for independent labels.
    pub fn convolve(&self, other: &BellDistribution) -> BellDistribution {
        let mut probs = [0.0; 4];
        for i in 0..4 {
            for j in 0..4 {
                probs[i ^ j] += self.probs[i] * other.probs[j];
            }
        }
        BellDistribution { probs }
    }

    pub fn is_werner(&self, tol: f64) -> bool {
        let [_, x, y, z] = self.probs;
        (x - y).abs() <= tol && (y - z).abs() <= tol
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BellDiagonalEnsemble {
    pub distribution: BellDistribution,
    pub labels: Vec<BellLabel>,
}

impl BellDiagonalEnsemble {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// `(a, b)` label bits as two vectors.
    pub fn bit_vectors(&self) -> (BitVec, BitVec) {
        label_bits(&self.labels)
    }
}

pub(crate) fn label_bits(labels: &[BellLabel]) -> (BitVec, BitVec) {
    let mut a = BitVec::zeros(labels.len());
    let mut b = BitVec::zeros(labels.len());
    for (i, l) in labels.iter().enumerate() {
        a.set(i, l.a);
        b.set(i, l.b);
    }
    (a, b)
}

pub fn sample_ensemble<R: Rng + ?Sized>(distribution: &BellDistribution, n: usize, rng: &mut R) -> BellDiagonalEnsemble {
    let labels = sample_labels(distribution, n, rng);
    BellDiagonalEnsemble {
        distribution: *distribution,
        labels,
    }
}

pub(crate) fn sample_labels<R: Rng + ?Sized>(distribution: &BellDistribution, n: usize, rng: &mut R) -> Vec<BellLabel> {
    let idx = WeightedIndex::new(distribution.probs).expect("validated distribution");
    (0..n).map(|_| BellLabel::from_index(idx.sample(rng))).collect()
}

/// `M = ⌊N(1 − S − δ)⌋`, at least 1 and at most `N − 1`.
pub fn safe_output_count(n: usize, distribution: &BellDistribution, delta: f64) -> Result<usize, EngineError> {
    let s = distribution.entropy();
    if s >= 1.0 - delta {
        return Err(EngineError::NotDistillable { entropy: s, delta });
    }
    if n < 2 {
        return Err(EngineError::TooFewPairs(n));
    }
    let m = (n as f64 * (1.0 - s - delta)).floor() as usize;
    Ok(m.clamp(1, n - 1))
}
