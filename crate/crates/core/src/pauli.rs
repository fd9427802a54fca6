//! Multi-qubit Pauli operators in the symplectic (x, z) representation.
//!
//! A `PauliOperator` is `i^phase · P_0 ⊗ P_1 ⊗ …` where each `P_j` is fixed by
//! the bit pair `(x_j, z_j)`: `(0,0)=I`, `(1,0)=X`, `(1,1)=Y`, `(0,1)=Z`.
//! With this convention every Hermitian Pauli has a real phase (±1).

use std::fmt;
use std::ops::Mul;
use std::str::FromStr;

use thiserror::Error;

use crate::circuit::Gate;
use crate::gf2::BitVec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    #[inline]
    pub fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    #[inline]
    pub fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// Power of `i`, stored mod 4.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Phase(u8);

impl Phase {
    pub const PLUS_ONE: Phase = Phase(0);
    pub const PLUS_I: Phase = Phase(1);
    pub const MINUS_ONE: Phase = Phase(2);
    pub const MINUS_I: Phase = Phase(3);

    #[inline]
    pub fn from_exponent(k: u8) -> Self {
        Phase(k & 3)
    }

    #[inline]
    pub fn exponent(self) -> u8 {
        self.0
    }

    #[inline]
    pub fn is_real(self) -> bool {
        self.0 & 1 == 0
    }

    /// `true` for -1 (and -i).
    #[inline]
    pub fn is_negative(self) -> bool {
        self.0 & 2 == 2
    }
}

impl Mul for Phase {
    type Output = Phase;
    fn mul(self, rhs: Phase) -> Phase {
        Phase((self.0 + rhs.0) & 3)
    }
}

/// Exponent of `i` picked up when multiplying the bare Pauli strings
/// `(x1, z1) · (x2, z2)`, computed word-parallel.
pub(crate) fn product_phase(x1: &[u64], z1: &[u64], x2: &[u64], z2: &[u64]) -> u8 {
    let mut plus = 0u32;
    let mut minus = 0u32;
    for w in 0..x1.len() {
        let (a, b, c, d) = (x1[w], z1[w], x2[w], z2[w]);
        // Cyclic products XY, YZ, ZX give +i; the reversed order gives -i.
        let p = (a & !b & c & d) | (a & b & !c & d) | (!a & b & c & !d);
        let m = (a & !b & !c & d) | (a & b & c & !d) | (!a & b & c & d);
        plus += p.count_ones();
        minus += m.count_ones();
    }
    ((plus + 3 * minus) & 3) as u8
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PauliParseError {
    #[error("unexpected character {0:?} in Pauli string")]
    BadChar(char),
    #[error("empty Pauli string")]
    Empty,
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PauliOperator {
    x: BitVec,
    z: BitVec,
    phase: Phase,
}

impl PauliOperator {
    pub fn identity(n: usize) -> Self {
        Self {
            x: BitVec::zeros(n),
            z: BitVec::zeros(n),
            phase: Phase::PLUS_ONE,
        }
    }

    pub fn single(n: usize, qubit: usize, p: Pauli) -> Self {
        let mut op = Self::identity(n);
        op.set(qubit, p);
        op
    }

    pub fn from_parts(x: BitVec, z: BitVec, phase: Phase) -> Self {
        assert_eq!(x.len(), z.len(), "x and z bit vectors must match");
        Self { x, z, phase }
    }

    /// Builds a Pauli from `(qubit, Pauli)` pairs on `n` qubits.
    pub fn from_sparse(n: usize, terms: &[(usize, Pauli)]) -> Self {
        let mut op = Self::identity(n);
        for &(q, p) in terms {
            op.set(q, p);
        }
        op
    }

    #[inline]
    pub fn n_qubits(&self) -> usize {
        self.x.len()
    }

    #[inline]
    pub fn x_bits(&self) -> &BitVec {
        &self.x
    }

    #[inline]
    pub fn z_bits(&self) -> &BitVec {
        &self.z
    }

    #[inline]
    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn with_phase(mut self, phase: Phase) -> Self {
        self.phase = phase;
        self
    }

    pub fn set_phase(&mut self, phase: Phase) {
        self.phase = phase;
    }

    #[inline]
    pub fn get(&self, q: usize) -> Pauli {
        Pauli::from_bits(self.x.get(q), self.z.get(q))
    }

    #[inline]
    pub fn set(&mut self, q: usize, p: Pauli) {
        let (x, z) = p.bits();
        self.x.set(q, x);
        self.z.set(q, z);
    }

    pub fn weight(&self) -> usize {
        self.x
            .words()
            .iter()
            .zip(self.z.words())
            .map(|(a, b)| (a | b).count_ones() as usize)
            .sum()
    }

    pub fn is_identity(&self) -> bool {
        self.x.is_zero() && self.z.is_zero()
    }

    pub fn is_hermitian(&self) -> bool {
        self.phase.is_real()
    }

    pub fn commutes_with(&self, other: &PauliOperator) -> bool {
        assert_eq!(self.n_qubits(), other.n_qubits());
        let mut acc = 0u32;
        for w in 0..self.x.words().len() {
            acc ^= ((self.x.words()[w] & other.z.words()[w])
                ^ (self.z.words()[w] & other.x.words()[w]))
                .count_ones();
        }
        acc & 1 == 0
    }

    /// Same Pauli string, ignoring phase.
    pub fn same_support(&self, other: &PauliOperator) -> bool {
        self.x == other.x && self.z == other.z
    }

    pub fn to_frame(&self) -> PauliFrame {
        PauliFrame {
            x: self.x.clone(),
            z: self.z.clone(),
        }
    }
}

impl Mul for &PauliOperator {
    type Output = PauliOperator;

    fn mul(self, rhs: &PauliOperator) -> PauliOperator {
        assert_eq!(self.n_qubits(), rhs.n_qubits());
        let k = product_phase(self.x.words(), self.z.words(), rhs.x.words(), rhs.z.words());
        let mut x = self.x.clone();
        x.xor_assign(&rhs.x);
        let mut z = self.z.clone();
        z.xor_assign(&rhs.z);
        PauliOperator {
            x,
            z,
            phase: self.phase * rhs.phase * Phase::from_exponent(k),
        }
    }
}

impl fmt::Display for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self.phase.exponent() {
            0 => "+",
            1 => "+i",
            2 => "-",
            _ => "-i",
        })?;
        for q in 0..self.n_qubits() {
            write!(f, "{}", self.get(q).symbol())?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Parses strings such as `"XZI"`, `"-YY"`, `"+iZ"`. Qubit 0 is leftmost.
impl FromStr for PauliOperator {
    type Err = PauliParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (phase, body) = if let Some(rest) = s.strip_prefix("+i") {
            (Phase::PLUS_I, rest)
        } else if let Some(rest) = s.strip_prefix("-i") {
            (Phase::MINUS_I, rest)
        } else if let Some(rest) = s.strip_prefix('+') {
            (Phase::PLUS_ONE, rest)
        } else if let Some(rest) = s.strip_prefix('-') {
            (Phase::MINUS_ONE, rest)
        } else {
            (Phase::PLUS_ONE, s)
        };
        if body.is_empty() {
            return Err(PauliParseError::Empty);
        }
        let mut op = PauliOperator::identity(body.chars().count());
        for (q, c) in body.chars().enumerate() {
            let p = match c {
                'I' | '_' => Pauli::I,
                'X' => Pauli::X,
                'Y' => Pauli::Y,
                'Z' => Pauli::Z,
                other => return Err(PauliParseError::BadChar(other)),
            };
            op.set(q, p);
        }
        op.phase = phase;
        Ok(op)
    }
}

/// Sign-free Pauli used for byproduct and error bookkeeping.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct PauliFrame {
    x: BitVec,
    z: BitVec,
}

impl PauliFrame {
    pub fn new(n: usize) -> Self {
        Self {
            x: BitVec::zeros(n),
            z: BitVec::zeros(n),
        }
    }

    pub fn from_parts(x: BitVec, z: BitVec) -> Self {
        assert_eq!(x.len(), z.len(), "x and z parts must have equal length");
        Self { x, z }
    }

    pub fn n_qubits(&self) -> usize {
        self.x.len()
    }

    pub fn x_bits(&self) -> &BitVec {
        &self.x
    }

    pub fn z_bits(&self) -> &BitVec {
        &self.z
    }

    pub fn get(&self, q: usize) -> Pauli {
        Pauli::from_bits(self.x.get(q), self.z.get(q))
    }

    pub fn set(&mut self, q: usize, p: Pauli) {
        let (x, z) = p.bits();
        self.x.set(q, x);
        self.z.set(q, z);
    }

    /// Multiplies another Pauli into the frame (phases dropped).
    pub fn compose(&mut self, other: &PauliFrame) {
        self.x.xor_assign(&other.x);
        self.z.xor_assign(&other.z);
    }

    pub fn is_identity(&self) -> bool {
        self.x.is_zero() && self.z.is_zero()
    }

    /// Conjugates the frame through a Clifford gate.
    pub fn apply_gate(&mut self, gate: &Gate) {
        match *gate {
            Gate::H(q) => {
                let (x, z) = (self.x.get(q), self.z.get(q));
                self.x.set(q, z);
                self.z.set(q, x);
            }
            Gate::S(q) => {
                if self.x.get(q) {
                    self.z.flip(q);
                }
            }
            Gate::Cnot(c, t) => {
                if self.x.get(c) {
                    self.x.flip(t);
                }
                if self.z.get(t) {
                    self.z.flip(c);
                }
            }
            Gate::Cz(a, b) => {
                if self.x.get(a) {
                    self.z.flip(b);
                }
                if self.x.get(b) {
                    self.z.flip(a);
                }
            }
            Gate::Pauli(_, _) => {}
        }
    }

    pub fn to_operator(&self) -> PauliOperator {
        PauliOperator::from_parts(self.x.clone(), self.z.clone(), Phase::PLUS_ONE)
    }
}
