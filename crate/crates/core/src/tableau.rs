//! Stabilizer tableau with destabilizer bookkeeping.
//!
//! Rows `0..n` hold destabilizers and rows `n..2n` hold stabilizers. Each row
//! is a bit-packed Pauli string (64 qubits per word) plus a phase exponent.
//! Random-outcome measurements cost O(n²) word operations, deterministic ones
//! O(n²) as well via the destabilizer decomposition.

use rand::Rng;
use thiserror::Error;

use crate::circuit::{CliffordCircuit, Gate};
use crate::gf2::{words_for, BitMatrix, BitVec};
use crate::pauli::{product_phase, Pauli, PauliOperator, Phase};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TableauError {
    #[error("qubit index {index} out of range for {n_qubits} qubits")]
    QubitOutOfRange { index: usize, n_qubits: usize },
    #[error("operation needs two distinct qubits, got {0} twice")]
    SameQubit(usize),
    #[error("qubit {0} was already consumed by a Bell measurement")]
    Consumed(usize),
    #[error("observable must be Hermitian (sign ±1), got an imaginary phase")]
    NonHermitian,
    #[error("operator acts on {found} qubits, tableau has {expected}")]
    SizeMismatch { expected: usize, found: usize },
    #[error("adjacency matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("adjacency matrix is not symmetric at ({0}, {1})")]
    NotSymmetric(usize, usize),
    #[error("adjacency matrix has a self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("requested measurement outcome has zero probability")]
    ImpossibleOutcome,
    #[error("invalid stabilizer set: {0}")]
    InvalidStabilizers(&'static str),
    #[error("qubit {0} is entangled with the rest of the state")]
    NotDisentangled(usize),
    #[error("tableau invariant violated: {0}")]
    Invariant(String),
}

/// Outcome of a Pauli measurement: `bit` is 0 for eigenvalue +1, 1 for -1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MeasurementOutcome {
    pub bit: bool,
    pub deterministic: bool,
}

impl MeasurementOutcome {
    pub fn eigenvalue(&self) -> i8 {
        if self.bit {
            -1
        } else {
            1
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StabilizerTableau {
    n: usize,
    words: usize,
    xs: Vec<u64>,
    zs: Vec<u64>,
    phases: Vec<u8>,
    consumed: BitVec,
}

impl StabilizerTableau {
    /// `|0…0⟩`: stabilizers `Z_j`, destabilizers `X_j`.
    pub fn new(n: usize) -> Self {
        let words = words_for(n);
        let mut t = Self {
            n,
            words,
            xs: vec![0; 2 * n * words],
            zs: vec![0; 2 * n * words],
            phases: vec![0; 2 * n],
            consumed: BitVec::zeros(n),
        };
        for j in 0..n {
            t.set_bit_x(j, j, true);
            t.set_bit_z(n + j, j, true);
        }
        t
    }

    /// Graph state with stabilizers `K_j = X_j ∏_{k ∈ N(j)} Z_k` and
    /// destabilizers `Z_j`.
    pub fn from_graph(adjacency: &BitMatrix) -> Result<Self, TableauError> {
        let n = adjacency.n_rows();
        if adjacency.n_cols() != n {
            return Err(TableauError::NotSquare {
                rows: n,
                cols: adjacency.n_cols(),
            });
        }
        for i in 0..n {
            if adjacency.get(i, i) {
                return Err(TableauError::SelfLoop(i));
            }
            for j in (i + 1)..n {
                if adjacency.get(i, j) != adjacency.get(j, i) {
                    return Err(TableauError::NotSymmetric(i, j));
                }
            }
        }
        let mut t = Self::new(n);
        t.xs.fill(0);
        t.zs.fill(0);
        for j in 0..n {
            t.set_bit_z(j, j, true);
            t.set_bit_x(n + j, j, true);
            for k in adjacency.row(j).iter_ones() {
                t.set_bit_z(n + j, k, true);
            }
        }
        Ok(t)
    }

    /// Builds a tableau from `n` independent, commuting, Hermitian stabilizer
    /// generators, completing them with a symplectic dual set of
    /// destabilizers.
    pub fn from_stabilizers(stabilizers: &[PauliOperator]) -> Result<Self, TableauError> {
        let n = stabilizers.len();
        if let Some(bad) = stabilizers.iter().find(|s| s.n_qubits() != n) {
            return Err(TableauError::SizeMismatch {
                expected: n,
                found: bad.n_qubits(),
            });
        }
        if stabilizers.iter().any(|s| !s.is_hermitian()) {
            return Err(TableauError::NonHermitian);
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if !stabilizers[i].commutes_with(&stabilizers[j]) {
                    return Err(TableauError::InvalidStabilizers("generators do not commute"));
                }
            }
        }
        // Row j of `a` is the symplectic dual of s_j, so that a·(x|z) gives
        // the commutation bits of (x|z) against every generator.
        let mut a = BitMatrix::new(2 * n);
        for s in stabilizers {
            let mut row = BitVec::zeros(2 * n);
            for q in s.z_bits().iter_ones() {
                row.set(q, true);
            }
            for q in s.x_bits().iter_ones() {
                row.set(n + q, true);
            }
            a.push_row(row);
        }
        if a.rank() != n {
            return Err(TableauError::InvalidStabilizers("generators are not independent"));
        }
        let mut destabs: Vec<BitVec> = Vec::with_capacity(n);
        for i in 0..n {
            let mut d = a
                .solve(&BitVec::unit(n, i))
                .expect("full-rank system is always solvable");
            for (k, dk) in destabs.iter().enumerate() {
                if symplectic(&d, dk, n) {
                    // Adding s_k fixes <d, d_k> without touching <d, s_j>.
                    let sk = &stabilizers[k];
                    for q in sk.x_bits().iter_ones() {
                        d.flip(q);
                    }
                    for q in sk.z_bits().iter_ones() {
                        d.flip(n + q);
                    }
                }
            }
            destabs.push(d);
        }
        let mut t = Self::new(n);
        t.xs.fill(0);
        t.zs.fill(0);
        for (i, d) in destabs.iter().enumerate() {
            for q in d.iter_ones() {
                if q < n {
                    t.set_bit_x(i, q, true);
                } else {
                    t.set_bit_z(i, q - n, true);
                }
            }
        }
        for (i, s) in stabilizers.iter().enumerate() {
            t.write_row(n + i, s);
        }
        Ok(t)
    }

    #[inline]
    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn stabilizer(&self, i: usize) -> PauliOperator {
        self.row(self.n + i)
    }

    pub fn destabilizer(&self, i: usize) -> PauliOperator {
        self.row(i)
    }

    pub fn stabilizers(&self) -> Vec<PauliOperator> {
        (0..self.n).map(|i| self.stabilizer(i)).collect()
    }

    pub fn destabilizers(&self) -> Vec<PauliOperator> {
        (0..self.n).map(|i| self.destabilizer(i)).collect()
    }

    pub fn is_consumed(&self, q: usize) -> bool {
        self.consumed.get(q)
    }

    pub fn consumed(&self) -> &BitVec {
        &self.consumed
    }

    // ---- raw row access ----

    #[inline]
    fn bit_x(&self, row: usize, q: usize) -> bool {
        (self.xs[row * self.words + (q >> 6)] >> (q & 63)) & 1 == 1
    }

    #[inline]
    fn bit_z(&self, row: usize, q: usize) -> bool {
        (self.zs[row * self.words + (q >> 6)] >> (q & 63)) & 1 == 1
    }

    #[inline]
    fn set_bit_x(&mut self, row: usize, q: usize, v: bool) {
        let idx = row * self.words + (q >> 6);
        let m = 1u64 << (q & 63);
        if v {
            self.xs[idx] |= m
        } else {
            self.xs[idx] &= !m
        }
    }

    #[inline]
    fn set_bit_z(&mut self, row: usize, q: usize, v: bool) {
        let idx = row * self.words + (q >> 6);
        let m = 1u64 << (q & 63);
        if v {
            self.zs[idx] |= m
        } else {
            self.zs[idx] &= !m
        }
    }

    #[inline]
    fn row_x(&self, row: usize) -> &[u64] {
        &self.xs[row * self.words..(row + 1) * self.words]
    }

    #[inline]
    fn row_z(&self, row: usize) -> &[u64] {
        &self.zs[row * self.words..(row + 1) * self.words]
    }

    fn row(&self, row: usize) -> PauliOperator {
        let mut x = BitVec::zeros(self.n);
        let mut z = BitVec::zeros(self.n);
        x.words_mut().copy_from_slice(self.row_x(row));
        z.words_mut().copy_from_slice(self.row_z(row));
        PauliOperator::from_parts(x, z, Phase::from_exponent(self.phases[row]))
    }

    fn write_row(&mut self, row: usize, p: &PauliOperator) {
        let w = self.words;
        self.xs[row * w..(row + 1) * w].copy_from_slice(p.x_bits().words());
        self.zs[row * w..(row + 1) * w].copy_from_slice(p.z_bits().words());
        self.phases[row] = p.phase().exponent();
    }

    fn row_anticommutes(&self, row: usize, p: &PauliOperator) -> bool {
        let (rx, rz) = (self.row_x(row), self.row_z(row));
        let (px, pz) = (p.x_bits().words(), p.z_bits().words());
        let mut acc = 0u32;
        for w in 0..self.words {
            acc ^= ((rx[w] & pz[w]) ^ (rz[w] & px[w])).count_ones();
        }
        acc & 1 == 1
    }

    /// row[target] <- row[source] · row[target]
    fn row_mul(&mut self, target: usize, source: usize) {
        let w = self.words;
        let k = product_phase(
            self.row_x(source),
            self.row_z(source),
            self.row_x(target),
            self.row_z(target),
        );
        self.phases[target] = (self.phases[target] + self.phases[source] + k) & 3;
        for i in 0..w {
            let sx = self.xs[source * w + i];
            let sz = self.zs[source * w + i];
            self.xs[target * w + i] ^= sx;
            self.zs[target * w + i] ^= sz;
        }
    }

    // ---- gates ----

    fn check_qubit(&self, q: usize) -> Result<(), TableauError> {
        if q >= self.n {
            Err(TableauError::QubitOutOfRange {
                index: q,
                n_qubits: self.n,
            })
        } else {
            Ok(())
        }
    }

    fn check_pair(&self, a: usize, b: usize) -> Result<(), TableauError> {
        self.check_qubit(a)?;
        self.check_qubit(b)?;
        if a == b {
            return Err(TableauError::SameQubit(a));
        }
        Ok(())
    }

    /// Conjugates every generator by `gate`.
    pub fn apply(&mut self, gate: &Gate) -> Result<(), TableauError> {
        match *gate {
            Gate::H(q) => {
                self.check_qubit(q)?;
                self.h(q);
            }
            Gate::S(q) => {
                self.check_qubit(q)?;
                self.s(q);
            }
            Gate::Cnot(c, t) => {
                self.check_pair(c, t)?;
                self.cnot(c, t);
            }
            Gate::Cz(a, b) => {
                self.check_pair(a, b)?;
                self.h(b);
                self.cnot(a, b);
                self.h(b);
            }
            Gate::Pauli(q, p) => {
                self.check_qubit(q)?;
                self.pauli(q, p);
            }
        }
        Ok(())
    }

    /// Applies the gates of `circuit` (measurements are ignored).
    pub fn apply_gates(&mut self, circuit: &CliffordCircuit) -> Result<(), TableauError> {
        if circuit.n_qubits() != self.n {
            return Err(TableauError::SizeMismatch {
                expected: self.n,
                found: circuit.n_qubits(),
            });
        }
        for g in circuit.gates() {
            self.apply(g)?;
        }
        Ok(())
    }

    fn h(&mut self, q: usize) {
        let (wi, sh) = (q >> 6, q & 63);
        for r in 0..2 * self.n {
            let idx = r * self.words + wi;
            let x = (self.xs[idx] >> sh) & 1;
            let z = (self.zs[idx] >> sh) & 1;
            if x & z == 1 {
                self.phases[r] ^= 2;
            }
            if x != z {
                self.xs[idx] ^= 1 << sh;
                self.zs[idx] ^= 1 << sh;
            }
        }
    }

    fn s(&mut self, q: usize) {
        let (wi, sh) = (q >> 6, q & 63);
        for r in 0..2 * self.n {
            let idx = r * self.words + wi;
            let x = (self.xs[idx] >> sh) & 1;
            let z = (self.zs[idx] >> sh) & 1;
            if x & z == 1 {
                self.phases[r] ^= 2;
            }
            self.zs[idx] ^= x << sh;
        }
    }

    fn cnot(&mut self, c: usize, t: usize) {
        let (wc, sc) = (c >> 6, c & 63);
        let (wt, st) = (t >> 6, t & 63);
        for r in 0..2 * self.n {
            let base = r * self.words;
            let xc = (self.xs[base + wc] >> sc) & 1;
            let zc = (self.zs[base + wc] >> sc) & 1;
            let xt = (self.xs[base + wt] >> st) & 1;
            let zt = (self.zs[base + wt] >> st) & 1;
            if xc & zt & (xt ^ zc ^ 1) == 1 {
                self.phases[r] ^= 2;
            }
            self.xs[base + wt] ^= xc << st;
            self.zs[base + wc] ^= zt << sc;
        }
    }

    fn pauli(&mut self, q: usize, p: Pauli) {
        for r in 0..2 * self.n {
            let flip = match p {
                Pauli::I => false,
                Pauli::X => self.bit_z(r, q),
                Pauli::Z => self.bit_x(r, q),
                Pauli::Y => self.bit_x(r, q) ^ self.bit_z(r, q),
            };
            if flip {
                self.phases[r] ^= 2;
            }
        }
    }

    /// Applies a multi-qubit Pauli to the state (phase ignored).
    pub fn apply_pauli_operator(&mut self, p: &PauliOperator) -> Result<(), TableauError> {
        self.check_size(p)?;
        for r in 0..2 * self.n {
            if self.row_anticommutes(r, p) {
                self.phases[r] ^= 2;
            }
        }
        Ok(())
    }

    // ---- measurement ----

    fn check_size(&self, p: &PauliOperator) -> Result<(), TableauError> {
        if p.n_qubits() != self.n {
            return Err(TableauError::SizeMismatch {
                expected: self.n,
                found: p.n_qubits(),
            });
        }
        Ok(())
    }

    /// Outcome bit if `obs` has a definite value on the current state.
    pub fn deterministic_outcome(&self, obs: &PauliOperator) -> Result<Option<bool>, TableauError> {
        self.check_size(obs)?;
        if !obs.is_hermitian() {
            return Err(TableauError::NonHermitian);
        }
        if (self.n..2 * self.n).any(|r| self.row_anticommutes(r, obs)) {
            return Ok(None);
        }
        Ok(Some(self.group_sign(obs)))
    }

    /// For `obs` in ±(stabilizer group): returns `true` when `-obs` is the
    /// group element.
    fn group_sign(&self, obs: &PauliOperator) -> bool {
        let mut acc = PauliOperator::identity(self.n);
        for i in 0..self.n {
            if self.row_anticommutes(i, obs) {
                acc = &acc * &self.stabilizer(i);
            }
        }
        assert!(
            acc.same_support(obs),
            "observable commutes with a full stabilizer group but is not in it"
        );
        acc.phase() != obs.phase()
    }

    /// Measures a Hermitian Pauli observable with a random outcome drawn from
    /// `rng` when the outcome is not determined.
    pub fn measure<R: Rng + ?Sized>(
        &mut self,
        obs: &PauliOperator,
        rng: &mut R,
    ) -> Result<MeasurementOutcome, TableauError> {
        self.measure_inner(obs, |r| r.random::<bool>(), rng, None)
    }

    /// Measures `obs` and post-selects the outcome `bit`. Fails without
    /// modifying the state if that outcome has zero probability.
    pub fn measure_forced(
        &mut self,
        obs: &PauliOperator,
        bit: bool,
    ) -> Result<MeasurementOutcome, TableauError> {
        self.measure_inner(obs, |_: &mut ()| bit, &mut (), Some(bit))
    }

    fn measure_inner<R: ?Sized>(
        &mut self,
        obs: &PauliOperator,
        draw: impl FnOnce(&mut R) -> bool,
        rng: &mut R,
        forced: Option<bool>,
    ) -> Result<MeasurementOutcome, TableauError> {
        self.check_size(obs)?;
        if !obs.is_hermitian() {
            return Err(TableauError::NonHermitian);
        }
        let n = self.n;
        let Some(p) = (n..2 * n).find(|&r| self.row_anticommutes(r, obs)) else {
            let bit = self.group_sign(obs);
            if forced.is_some_and(|f| f != bit) {
                return Err(TableauError::ImpossibleOutcome);
            }
            return Ok(MeasurementOutcome {
                bit,
                deterministic: true,
            });
        };
        let bit = draw(rng);
        let partner = p - n;
        for r in 0..2 * n {
            if r != p && r != partner && self.row_anticommutes(r, obs) {
                self.row_mul(r, p);
            }
        }
        let w = self.words;
        self.xs.copy_within(p * w..(p + 1) * w, partner * w);
        self.zs.copy_within(p * w..(p + 1) * w, partner * w);
        self.phases[partner] = self.phases[p];
        let sign = if bit { Phase::MINUS_ONE } else { Phase::PLUS_ONE };
        let new_row = obs.clone().with_phase(obs.phase() * sign);
        self.write_row(p, &new_row);
        Ok(MeasurementOutcome {
            bit,
            deterministic: false,
        })
    }

    /// Bell measurement of qubits `a` and `b`: measures `X_a X_b` then
    /// `Z_a Z_b` and returns `(b_x, b_z)`. Both qubits are flagged consumed.
    pub fn bell_measure<R: Rng + ?Sized>(
        &mut self,
        a: usize,
        b: usize,
        rng: &mut R,
    ) -> Result<(bool, bool), TableauError> {
        self.check_pair(a, b)?;
        for q in [a, b] {
            if self.consumed.get(q) {
                return Err(TableauError::Consumed(q));
            }
        }
        let xx = PauliOperator::from_sparse(self.n, &[(a, Pauli::X), (b, Pauli::X)]);
        let zz = PauliOperator::from_sparse(self.n, &[(a, Pauli::Z), (b, Pauli::Z)]);
        let bx = self.measure(&xx, rng)?.bit;
        let bz = self.measure(&zz, rng)?.bit;
        self.consumed.set(a, true);
        self.consumed.set(b, true);
        Ok((bx, bz))
    }

    // ---- structure ----

    /// `self ⊗ other`, with `other`'s qubits appended after `self`'s.
    pub fn tensor(&self, other: &StabilizerTableau) -> StabilizerTableau {
        let (n1, n2) = (self.n, other.n);
        let n = n1 + n2;
        let mut t = StabilizerTableau::new(n);
        t.xs.fill(0);
        t.zs.fill(0);
        let place = |t: &mut StabilizerTableau, dst: usize, src: &StabilizerTableau, row: usize, off: usize| {
            for q in 0..src.n {
                if src.bit_x(row, q) {
                    t.set_bit_x(dst, off + q, true);
                }
                if src.bit_z(row, q) {
                    t.set_bit_z(dst, off + q, true);
                }
            }
            t.phases[dst] = src.phases[row];
        };
        for i in 0..n1 {
            place(&mut t, i, self, i, 0);
            place(&mut t, n + i, self, n1 + i, 0);
        }
        for i in 0..n2 {
            place(&mut t, n1 + i, other, i, n1);
            place(&mut t, n + n1 + i, other, n2 + i, n1);
        }
        for q in self.consumed.iter_ones() {
            t.consumed.set(q, true);
        }
        for q in other.consumed.iter_ones() {
            t.consumed.set(n1 + q, true);
        }
        t
    }

    /// Drops qubits that are each in a product state with the rest (for
    /// example, freshly measured qubits). Remaining qubits keep their relative
    /// order.
    pub fn remove_qubits(&self, qubits: &[usize]) -> Result<StabilizerTableau, TableauError> {
        let n = self.n;
        let mut drop = vec![false; n];
        for &q in qubits {
            self.check_qubit(q)?;
            drop[q] = true;
        }
        let mut gens = self.stabilizers();
        let mut isolated = vec![false; n];
        for &t in qubits {
            // Every generator restricted to t must be I or one fixed Pauli.
            let mut local = Pauli::I;
            for g in &gens {
                let p = g.get(t);
                if p != Pauli::I {
                    if local == Pauli::I {
                        local = p;
                    } else if local != p {
                        return Err(TableauError::NotDisentangled(t));
                    }
                }
            }
            if local == Pauli::I {
                return Err(TableauError::Invariant(format!(
                    "qubit {t} is not covered by any generator"
                )));
            }
            let single = PauliOperator::single(n, t, local);
            let negative = self
                .deterministic_outcome(&single)?
                .ok_or(TableauError::NotDisentangled(t))?;
            let pivot = (0..n)
                .find(|&i| !isolated[i] && gens[i].get(t) != Pauli::I)
                .ok_or(TableauError::NotDisentangled(t))?;
            let pivot_op = gens[pivot].clone();
            for (i, g) in gens.iter_mut().enumerate() {
                if i != pivot && g.get(t) != Pauli::I {
                    *g = &pivot_op * &*g;
                }
            }
            gens[pivot] = single.with_phase(if negative {
                Phase::MINUS_ONE
            } else {
                Phase::PLUS_ONE
            });
            isolated[pivot] = true;
        }
        let keep: Vec<usize> = (0..n).filter(|&q| !drop[q]).collect();
        let reduced: Vec<PauliOperator> = gens
            .iter()
            .enumerate()
            .filter(|(i, _)| !isolated[*i])
            .map(|(_, g)| {
                let mut op = PauliOperator::identity(keep.len());
                for (new_q, &old_q) in keep.iter().enumerate() {
                    op.set(new_q, g.get(old_q));
                }
                op.with_phase(g.phase())
            })
            .collect();
        let mut t = StabilizerTableau::from_stabilizers(&reduced)?;
        for (new_q, &old_q) in keep.iter().enumerate() {
            if self.consumed.get(old_q) {
                t.consumed.set(new_q, true);
            }
        }
        Ok(t)
    }

    /// Checks commutation, canonical pairing, Hermiticity and full rank.
    pub fn validate(&self) -> Result<(), TableauError> {
        let n = self.n;
        let stabs = self.stabilizers();
        let destabs = self.destabilizers();
        for i in 0..n {
            if !stabs[i].is_hermitian() {
                return Err(TableauError::Invariant(format!("stabilizer {i} is not Hermitian")));
            }
            for j in 0..n {
                if j > i && !stabs[i].commutes_with(&stabs[j]) {
                    return Err(TableauError::Invariant(format!(
                        "stabilizers {i} and {j} anticommute"
                    )));
                }
                if j > i && !destabs[i].commutes_with(&destabs[j]) {
                    return Err(TableauError::Invariant(format!(
                        "destabilizers {i} and {j} anticommute"
                    )));
                }
                if destabs[i].commutes_with(&stabs[j]) == (i == j) {
                    return Err(TableauError::Invariant(format!(
                        "destabilizer {i} / stabilizer {j} pairing broken"
                    )));
                }
            }
        }
        let mut m = BitMatrix::new(2 * n);
        for s in &stabs {
            let mut row = BitVec::zeros(2 * n);
            for q in s.x_bits().iter_ones() {
                row.set(q, true);
            }
            for q in s.z_bits().iter_ones() {
                row.set(n + q, true);
            }
            m.push_row(row);
        }
        if m.rank() != n {
            return Err(TableauError::Invariant("stabilizers are not independent".into()));
        }
        Ok(())
    }

    /// Whether both tableaux describe the same state (same stabilizer group
    /// with signs).
    pub fn same_state(&self, other: &StabilizerTableau) -> bool {
        if self.n != other.n {
            return false;
        }
        other
            .stabilizers()
            .iter()
            .all(|s| self.deterministic_outcome(s) == Ok(Some(false)))
    }
}

/// Symplectic product of two `(x | z)` vectors of length `2n`.
fn symplectic(a: &BitVec, b: &BitVec, n: usize) -> bool {
    let mut acc = false;
    for q in 0..n {
        acc ^= (a.get(q) & b.get(n + q)) ^ (a.get(n + q) & b.get(q));
    }
    acc
}
