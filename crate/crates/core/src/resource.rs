//! Hashing plans, their Clifford circuits and the compact resource states
//! that implement them.
//!
//! A round of a plan picks a target pair and a subset of the other
//! surviving pairs and reveals the parity of one bit type over
//! `subset ∪ {target}`:
//!
//! * amplitude: `CNOT(s → t)` for each `s` in the subset, then measure `Z_t`;
//! * phase: `CNOT(t → s)` for each `s`, then measure `X_t`.
//!
//! Both parties run the same circuit on their halves; the XOR of their
//! outcomes is the parity bit.
//!
//! The resource for a circuit is its Jamiolkowski state: `n_in` Bell pairs
//! with the circuit applied to one half and every measured qubit projected
//! on outcome 0. It has `n_in + n_out` qubits, input ports first. Bell
//! measurements of the inputs against the ports teleport them through the
//! circuit; the byproduct map turns the Bell outcomes into the virtual
//! measurement outcomes and the Pauli frame left on the outputs.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use thiserror::Error;

use crate::circuit::{Basis, CircuitError, CliffordCircuit, Gate};
use crate::gf2::{BitMatrix, BitVec, HexError};
use crate::pauli::{Pauli, PauliFrame, PauliOperator, Phase};
use crate::rng::{trial_rng, Purpose};
use crate::tableau::{StabilizerTableau, TableauError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ResourceError {
    #[error("need 0 < M < N, got N = {n}, M = {m}")]
    InvalidSize { n: usize, m: usize },
    #[error("invalid round {round}: {reason}")]
    InvalidRound { round: usize, reason: &'static str },
    #[error("expected {expected} input qubits, got {found}")]
    PortMismatch { expected: usize, found: usize },
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Tableau(#[from] TableauError),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Party {
    A,
    B,
}

impl fmt::Display for Party {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Party::A => "A",
            Party::B => "B",
        })
    }
}

impl FromStr for Party {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "A" => Ok(Party::A),
            "B" => Ok(Party::B),
            _ => Err(format!("unknown party {s:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ParityType {
    /// Parity of the `a` (bit-flip) labels, read out in the Z basis.
    Amplitude,
    /// Parity of the `b` (phase-flip) labels, read out in the X basis.
    Phase,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Round {
    pub subset: Vec<usize>,
    pub parity_type: ParityType,
    pub target: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HashingPlan {
    n_pairs: usize,
    n_output: usize,
    rounds: Vec<Round>,
    seed: u64,
}

impl HashingPlan {
    /// Builds a plan from explicit rounds, checking that targets are
    /// distinct, never reused and that subsets only contain pairs that are
    /// still alive.
    pub fn from_rounds(n_pairs: usize, rounds: Vec<Round>, seed: u64) -> Result<Self, ResourceError> {
        if rounds.is_empty() || rounds.len() >= n_pairs {
            return Err(ResourceError::InvalidSize {
                n: n_pairs,
                m: n_pairs.saturating_sub(rounds.len()),
            });
        }
        let mut dead = vec![false; n_pairs];
        for (i, r) in rounds.iter().enumerate() {
            let bad = |reason| ResourceError::InvalidRound { round: i, reason };
            if r.target >= n_pairs || dead[r.target] {
                return Err(bad("target is out of range or already measured"));
            }
            if r.subset.is_empty() {
                return Err(bad("empty subset"));
            }
            let mut seen = vec![false; n_pairs];
            for &s in &r.subset {
                if s >= n_pairs || dead[s] || s == r.target || seen[s] {
                    return Err(bad("subset member is invalid, measured, repeated or the target"));
                }
                seen[s] = true;
            }
            dead[r.target] = true;
        }
        Ok(Self {
            n_pairs,
            n_output: n_pairs - rounds.len(),
            rounds,
            seed,
        })
    }

    pub fn n_pairs(&self) -> usize {
        self.n_pairs
    }

    pub fn n_output(&self) -> usize {
        self.n_output
    }

    pub fn rounds(&self) -> &[Round] {
        &self.rounds
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Pairs that are never measured, in increasing order.
    pub fn surviving_pairs(&self) -> Vec<usize> {
        let mut dead = vec![false; self.n_pairs];
        for r in &self.rounds {
            dead[r.target] = true;
        }
        (0..self.n_pairs).filter(|&i| !dead[i]).collect()
    }
}

/// Random plan with `N − M` rounds. Each round draws its target uniformly
/// from the surviving pairs, includes every other surviving pair with
/// probability 1/2 (redrawing empty subsets) and picks the parity type
/// uniformly.
pub fn make_hashing_plan(n: usize, m: usize, seed: u64) -> Result<HashingPlan, ResourceError> {
    if m == 0 || m >= n {
        return Err(ResourceError::InvalidSize { n, m });
    }
    let mut rng = trial_rng(seed, 0, Purpose::Plan);
    let mut alive: Vec<usize> = (0..n).collect();
    let mut rounds = Vec::with_capacity(n - m);
    for _ in 0..n - m {
        let target = alive.swap_remove(rng.random_range(0..alive.len()));
        alive.sort_unstable();
        let subset = loop {
            let s: Vec<usize> = alive.iter().copied().filter(|_| rng.random::<bool>()).collect();
            if !s.is_empty() {
                break s;
            }
        };
        let parity_type = if rng.random::<bool>() {
            ParityType::Phase
        } else {
            ParityType::Amplitude
        };
        rounds.push(Round {
            subset,
            parity_type,
            target,
        });
    }
    Ok(HashingPlan {
        n_pairs: n,
        n_output: m,
        rounds,
        seed,
    })
}

/// One party's circuit for `plan`. Both parties get the same circuit; the
/// argument only documents intent.
pub fn plan_to_circuit(plan: &HashingPlan, _party: Party) -> CliffordCircuit {
    let mut c = CliffordCircuit::new(plan.n_pairs);
    for r in &plan.rounds {
        for &s in &r.subset {
            let gate = match r.parity_type {
                ParityType::Amplitude => Gate::Cnot(s, r.target),
                ParityType::Phase => Gate::Cnot(r.target, s),
            };
            c.push(gate).expect("validated plan");
        }
        let basis = match r.parity_type {
            ParityType::Amplitude => Basis::Z,
            ParityType::Phase => Basis::X,
        };
        c.measure(r.target, basis).expect("validated plan");
    }
    c
}

/// Measurement-based implementation of a circuit for one party.
///
/// The byproduct map has `2·n_in + n_meas` columns — Bell bits
/// `(b_x, b_z)` of port `i` at `2i, 2i+1`, then the reference outcomes of
/// the preparation measurements — and `n_meas + 2·n_out` rows: the virtual
/// measurement outcomes in circuit order, then `(x, z)` frame bits for each
/// output.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResourceState {
    party: Party,
    seed: u64,
    tableau: StabilizerTableau,
    input_ports: Vec<usize>,
    output_ports: Vec<usize>,
    byproduct_map: BitMatrix,
}

/// Result of coupling inputs into a resource.
#[derive(Debug, Clone)]
pub struct ReadIn {
    /// Remaining state: non-input qubits of the coupled state in their
    /// original order, then the resource outputs.
    pub state: StabilizerTableau,
    /// Bell outcomes, `(b_x, b_z)` for port `i` at `2i, 2i+1`.
    pub bell_bits: BitVec,
    /// Outcomes the circuit's measurements would have produced.
    pub virtual_outcomes: BitVec,
    /// Pauli correction to apply to the outputs.
    pub frame: PauliFrame,
}

/// Symbolic Pauli frame: per qubit, x and z components as linear forms.
struct SymbolicFrame {
    x: Vec<BitVec>,
    z: Vec<BitVec>,
}

impl SymbolicFrame {
    fn apply(&mut self, gate: &Gate) {
        match *gate {
            Gate::H(q) => {
                std::mem::swap(&mut self.x[q], &mut self.z[q]);
            }
            Gate::S(q) => {
                let x = self.x[q].clone();
                self.z[q].xor_assign(&x);
            }
            Gate::Cnot(c, t) => {
                let xc = self.x[c].clone();
                self.x[t].xor_assign(&xc);
                let zt = self.z[t].clone();
                self.z[c].xor_assign(&zt);
            }
            Gate::Cz(a, b) => {
                let (xa, xb) = (self.x[a].clone(), self.x[b].clone());
                self.z[a].xor_assign(&xb);
                self.z[b].xor_assign(&xa);
            }
            Gate::Pauli(..) => {}
        }
    }
}

/// Builds the resource for `circuit`. The typed gate set is Clifford by
/// construction, so only size and measurement errors can occur.
pub fn jamiolkowski_resource(circuit: &CliffordCircuit, party: Party) -> Result<ResourceState, ResourceError> {
    let n = circuit.n_qubits();
    let measurements = circuit.measurements();
    let n_meas = measurements.len();
    let outputs = circuit.surviving_qubits();

    // Ports 0..n, circuit qubits n..2n, Φ+ between i and n + i.
    let mut t = StabilizerTableau::new(2 * n);
    for i in 0..n {
        t.apply(&Gate::H(i))?;
        t.apply(&Gate::Cnot(i, n + i))?;
    }
    let shift = |g: &Gate| match *g {
        Gate::H(q) => Gate::H(n + q),
        Gate::S(q) => Gate::S(n + q),
        Gate::Cnot(a, b) => Gate::Cnot(n + a, n + b),
        Gate::Cz(a, b) => Gate::Cz(n + a, n + b),
        Gate::Pauli(q, p) => Gate::Pauli(n + q, p),
    };
    let mut next = 0;
    for (gi, g) in circuit.gates().iter().enumerate() {
        while next < n_meas && measurements[next].after_gates == gi {
            let m = measurements[next];
            t.measure_forced(&PauliOperator::single(2 * n, n + m.qubit, m.basis.pauli()), false)?;
            next += 1;
        }
        t.apply(&shift(g))?;
    }
    for m in &measurements[next..] {
        t.measure_forced(&PauliOperator::single(2 * n, n + m.qubit, m.basis.pauli()), false)?;
    }
    let measured: Vec<usize> = measurements.iter().map(|m| n + m.qubit).collect();
    let tableau = t.remove_qubits(&measured)?;

    // Byproduct map by symbolic propagation of the teleported frame
    // X^{b_z} Z^{b_x} on each circuit qubit.
    let cols = 2 * n + n_meas;
    let mut frame = SymbolicFrame {
        x: (0..n).map(|i| BitVec::unit(cols, 2 * i + 1)).collect(),
        z: (0..n).map(|i| BitVec::unit(cols, 2 * i)).collect(),
    };
    for g in circuit.gates() {
        frame.apply(g);
    }
    let mut map = BitMatrix::new(cols);
    for (j, m) in measurements.iter().enumerate() {
        let mut row = match m.basis {
            Basis::Z => frame.x[m.qubit].clone(),
            Basis::X => frame.z[m.qubit].clone(),
            Basis::Y => {
                let mut r = frame.x[m.qubit].clone();
                r.xor_assign(&frame.z[m.qubit]);
                r
            }
        };
        row.flip(2 * n + j);
        map.push_row(row);
    }
    for &q in &outputs {
        map.push_row(frame.x[q].clone());
        map.push_row(frame.z[q].clone());
    }

    Ok(ResourceState {
        party,
        seed: 0,
        tableau,
        input_ports: (0..n).collect(),
        output_ports: (n..n + outputs.len()).collect(),
        byproduct_map: map,
    })
}

/// Resource for one party of a hashing plan, tagged with the plan seed.
pub fn hashing_resource(plan: &HashingPlan, party: Party) -> Result<ResourceState, ResourceError> {
    let mut r = jamiolkowski_resource(&plan_to_circuit(plan, party), party)?;
    r.seed = plan.seed();
    Ok(r)
}

impl ResourceState {
    pub fn party(&self) -> Party {
        self.party
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Copy of the resource with the Pauli `error` applied to its qubits.
    pub fn with_error(&self, error: &PauliOperator) -> Result<Self, ResourceError> {
        let mut r = self.clone();
        r.tableau.apply_pauli_operator(error)?;
        Ok(r)
    }

    pub fn tableau(&self) -> &StabilizerTableau {
        &self.tableau
    }

    pub fn input_ports(&self) -> &[usize] {
        &self.input_ports
    }

    pub fn output_ports(&self) -> &[usize] {
        &self.output_ports
    }

    pub fn byproduct_map(&self) -> &BitMatrix {
        &self.byproduct_map
    }

    pub fn n_in(&self) -> usize {
        self.input_ports.len()
    }

    pub fn n_out(&self) -> usize {
        self.output_ports.len()
    }

    pub fn n_measured(&self) -> usize {
        self.byproduct_map.n_rows() - 2 * self.n_out()
    }

    pub fn n_qubits(&self) -> usize {
        self.tableau.n_qubits()
    }

    /// Applies the byproduct map to Bell bits (reference outcomes all 0).
    pub fn decode(&self, bell_bits: &BitVec) -> Result<(BitVec, PauliFrame), ResourceError> {
        if bell_bits.len() != 2 * self.n_in() {
            return Err(ResourceError::PortMismatch {
                expected: 2 * self.n_in(),
                found: bell_bits.len(),
            });
        }
        let mut input = BitVec::zeros(self.byproduct_map.n_cols());
        for i in bell_bits.iter_ones() {
            input.set(i, true);
        }
        Ok(self.split_output(&self.byproduct_map.mul_vec(&input)))
    }

    /// Full linear map on `2·n_in + n_meas` input bits.
    pub fn apply_map(&self, input: &BitVec) -> BitVec {
        self.byproduct_map.mul_vec(input)
    }

    fn split_output(&self, out: &BitVec) -> (BitVec, PauliFrame) {
        let k = self.n_measured();
        let m = self.n_out();
        let mut x = BitVec::zeros(m);
        let mut z = BitVec::zeros(m);
        for j in 0..m {
            x.set(j, out.get(k + 2 * j));
            z.set(j, out.get(k + 2 * j + 1));
        }
        (out.slice(0, k), PauliFrame::from_parts(x, z))
    }

    /// Bell-measures qubit `inputs[i]` of `state` against input port `i`.
    pub fn read_in_qubits<R: Rng + ?Sized>(
        &self,
        state: &StabilizerTableau,
        inputs: &[usize],
        rng: &mut R,
    ) -> Result<ReadIn, ResourceError> {
        if inputs.len() != self.n_in() {
            return Err(ResourceError::PortMismatch {
                expected: self.n_in(),
                found: inputs.len(),
            });
        }
        let n0 = state.n_qubits();
        let mut joint = state.tensor(&self.tableau);
        let total = joint.n_qubits();
        let mut bell_bits = BitVec::zeros(2 * self.n_in());
        for (i, &q) in inputs.iter().enumerate() {
            let port = n0 + self.input_ports[i];
            let (bx, bz) = joint.bell_measure(q, port, rng)?;
            bell_bits.set(2 * i, bx);
            bell_bits.set(2 * i + 1, bz);
            // Disentangle the measured pair so it can be dropped.
            joint.measure_forced(&PauliOperator::single(total, q, Pauli::Z), false)?;
        }
        let mut dropped: Vec<usize> = inputs.to_vec();
        dropped.extend(self.input_ports.iter().map(|&p| n0 + p));
        let reduced = joint.remove_qubits(&dropped)?;
        let (virtual_outcomes, frame) = self.decode(&bell_bits)?;
        Ok(ReadIn {
            state: reduced,
            bell_bits,
            virtual_outcomes,
            frame,
        })
    }

    /// Reads in a state holding exactly the `n_in` input qubits.
    pub fn read_in<R: Rng + ?Sized>(&self, input: &StabilizerTableau, rng: &mut R) -> Result<ReadIn, ResourceError> {
        if input.n_qubits() != self.n_in() {
            return Err(ResourceError::PortMismatch {
                expected: self.n_in(),
                found: input.n_qubits(),
            });
        }
        let inputs: Vec<usize> = (0..self.n_in()).collect();
        self.read_in_qubits(input, &inputs, rng)
    }

    /// Text form: header, stabilizers as `sign x-hex z-hex`, byproduct rows
    /// as hex. Destabilizers are recomputed on parsing.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("n_in {}\n", self.n_in()));
        s.push_str(&format!("n_out {}\n", self.n_out()));
        s.push_str(&format!("party {}\n", self.party));
        s.push_str(&format!("seed {}\n", self.seed));
        s.push_str("outputs");
        for p in &self.output_ports {
            s.push_str(&format!(" {p}"));
        }
        s.push('\n');
        s.push_str(&format!("stabilizers {}\n", self.tableau.n_qubits()));
        for g in self.tableau.stabilizers() {
            let sign = if g.phase().is_negative() { '-' } else { '+' };
            s.push_str(&format!("{sign} {} {}\n", g.x_bits().to_hex(), g.z_bits().to_hex()));
        }
        s.push_str(&format!(
            "byproduct {} {}\n",
            self.byproduct_map.n_rows(),
            self.byproduct_map.n_cols()
        ));
        for r in self.byproduct_map.rows() {
            s.push_str(&r.to_hex());
            s.push('\n');
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self, ResourceError> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
        let mut next = |key: &str| -> Result<(usize, Vec<String>), ResourceError> {
            let (line, l) = lines.next().ok_or(ResourceError::Parse {
                line: 0,
                message: format!("missing {key} line"),
            })?;
            let mut parts = l.split_whitespace();
            if !key.is_empty() && parts.next() != Some(key) {
                return Err(ResourceError::Parse {
                    line,
                    message: format!("expected {key:?}"),
                });
            }
            Ok((line, parts.map(str::to_owned).collect()))
        };
        fn num<T: FromStr>(line: usize, v: Option<&String>) -> Result<T, ResourceError> {
            v.and_then(|s| s.parse().ok()).ok_or(ResourceError::Parse {
                line,
                message: "missing or invalid number".into(),
            })
        }
        let hex = |line: usize, len: usize, s: Option<&String>| -> Result<BitVec, ResourceError> {
            let s = s.ok_or(ResourceError::Parse {
                line,
                message: "missing hex field".into(),
            })?;
            BitVec::from_hex(len, s).map_err(|e: HexError| ResourceError::Parse {
                line,
                message: e.to_string(),
            })
        };

        let (l, v) = next("n_in")?;
        let n_in: usize = num(l, v.first())?;
        let (l, v) = next("n_out")?;
        let n_out: usize = num(l, v.first())?;
        let (l, v) = next("party")?;
        let party: Party = v
            .first()
            .and_then(|s| s.parse().ok())
            .ok_or(ResourceError::Parse {
                line: l,
                message: "invalid party".into(),
            })?;
        let (l, v) = next("seed")?;
        let seed: u64 = num(l, v.first())?;
        let (l, v) = next("outputs")?;
        let output_ports = v
            .iter()
            .map(|s| num::<usize>(l, Some(s)))
            .collect::<Result<Vec<_>, _>>()?;
        if output_ports.len() != n_out {
            return Err(ResourceError::Parse {
                line: l,
                message: format!("expected {n_out} output ports"),
            });
        }
        let (l, v) = next("stabilizers")?;
        let n: usize = num(l, v.first())?;
        if n != n_in + n_out {
            return Err(ResourceError::Parse {
                line: l,
                message: format!("resource must have n_in + n_out = {} qubits", n_in + n_out),
            });
        }
        let mut gens = Vec::with_capacity(n);
        for _ in 0..n {
            let (l, v) = next("")?;
            let phase = match v.first().map(String::as_str) {
                Some("+") => Phase::PLUS_ONE,
                Some("-") => Phase::MINUS_ONE,
                _ => {
                    return Err(ResourceError::Parse {
                        line: l,
                        message: "stabilizer sign must be + or -".into(),
                    })
                }
            };
            gens.push(PauliOperator::from_parts(hex(l, n, v.get(1))?, hex(l, n, v.get(2))?, phase));
        }
        let tableau = StabilizerTableau::from_stabilizers(&gens)?;
        let (l, v) = next("byproduct")?;
        let rows: usize = num(l, v.first())?;
        let cols: usize = num(l, v.get(1))?;
        let n_meas = n_in.checked_sub(n_out).ok_or(ResourceError::Parse {
            line: l,
            message: "n_out exceeds n_in".into(),
        })?;
        if rows != n_meas + 2 * n_out || cols != 2 * n_in + n_meas {
            return Err(ResourceError::Parse {
                line: l,
                message: "byproduct map has the wrong shape".into(),
            });
        }
        let mut map = BitMatrix::new(cols);
        for _ in 0..rows {
            let (l, v) = next("")?;
            map.push_row(hex(l, cols, v.first())?);
        }
        Ok(Self {
            party,
            seed,
            tableau,
            input_ports: (0..n_in).collect(),
            output_ports,
            byproduct_map: map,
        })
    }
}
