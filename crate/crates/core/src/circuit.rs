//! Clifford circuits with interleaved single-qubit Pauli measurements.

use thiserror::Error;

use crate::pauli::Pauli;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Gate {
    H(usize),
    /// Phase gate `diag(1, i)`.
    S(usize),
    /// `Cnot(control, target)`.
    Cnot(usize, usize),
    Cz(usize, usize),
    Pauli(usize, Pauli),
}

impl Gate {
    pub fn qubits(&self) -> (usize, Option<usize>) {
        match *self {
            Gate::H(q) | Gate::S(q) | Gate::Pauli(q, _) => (q, None),
            Gate::Cnot(a, b) | Gate::Cz(a, b) => (a, Some(b)),
        }
    }

    pub fn is_two_qubit(&self) -> bool {
        matches!(self, Gate::Cnot(..) | Gate::Cz(..))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Basis {
    X,
    Y,
    Z,
}

impl Basis {
    pub fn pauli(self) -> Pauli {
        match self {
            Basis::X => Pauli::X,
            Basis::Y => Pauli::Y,
            Basis::Z => Pauli::Z,
        }
    }
}

/// Single-qubit Pauli measurement performed after the first `after_gates`
/// gates of the circuit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Measurement {
    pub qubit: usize,
    pub basis: Basis,
    pub after_gates: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CircuitError {
    #[error("qubit index {index} out of range for {n_qubits} qubits")]
    QubitOutOfRange { index: usize, n_qubits: usize },
    #[error("two-qubit gate acts twice on qubit {0}")]
    RepeatedQubit(usize),
    #[error("qubit {0} is used after being measured")]
    UsedAfterMeasurement(usize),
    #[error("qubit {0} is measured twice")]
    MeasuredTwice(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CliffordCircuit {
    n_qubits: usize,
    gates: Vec<Gate>,
    measurements: Vec<Measurement>,
}

impl CliffordCircuit {
    pub fn new(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            gates: Vec::new(),
            measurements: Vec::new(),
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn measurements(&self) -> &[Measurement] {
        &self.measurements
    }

    fn check_index(&self, q: usize) -> Result<(), CircuitError> {
        if q >= self.n_qubits {
            return Err(CircuitError::QubitOutOfRange {
                index: q,
                n_qubits: self.n_qubits,
            });
        }
        if self.measurements.iter().any(|m| m.qubit == q) {
            return Err(CircuitError::UsedAfterMeasurement(q));
        }
        Ok(())
    }

    pub fn push(&mut self, gate: Gate) -> Result<&mut Self, CircuitError> {
        let (a, b) = gate.qubits();
        self.check_index(a)?;
        if let Some(b) = b {
            self.check_index(b)?;
            if a == b {
                return Err(CircuitError::RepeatedQubit(a));
            }
        }
        self.gates.push(gate);
        Ok(self)
    }

    /// Appends a measurement at the current end of the gate list. Measured
    /// qubits may not be touched again.
    pub fn measure(&mut self, qubit: usize, basis: Basis) -> Result<&mut Self, CircuitError> {
        if qubit >= self.n_qubits {
            return Err(CircuitError::QubitOutOfRange {
                index: qubit,
                n_qubits: self.n_qubits,
            });
        }
        if self.measurements.iter().any(|m| m.qubit == qubit) {
            return Err(CircuitError::MeasuredTwice(qubit));
        }
        self.measurements.push(Measurement {
            qubit,
            basis,
            after_gates: self.gates.len(),
        });
        Ok(self)
    }

    pub fn two_qubit_gate_count(&self) -> usize {
        self.gates.iter().filter(|g| g.is_two_qubit()).count()
    }

    /// Qubits that are never measured, in increasing order.
    pub fn surviving_qubits(&self) -> Vec<usize> {
        let mut measured = vec![false; self.n_qubits];
        for m in &self.measurements {
            measured[m.qubit] = true;
        }
        (0..self.n_qubits).filter(|&q| !measured[q]).collect()
    }
}
