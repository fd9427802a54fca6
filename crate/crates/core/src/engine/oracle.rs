//! Full stabilizer simulation of the two-party measurement-based protocol.
//! Slow; used to validate the label representation.

use rand::Rng;

use crate::circuit::Gate;
use crate::gf2::BitVec;
use crate::noise::sample_ldn;
use crate::pauli::{Pauli, PauliOperator};
use crate::resource::{hashing_resource, HashingPlan, Party, ResourceState};
use crate::tableau::StabilizerTableau;

use super::ensemble::BellLabel;
use super::EngineError;

/// `N` pairs on `2N` qubits: Alice holds `0..N`, Bob holds `N..2N`, and
/// Bob's half of pair `i` carries `X^{a_i} Z^{b_i}`.
pub fn bell_pair_state(labels: &[BellLabel]) -> StabilizerTableau {
    let n = labels.len();
    let mut t = StabilizerTableau::new(2 * n);
    for (i, l) in labels.iter().enumerate() {
        t.apply(&Gate::H(i)).expect("in range");
        t.apply(&Gate::Cnot(i, n + i)).expect("in range");
        let p = Pauli::from_bits(l.a, l.b);
        if p != Pauli::I {
            t.apply(&Gate::Pauli(n + i, p)).expect("in range");
        }
    }
    t
}

/// Reads the label of the pair `(a, b)` from deterministic `ZZ` and `XX`.
pub fn pair_label(t: &StabilizerTableau, a: usize, b: usize) -> Result<BellLabel, EngineError> {
    let n = t.n_qubits();
    let zz = PauliOperator::from_sparse(n, &[(a, Pauli::Z), (b, Pauli::Z)]);
    let xx = PauliOperator::from_sparse(n, &[(a, Pauli::X), (b, Pauli::X)]);
    let za = t.deterministic_outcome(&zz)?.ok_or(EngineError::NotBellDiagonal)?;
    let xb = t.deterministic_outcome(&xx)?.ok_or(EngineError::NotBellDiagonal)?;
    Ok(BellLabel::new(za, xb))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableauRun {
    pub transcript: BitVec,
    /// Output labels after both parties apply their byproduct corrections.
    pub output_labels: Vec<BellLabel>,
}

/// Both parties read their halves of `labels` into their resources.
/// With `resource_noise = Some(p)`, every resource qubit first suffers a
/// sampled `D(p)` error.
pub fn tableau_bilateral_run<R: Rng + ?Sized>(
    plan: &HashingPlan,
    labels: &[BellLabel],
    resource_noise: Option<f64>,
    rng: &mut R,
) -> Result<TableauRun, EngineError> {
    let ra = hashing_resource(plan, Party::A)?;
    let rb = hashing_resource(plan, Party::B)?;
    run_with_resources(&ra, &rb, labels, resource_noise, rng)
}

pub fn run_with_resources<R: Rng + ?Sized>(
    ra: &ResourceState,
    rb: &ResourceState,
    labels: &[BellLabel],
    resource_noise: Option<f64>,
    rng: &mut R,
) -> Result<TableauRun, EngineError> {
    let n = labels.len();
    let m = ra.n_out();
    let noisy = |r: &ResourceState, rng: &mut R| -> Result<ResourceState, EngineError> {
        match resource_noise {
            None => Ok(r.clone()),
            Some(p) => {
                let q = r.n_qubits();
                let all: Vec<usize> = (0..q).collect();
                Ok(r.with_error(&sample_ldn(p, q, &all, rng)?)?)
            }
        }
    };
    let ra = noisy(ra, rng)?;
    let rb = noisy(rb, rng)?;
    let state = bell_pair_state(labels);
    let alice: Vec<usize> = (0..n).collect();
    let after_a = ra.read_in_qubits(&state, &alice, rng)?;
    // Remaining: Bob's halves 0..n, Alice's outputs n..n+m.
    let after_b = rb.read_in_qubits(&after_a.state, &alice, rng)?;
    // Remaining: Alice's outputs 0..m, Bob's outputs m..2m.
    let mut out = after_b.state;
    let mut correction = PauliOperator::identity(2 * m);
    for k in 0..m {
        correction.set(k, after_a.frame.get(k));
        correction.set(m + k, after_b.frame.get(k));
    }
    out.apply_pauli_operator(&correction)?;
    let output_labels = (0..m).map(|k| pair_label(&out, k, m + k)).collect::<Result<_, _>>()?;
    let mut transcript = after_a.virtual_outcomes.clone();
    transcript.xor_assign(&after_b.virtual_outcomes);
    Ok(TableauRun {
        transcript,
        output_labels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::checks::ParityChecks;
    use crate::resource::make_hashing_plan;
    use crate::rng::{trial_rng, Purpose};

    #[test]
    fn bell_pair_state_labels() {
        let labels: Vec<BellLabel> = (0..4).map(BellLabel::from_index).collect();
        let t = bell_pair_state(&labels);
        for (i, l) in labels.iter().enumerate() {
            assert_eq!(pair_label(&t, i, 4 + i).unwrap(), *l);
        }
    }

    #[test]
    fn noiseless_phi_plus_gives_zero_transcript() {
        let plan = make_hashing_plan(6, 3, 2).unwrap();
        let mut rng = trial_rng(2, 0, Purpose::Test);
        let run = tableau_bilateral_run(&plan, &[BellLabel::PHI_PLUS; 6], None, &mut rng).unwrap();
        assert!(run.transcript.is_zero());
        assert!(run.output_labels.iter().all(|l| l.is_phi_plus()));
    }

    #[test]
    fn matches_label_representation() {
        for seed in 0..30 {
            let plan = make_hashing_plan(7, 3, seed).unwrap();
            let checks = ParityChecks::from_plan(&plan);
            let mut rng = trial_rng(seed, 0, Purpose::Test);
            let labels: Vec<BellLabel> = (0..7).map(|_| BellLabel::from_index(rng.random_range(0..4))).collect();
            let run = tableau_bilateral_run(&plan, &labels, None, &mut rng).unwrap();
            assert_eq!(run.transcript, checks.transcript(&labels), "seed {seed}");
            assert_eq!(run.output_labels, checks.output_labels(&labels), "seed {seed}");
        }
    }
}
