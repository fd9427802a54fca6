use std::collections::BTreeSet;

use mbhash_core::circuit::{Basis, CliffordCircuit, Gate};
use mbhash_core::dense::{tableau_to_dense, DenseState};
use mbhash_core::engine::oracle::{bell_pair_state, pair_label};
use mbhash_core::engine::{simulate_bilateral, BellLabel, ParityChecks};
use mbhash_core::gf2::BitVec;
use mbhash_core::resource::{
    hashing_resource, jamiolkowski_resource, make_hashing_plan, plan_to_circuit, HashingPlan, ParityType, Party,
    ResourceError, ResourceState, Round,
};
use mbhash_core::rng::{trial_rng, Purpose};
use mbhash_core::selftest::random_clifford_circuit;
use mbhash_core::tableau::StabilizerTableau;
use proptest::prelude::*;
use rand::Rng;

fn plan_strategy() -> impl Strategy<Value = HashingPlan> {
    (2usize..=24, any::<u64>()).prop_flat_map(|(n, seed)| {
        (1..n).prop_map(move |m| make_hashing_plan(n, m, seed).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn plan_rounds_are_well_formed(plan in plan_strategy()) {
        let n = plan.n_pairs();
        prop_assert_eq!(plan.rounds().len(), n - plan.n_output());
        let mut alive: BTreeSet<usize> = (0..n).collect();
        for r in plan.rounds() {
            prop_assert!(!r.subset.is_empty());
            prop_assert!(alive.contains(&r.target));
            prop_assert!(r.subset.iter().all(|s| alive.contains(s) && *s != r.target));
            alive.remove(&r.target);
        }
        prop_assert_eq!(alive.into_iter().collect::<Vec<_>>(), plan.surviving_pairs());
    }

    #[test]
    fn resource_is_compact(plan in plan_strategy()) {
        for party in [Party::A, Party::B] {
            let r = hashing_resource(&plan, party).unwrap();
            prop_assert_eq!(r.n_qubits(), plan.n_pairs() + plan.n_output());
            prop_assert_eq!(r.input_ports().len(), plan.n_pairs());
            prop_assert_eq!(r.output_ports().len(), plan.n_output());
        }
    }

    #[test]
    fn byproduct_map_is_linear(plan in plan_strategy(), seed in any::<u64>()) {
        let r = hashing_resource(&plan, Party::A).unwrap();
        let mut rng = trial_rng(seed, 0, Purpose::Test);
        let width = 2 * plan.n_pairs();
        let mut draw = || BitVec::from_bools(&(0..width).map(|_| rng.random()).collect::<Vec<bool>>());
        let (x, y) = (draw(), draw());
        let mut xy = x.clone();
        xy.xor_assign(&y);
        let (vx, mut fx) = r.decode(&x).unwrap();
        let (vy, fy) = r.decode(&y).unwrap();
        let (vxy, fxy) = r.decode(&xy).unwrap();
        let mut v = vx;
        v.xor_assign(&vy);
        fx.compose(&fy);
        prop_assert_eq!(v, vxy);
        prop_assert_eq!(fx, fxy);
    }

    #[test]
    fn text_round_trip(plan in plan_strategy()) {
        let r = hashing_resource(&plan, Party::B).unwrap();
        let text = r.to_text();
        let back = ResourceState::from_text(&text).unwrap();
        prop_assert!(back.tableau().same_state(r.tableau()));
        prop_assert_eq!(back.byproduct_map(), r.byproduct_map());
        prop_assert_eq!(back.to_text(), text);
    }
}

#[test]
fn plan_examples() {
    let p = make_hashing_plan(2, 1, 9).unwrap();
    assert_eq!(p.rounds().len(), 1);
    assert_eq!(p.rounds()[0].subset.len(), 1);
    assert_eq!(make_hashing_plan(16, 4, 77).unwrap(), make_hashing_plan(16, 4, 77).unwrap());
    assert_eq!(make_hashing_plan(16, 4, 77).unwrap().rounds().len(), 12);
    assert!(matches!(make_hashing_plan(4, 4, 0), Err(ResourceError::InvalidSize { .. })));
    assert!(matches!(make_hashing_plan(4, 0, 0), Err(ResourceError::InvalidSize { .. })));
}

#[test]
fn mean_subset_size_is_half_the_candidates() {
    let (mut sum, mut expect) = (0.0, 0.0);
    for seed in 0..400 {
        let p = make_hashing_plan(40, 10, seed).unwrap();
        let mut alive = 40;
        for r in p.rounds() {
            let others = (alive - 1) as f64;
            // nonempty Bernoulli(1/2) subset of `others` candidates
            expect += others / 2.0 / (1.0 - 0.5f64.powf(others));
            sum += r.subset.len() as f64;
            alive -= 1;
        }
    }
    assert!((sum / expect - 1.0).abs() < 0.01, "{sum} vs {expect}");
}

#[test]
fn minimal_round_circuit() {
    let round = Round {
        subset: vec![0],
        parity_type: ParityType::Amplitude,
        target: 1,
    };
    let plan = HashingPlan::from_rounds(2, vec![round], 0).unwrap();
    let c = plan_to_circuit(&plan, Party::A);
    assert_eq!(c.gates(), &[Gate::Cnot(0, 1)]);
    assert_eq!(c.measurements().len(), 1);
    assert_eq!((c.measurements()[0].qubit, c.measurements()[0].basis), (1, Basis::Z));
}

#[test]
fn round_gate_count_equals_subset_size() {
    let plan = make_hashing_plan(30, 8, 5).unwrap();
    let c = plan_to_circuit(&plan, Party::B);
    let total: usize = plan.rounds().iter().map(|r| r.subset.len()).sum();
    assert_eq!(c.two_qubit_gate_count(), total);
}

#[test]
fn four_pair_resource_has_six_qubits() {
    let plan = make_hashing_plan(4, 2, 1).unwrap();
    assert_eq!(hashing_resource(&plan, Party::A).unwrap().n_qubits(), 6);
}

#[test]
fn single_hadamard_resource() {
    let mut c = CliffordCircuit::new(1);
    c.push(Gate::H(0)).unwrap();
    let r = jamiolkowski_resource(&c, Party::A).unwrap();
    let mut expect = DenseState::zero(2).unwrap();
    expect.apply_gate(&Gate::H(0));
    expect.apply_gate(&Gate::Cnot(0, 1));
    expect.apply_gate(&Gate::H(1));
    assert!(tableau_to_dense(r.tableau()).unwrap().equal_up_to_phase(&expect, 1e-12));
}

#[test]
fn clifford_resources_teleport_through_their_circuit() {
    let mut rng = trial_rng(21, 0, Purpose::Test);
    for _ in 0..30 {
        let c = random_clifford_circuit(3, 15, &mut rng);
        let r = jamiolkowski_resource(&c, Party::A).unwrap();
        let input_circuit = random_clifford_circuit(3, 15, &mut rng);
        let mut input = StabilizerTableau::new(3);
        input.apply_gates(&input_circuit).unwrap();
        let out = r.read_in(&input, &mut rng).unwrap();
        let mut got = out.state;
        got.apply_pauli_operator(&out.frame.to_operator()).unwrap();
        let mut expect = input.clone();
        expect.apply_gates(&c).unwrap();
        assert!(got.same_state(&expect));
    }
}

#[test]
fn noiseless_read_in_of_phi_plus() {
    let mut rng = trial_rng(4, 0, Purpose::Test);
    let plan = make_hashing_plan(10, 4, 3).unwrap();
    let (ra, rb) = (hashing_resource(&plan, Party::A).unwrap(), hashing_resource(&plan, Party::B).unwrap());
    let run = mbhash_core::engine::oracle::run_with_resources(&ra, &rb, &[BellLabel::PHI_PLUS; 10], None, &mut rng).unwrap();
    assert!(run.transcript.is_zero());
    assert!(run.output_labels.iter().all(|l| l.is_phi_plus()));
}

/// Read-in on both sides versus the label-propagated gate-based run.
#[test]
fn read_in_matches_gate_based_transcripts() {
    for seed in 0..1000u64 {
        let mut rng = trial_rng(seed, 0, Purpose::Test);
        let n = 2 + (seed as usize % 15);
        let m = 1 + rng.random_range(0..n - 1);
        let plan = make_hashing_plan(n, m, seed).unwrap();
        let planted: Vec<BellLabel> = (0..n).map(|_| BellLabel::from_index(rng.random_range(0..4))).collect();
        let mut labels = planted.clone();
        let gate = simulate_bilateral(&plan, &mut labels, |_, _, _| {});
        let ra = hashing_resource(&plan, Party::A).unwrap();
        let rb = hashing_resource(&plan, Party::B).unwrap();
        let run = mbhash_core::engine::oracle::run_with_resources(&ra, &rb, &planted, None, &mut rng).unwrap();
        assert_eq!(run.transcript, gate, "seed {seed}");
        assert_eq!(run.transcript, ParityChecks::from_plan(&plan).transcript(&planted));
    }
}

#[test]
fn port_mismatch_is_rejected() {
    let r = jamiolkowski_resource(&CliffordCircuit::new(2), Party::A).unwrap();
    let state = bell_pair_state(&[BellLabel::PHI_PLUS; 3]);
    let mut rng = trial_rng(0, 0, Purpose::Test);
    assert!(r.read_in(&state, &mut rng).is_err());
    assert_eq!(pair_label(&state, 0, 3).unwrap(), BellLabel::PHI_PLUS);
}
