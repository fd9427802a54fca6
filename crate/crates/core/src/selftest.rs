//! Reduced-size property suites, one per module, for the `selftest`
//! command and the test harness.
//!
//! Every check runs in isolation: a panic or an `Err` becomes a recorded
//! failure and the remaining checks still run.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use rand::Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::analytics::{
    self, a1_1d, a1_2d, cluster_yield, feasibility, p_min_from_qmin, Convention, Dimension, Target,
};
use crate::circuit::{CliffordCircuit, Gate};
use crate::dense::{max_abs_diff, random_density, simulate_gates, single_pauli_matrix, tableau_to_dense, DenseState, C64};
use crate::engine::oracle::{run_with_resources, tableau_bilateral_run};
use crate::engine::{
    decode_success, run_trials, safe_output_count, sample_ensemble, simulate_bilateral, BellDistribution, BellLabel,
    DecoderConfig, Execution, ParityChecks, Protocol, TrialConfig,
};
use crate::gf2::BitVec;
use crate::noise::{bell_state, compose_ldn, draw_pauli, fidelity_exact, ldn_dense, ldn_single_qubit_distribution, verify_noise_exchange};
use crate::pauli::{Pauli, PauliOperator, Phase};
use crate::resource::{
    hashing_resource, jamiolkowski_resource, make_hashing_plan, HashingPlan, Party, ResourceState,
};
use crate::rng::{trial_rng, Purpose, TrialRng};
use crate::tableau::StabilizerTableau;

/// Single-qubit LDN probabilities `[I, X, Y, Z]` as a function of `p`.
pub type LdnDistribution = fn(f64) -> [f64; 4];

/// Deliberate defects for exercising the harness itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// Uses `P(I) = p` instead of `(3p+1)/4`.
    LdnIdentityProbability,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SelftestOptions {
    pub seed: u64,
    pub fault: Option<Fault>,
}

impl Default for SelftestOptions {
    fn default() -> Self {
        Self { seed: 2024, fault: None }
    }
}

#[derive(Debug, Clone)]
pub struct SuiteReport {
    pub name: &'static str,
    pub checks: usize,
    pub failures: Vec<String>,
    pub elapsed: Duration,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct SelftestReport {
    pub suites: Vec<SuiteReport>,
}

impl SelftestReport {
    pub fn passed(&self) -> bool {
        self.suites.iter().all(SuiteReport::passed)
    }

    pub fn elapsed(&self) -> Duration {
        self.suites.iter().map(|s| s.elapsed).sum()
    }
}

pub fn ldn_distribution(fault: Option<Fault>) -> LdnDistribution {
    fn correct(p: f64) -> [f64; 4] {
        ldn_single_qubit_distribution(p).expect("p in [0, 1]")
    }
    fn wrong_identity(p: f64) -> [f64; 4] {
        let e = (1.0 - p) / 4.0;
        [p, e, e, e]
    }
    match fault {
        None => correct,
        Some(Fault::LdnIdentityProbability) => wrong_identity,
    }
}

pub fn run_all(options: &SelftestOptions) -> SelftestReport {
    let seed = options.seed;
    SelftestReport {
        suites: vec![
            pauli_core_suite(seed),
            noise_suite(seed, ldn_distribution(options.fault)),
            resource_suite(seed),
            engine_suite(seed),
            analytics_suite(seed),
        ],
    }
}

type CheckResult = Result<(), String>;

struct Suite {
    name: &'static str,
    seed: u64,
    checks: usize,
    failures: Vec<String>,
    start: Instant,
}

impl Suite {
    fn new(name: &'static str, seed: u64) -> Self {
        Self {
            name,
            seed,
            checks: 0,
            failures: Vec::new(),
            start: Instant::now(),
        }
    }

    fn rng(&self, stream: u64) -> TrialRng {
        trial_rng(self.seed, stream, Purpose::Test)
    }

    fn check(&mut self, name: &str, f: impl FnOnce() -> CheckResult) {
        self.checks += 1;
        match catch_unwind(AssertUnwindSafe(f)) {
            Ok(Ok(())) => {}
            Ok(Err(msg)) => self.failures.push(format!("{name}: {msg}")),
            Err(panic) => {
                let msg = panic
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_else(|| "panicked".into());
                self.failures.push(format!("{name}: panic: {msg}"));
            }
        }
    }

    fn finish(self) -> SuiteReport {
        SuiteReport {
            name: self.name,
            checks: self.checks,
            failures: self.failures,
            elapsed: self.start.elapsed(),
        }
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> CheckResult {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

/// Random Clifford circuit of `len` gates on `n` qubits (no measurements).
pub fn random_clifford_circuit<R: Rng + ?Sized>(n: usize, len: usize, rng: &mut R) -> CliffordCircuit {
    let mut c = CliffordCircuit::new(n);
    for _ in 0..len {
        let a = rng.random_range(0..n);
        let gate = match rng.random_range(0..5) {
            0 => Gate::H(a),
            1 => Gate::S(a),
            2 => Gate::Pauli(a, Pauli::ALL[rng.random_range(1..4)]),
            k if n > 1 => {
                let mut b = rng.random_range(0..n - 1);
                if b >= a {
                    b += 1;
                }
                if k == 3 {
                    Gate::Cnot(a, b)
                } else {
                    Gate::Cz(a, b)
                }
            }
            _ => Gate::H(a),
        };
        c.push(gate).expect("indices in range");
    }
    c
}

/// Random Hermitian Pauli observable that is not the identity.
pub fn random_observable<R: Rng + ?Sized>(n: usize, rng: &mut R) -> PauliOperator {
    loop {
        let mut op = PauliOperator::identity(n);
        for q in 0..n {
            op.set(q, Pauli::ALL[rng.random_range(0..4)]);
        }
        if !op.is_identity() {
            let phase = if rng.random() { Phase::MINUS_ONE } else { Phase::PLUS_ONE };
            return op.with_phase(phase);
        }
    }
}

fn tableau_for(circuit: &CliffordCircuit) -> StabilizerTableau {
    let mut t = StabilizerTableau::new(circuit.n_qubits());
    t.apply_gates(circuit).expect("valid circuit");
    t
}

/// Teleports `input` (a one-qubit state) through a fresh Bell pair and
/// returns the corrected output and the Bell bits.
fn teleport_once<R: Rng + ?Sized>(
    input: &StabilizerTableau,
    rng: &mut R,
) -> Result<(StabilizerTableau, (bool, bool)), String> {
    let mut pair = StabilizerTableau::new(2);
    pair.apply(&Gate::H(0)).map_err(err)?;
    pair.apply(&Gate::Cnot(0, 1)).map_err(err)?;
    let mut t = input.tensor(&pair);
    let (bx, bz) = t.bell_measure(0, 1, rng).map_err(err)?;
    t.measure_forced(&PauliOperator::single(3, 0, Pauli::Z), false).map_err(err)?;
    let mut out = t.remove_qubits(&[0, 1]).map_err(err)?;
    out.apply(&Gate::Pauli(0, Pauli::from_bits(bz, bx))).map_err(err)?;
    Ok((out, (bx, bz)))
}

pub fn pauli_core_suite(seed: u64) -> SuiteReport {
    let mut s = Suite::new("pauli_core", seed);

    let mut rng = s.rng(1);
    s.check("tableau invariants after every operation", || {
        for _ in 0..40 {
            let n = rng.random_range(1..=10);
            let c = random_clifford_circuit(n, 30, &mut rng);
            let mut t = StabilizerTableau::new(n);
            for g in c.gates() {
                t.apply(g).map_err(err)?;
                if rng.random_range(0..6) == 0 {
                    t.measure(&random_observable(n, &mut rng), &mut rng).map_err(err)?;
                }
                t.validate().map_err(err)?;
            }
        }
        Ok(())
    });

    let mut rng = s.rng(2);
    s.check("dense oracle equals dense simulation", || {
        for _ in 0..30 {
            let n = rng.random_range(1..=8);
            let c = random_clifford_circuit(n, 40, &mut rng);
            let a = tableau_to_dense(&tableau_for(&c)).map_err(err)?;
            let b = simulate_gates(&c).map_err(err)?;
            ensure(a.equal_up_to_phase(&b, 1e-9), || format!("mismatch on {n} qubits"))?;
        }
        Ok(())
    });

    let mut rng = s.rng(3);
    s.check("generators stabilize the dense state", || {
        let t = tableau_for(&random_clifford_circuit(8, 80, &mut rng));
        let psi = tableau_to_dense(&t).map_err(err)?;
        for g in t.stabilizers() {
            let e = psi.expectation(&g).map_err(err)?;
            ensure((e - C64::new(1.0, 0.0)).norm() < 1e-9, || format!("<{g}> = {e}"))?;
        }
        Ok(())
    });

    let mut rng = s.rng(4);
    s.check("teleportation identity for all outcomes", || {
        for _ in 0..6 {
            let input = tableau_for(&random_clifford_circuit(1, 6, &mut rng));
            let mut seen = [false; 4];
            for _ in 0..200 {
                let (out, (bx, bz)) = teleport_once(&input, &mut rng)?;
                ensure(out.same_state(&input), || format!("outcome ({bx}, {bz})"))?;
                let a = tableau_to_dense(&out).map_err(err)?;
                let b = tableau_to_dense(&input).map_err(err)?;
                ensure(a.equal_up_to_phase(&b, 1e-9), || "dense mismatch".into())?;
                seen[(bx as usize) << 1 | bz as usize] = true;
                if seen.iter().all(|&x| x) {
                    break;
                }
            }
            ensure(seen.iter().all(|&x| x), || "not all outcomes observed".into())?;
        }
        Ok(())
    });

    let mut rng = s.rng(5);
    s.check("measurement statistics follow the Born rule", || {
        for _ in 0..5 {
            let t = tableau_for(&random_clifford_circuit(3, 20, &mut rng));
            let obs = random_observable(3, &mut rng);
            let e = tableau_to_dense(&t).map_err(err)?.expectation(&obs).map_err(err)?.re;
            let p1 = (1.0 - e) / 2.0;
            let k = 2000;
            let ones = (0..k)
                .map(|_| t.clone().measure(&obs, &mut rng).map(|o| o.bit as usize))
                .sum::<Result<usize, _>>()
                .map_err(err)?;
            let sigma = (p1 * (1.0 - p1) / k as f64).sqrt();
            let freq = ones as f64 / k as f64;
            ensure((freq - p1).abs() <= 5.0 * sigma + 1e-12, || format!("freq {freq} vs {p1}"))?;
        }
        Ok(())
    });

    let mut rng = s.rng(6);
    s.check("Pauli products match matrix products", || {
        for _ in 0..100 {
            let n = rng.random_range(1..=3);
            let a = random_observable(n, &mut rng);
            let b = random_observable(n, &mut rng);
            let ab = &a * &b;
            let m = crate::dense::pauli_matrix(&a) * crate::dense::pauli_matrix(&b);
            ensure(max_abs_diff(&m, &crate::dense::pauli_matrix(&ab)) < 1e-12, || format!("{a} * {b}"))?;
        }
        Ok(())
    });

    s.finish()
}

/// Column-stacked superoperator `Σ_k w_k (P̄_k ⊗ P_k)` of a Pauli channel.
fn pauli_channel_superoperator(weights: &[f64; 4]) -> DMatrix<C64> {
    let mut s = DMatrix::zeros(4, 4);
    for (k, &w) in weights.iter().enumerate() {
        let p = single_pauli_matrix(1, 0, Pauli::ALL[k]);
        s += p.conjugate().kronecker(&p) * C64::new(w, 0.0);
    }
    s
}

/// `p ρ + (1 − p) tr(ρ) I/2`.
fn ldn_by_definition(rho: &DMatrix<C64>, p: f64) -> DMatrix<C64> {
    let mixed = DMatrix::<C64>::identity(2, 2) * (rho.trace() * 0.5);
    rho * C64::new(p, 0.0) + mixed * C64::new(1.0 - p, 0.0)
}

pub fn noise_suite(seed: u64, dist: LdnDistribution) -> SuiteReport {
    let mut s = Suite::new("noise", seed);

    s.check("distribution is normalized", || {
        for k in 0..=100 {
            let p = k as f64 / 100.0;
            let d = dist(p);
            ensure(d.iter().all(|&x| x >= 0.0), || format!("negative weight at p = {p}"))?;
            ensure((d.iter().sum::<f64>() - 1.0).abs() < 1e-12, || format!("sum {} at p = {p}", d.iter().sum::<f64>()))?;
        }
        Ok(())
    });

    let mut rng = s.rng(1);
    s.check("Pauli mixture equals the depolarizing definition", || {
        for _ in 0..50 {
            let p: f64 = rng.random();
            let rho = random_density(1, &mut rng);
            let d = dist(p);
            let mut mix = DMatrix::zeros(2, 2);
            for (k, &w) in d.iter().enumerate() {
                let m = single_pauli_matrix(1, 0, Pauli::ALL[k]);
                mix += &m * &rho * &m * C64::new(w, 0.0);
            }
            let diff = max_abs_diff(&mix, &ldn_by_definition(&rho, p));
            ensure(diff <= 1e-12, || format!("p = {p}: deviation {diff:e}"))?;
            let diff = max_abs_diff(&ldn_dense(&rho, 1, 0, p), &ldn_by_definition(&rho, p));
            ensure(diff <= 1e-12, || format!("dense channel, p = {p}: deviation {diff:e}"))?;
        }
        Ok(())
    });

    let mut rng = s.rng(2);
    s.check("composition D(p)D(q) = D(pq)", || {
        for _ in 0..100 {
            let (p, q): (f64, f64) = (rng.random(), rng.random());
            let lhs = pauli_channel_superoperator(&dist(p)) * pauli_channel_superoperator(&dist(q));
            let rhs = pauli_channel_superoperator(&dist(p * q));
            let diff = max_abs_diff(&lhs, &rhs);
            ensure(diff <= 1e-12, || format!("p = {p}, q = {q}: deviation {diff:e}"))?;
        }
        Ok(())
    });

    let mut rng = s.rng(3);
    s.check("noise exchange across a Bell projection", || {
        for _ in 0..20 {
            let rho = random_density(2, &mut rng);
            for _ in 0..3 {
                let p: f64 = rng.random();
                for bell in [(false, false), (false, true), (true, false), (true, true)] {
                    ensure(verify_noise_exchange(p, &rho, bell).map_err(err)?, || format!("p = {p}, {bell:?}"))?;
                }
            }
        }
        Ok(())
    });

    let mut rng = s.rng(4);
    s.check("sampling frequencies match (3p+1)/4", || {
        let p = 0.8;
        let d = dist(p);
        let expected = [(3.0 * p + 1.0) / 4.0, (1.0 - p) / 4.0, (1.0 - p) / 4.0, (1.0 - p) / 4.0];
        let k = 20_000;
        let mut counts = [0usize; 4];
        for _ in 0..k {
            let u: f64 = rng.random();
            let mut acc = 0.0;
            let mut idx = 3;
            for (i, &w) in d.iter().enumerate() {
                acc += w;
                if u < acc {
                    idx = i;
                    break;
                }
            }
            counts[idx] += 1;
        }
        for (c, e) in counts.iter().zip(expected) {
            let sigma = (k as f64 * e * (1.0 - e)).sqrt();
            ensure((*c as f64 - k as f64 * e).abs() <= 5.0 * sigma, || format!("{counts:?} vs {expected:?}"))?;
        }
        Ok(())
    });

    let mut rng = s.rng(5);
    s.check("compose_ldn is associative and matches channel composition", || {
        for _ in 0..100 {
            let (p, q, r): (f64, f64, f64) = (rng.random(), rng.random(), rng.random());
            let (lhs, rhs) = (compose_ldn(p, compose_ldn(q, r)), compose_ldn(compose_ldn(p, q), r));
            ensure((lhs - rhs).abs() < 1e-15, || format!("{lhs} vs {rhs}"))?;
            let two = pauli_channel_superoperator(&dist(p)) * pauli_channel_superoperator(&dist(q));
            let diff = max_abs_diff(&two, &pauli_channel_superoperator(&dist(compose_ldn(p, q))));
            ensure(diff <= 1e-12, || format!("p = {p}, q = {q}: deviation {diff:e}"))?;
        }
        Ok(())
    });

    let mut rng = s.rng(6);
    s.check("sampled noise on both halves of Φ+ gives (3q²+1)/4", || {
        let phi = bell_state(false, false);
        for q in [0.7, 0.9] {
            let d = dist(q);
            let k = 20_000;
            let mut fid = 0.0;
            for _ in 0..k {
                let mut psi = phi.clone();
                for qubit in 0..2 {
                    psi.apply_gate(&Gate::Pauli(qubit, draw_pauli(&d, &mut rng)));
                }
                fid += phi.overlap(&psi);
            }
            let f = fid / k as f64;
            let expect = fidelity_exact(q);
            let sigma = (expect * (1.0 - expect) / k as f64).sqrt();
            ensure((f - expect).abs() <= 5.0 * sigma, || format!("q = {q}: {f} vs {expect}"))?;
        }
        Ok(())
    });

    s.check("two-sided fidelity (3q²+1)/4", || {
        let phi = crate::noise::bell_projector(false, false);
        for k in 0..=10 {
            let q = k as f64 / 10.0;
            let rho = ldn_dense(&ldn_dense(&phi, 2, 0, q), 2, 1, q);
            let f = (&phi * &rho).trace().re;
            ensure((f - fidelity_exact(q)).abs() < 1e-12, || format!("q = {q}: {f}"))?;
        }
        Ok(())
    });

    s.finish()
}

pub fn resource_suite(seed: u64) -> SuiteReport {
    let mut s = Suite::new("resource", seed);

    s.check("plan invariants", || {
        for k in 0..30u64 {
            let n = 2 + (k as usize * 7) % 60;
            let m = 1 + (k as usize) % (n - 1);
            let plan = make_hashing_plan(n, m, seed ^ k).map_err(err)?;
            ensure(plan.rounds().len() == n - m, || "round count".into())?;
            HashingPlan::from_rounds(n, plan.rounds().to_vec(), plan.seed()).map_err(err)?;
            ensure(plan == make_hashing_plan(n, m, seed ^ k).map_err(err)?, || "not deterministic".into())?;
        }
        Ok(())
    });

    s.check("resource has n + m qubits", || {
        for n in 2..=12 {
            for m in [1, n / 2, n - 1] {
                if m == 0 || m >= n {
                    continue;
                }
                let plan = make_hashing_plan(n, m, seed + n as u64).map_err(err)?;
                let r = hashing_resource(&plan, Party::A).map_err(err)?;
                ensure(r.n_qubits() == n + m, || format!("N = {n}, M = {m}: {} qubits", r.n_qubits()))?;
                r.tableau().validate().map_err(err)?;
            }
        }
        Ok(())
    });

    let mut rng = s.rng(1);
    s.check("byproduct map is linear", || {
        let plan = make_hashing_plan(10, 4, seed).map_err(err)?;
        let r = hashing_resource(&plan, Party::B).map_err(err)?;
        let random_bits = |rng: &mut TrialRng| {
            let bits: Vec<bool> = (0..20).map(|_| rng.random()).collect();
            BitVec::from_bools(&bits)
        };
        for _ in 0..100 {
            let (x, y) = (random_bits(&mut rng), random_bits(&mut rng));
            let mut xy = x.clone();
            xy.xor_assign(&y);
            let (vx, fx) = r.decode(&x).map_err(err)?;
            let (vy, fy) = r.decode(&y).map_err(err)?;
            let (vxy, fxy) = r.decode(&xy).map_err(err)?;
            let mut v = vx;
            v.xor_assign(&vy);
            let mut f = fx;
            f.compose(&fy);
            ensure(v == vxy && f == fxy, || "decode(x ^ y) != decode(x) ^ decode(y)".into())?;
        }
        Ok(())
    });

    s.check("text serialization round trip", || {
        for k in 0..5 {
            let plan = make_hashing_plan(8 + k, 3, seed + k as u64).map_err(err)?;
            let r = hashing_resource(&plan, Party::A).map_err(err)?;
            let back = ResourceState::from_text(&r.to_text()).map_err(err)?;
            ensure(back.tableau().same_state(r.tableau()) && back.byproduct_map() == r.byproduct_map(), || {
                "round trip changed the resource".into()
            })?;
        }
        Ok(())
    });

    s.check("identity and Hadamard resources", || {
        let id = jamiolkowski_resource(&CliffordCircuit::new(1), Party::A).map_err(err)?;
        let mut phi = DenseState::zero(2).map_err(err)?;
        phi.apply_gate(&Gate::H(0));
        phi.apply_gate(&Gate::Cnot(0, 1));
        ensure(tableau_to_dense(id.tableau()).map_err(err)?.equal_up_to_phase(&phi, 1e-12), || "identity".into())?;
        let mut h = CliffordCircuit::new(1);
        h.push(Gate::H(0)).map_err(err)?;
        let hr = jamiolkowski_resource(&h, Party::A).map_err(err)?;
        phi.apply_gate(&Gate::H(1));
        ensure(tableau_to_dense(hr.tableau()).map_err(err)?.equal_up_to_phase(&phi, 1e-12), || "Hadamard".into())
    });

    let mut rng = s.rng(2);
    s.check("read-in teleports through the identity", || {
        let r = jamiolkowski_resource(&CliffordCircuit::new(1), Party::A).map_err(err)?;
        for _ in 0..20 {
            let input = tableau_for(&random_clifford_circuit(1, 6, &mut rng));
            let out = r.read_in(&input, &mut rng).map_err(err)?;
            let mut st = out.state;
            st.apply_pauli_operator(&out.frame.to_operator()).map_err(err)?;
            ensure(st.same_state(&input), || "teleported state differs".into())?;
        }
        Ok(())
    });

    s.finish()
}

/// Two-sample χ² homogeneity test; returns the p-value.
pub fn chi_square_homogeneity(a: &[usize], b: &[usize]) -> f64 {
    let (na, nb) = (a.iter().sum::<usize>() as f64, b.iter().sum::<usize>() as f64);
    let mut stat = 0.0;
    let mut bins = 0;
    for (&x, &y) in a.iter().zip(b) {
        let tot = (x + y) as f64;
        if tot == 0.0 {
            continue;
        }
        bins += 1;
        let ea = tot * na / (na + nb);
        let eb = tot * nb / (na + nb);
        stat += (x as f64 - ea).powi(2) / ea + (y as f64 - eb).powi(2) / eb;
    }
    if bins < 2 {
        return 1.0;
    }
    1.0 - ChiSquared::new((bins - 1) as f64).expect("positive dof").cdf(stat)
}

/// Transcript histograms of the explicit resource-noise path and the
/// moved-noise label path for one small plan.
pub fn noise_moving_histograms(
    plan: &HashingPlan,
    p: f64,
    q: f64,
    trials: usize,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>), String> {
    let n = plan.n_pairs();
    let bins = 1usize << plan.rounds().len();
    let ra = hashing_resource(plan, Party::A).map_err(err)?;
    let rb = hashing_resource(plan, Party::B).map_err(err)?;
    let checks = ParityChecks::from_plan(plan);
    let input = BellDistribution::from_ldn(q).map_err(err)?;
    let moved = BellDistribution::from_ldn(p * q).map_err(err)?;
    let index = |t: &BitVec| t.iter_ones().map(|i| 1usize << i).sum::<usize>();
    let mut explicit = vec![0; bins];
    let mut composed = vec![0; bins];
    let mut rng = trial_rng(seed, 0, Purpose::Test);
    for _ in 0..trials {
        let e = sample_ensemble(&input, n, &mut rng);
        let run = run_with_resources(&ra, &rb, &e.labels, Some(p), &mut rng).map_err(err)?;
        explicit[index(&run.transcript)] += 1;
        let e2 = sample_ensemble(&moved, n, &mut rng);
        composed[index(&checks.transcript(&e2.labels))] += 1;
    }
    Ok((explicit, composed))
}

pub fn engine_suite(seed: u64) -> SuiteReport {
    let mut s = Suite::new("engine", seed);

    let mut rng = s.rng(1);
    s.check("tableau simulation equals label propagation", || {
        for k in 0..40u64 {
            let n = 2 + (k as usize % 7);
            let m = 1 + (k as usize % (n - 1));
            let plan = make_hashing_plan(n, m, seed ^ (k << 8)).map_err(err)?;
            let checks = ParityChecks::from_plan(&plan);
            let labels: Vec<BellLabel> = (0..n).map(|_| BellLabel::from_index(rng.random_range(0..4))).collect();
            let run = tableau_bilateral_run(&plan, &labels, None, &mut rng).map_err(err)?;
            ensure(run.transcript == checks.transcript(&labels), || format!("transcript, N = {n}"))?;
            ensure(run.output_labels == checks.output_labels(&labels), || format!("outputs, N = {n}"))?;
        }
        Ok(())
    });

    let mut rng = s.rng(2);
    s.check("read-in transcripts equal gate-based transcripts", || {
        for k in 0..60u64 {
            let n = 2 + (k as usize % 15);
            let m = 1 + (k as usize % (n - 1));
            let plan = make_hashing_plan(n, m, seed ^ (k << 16)).map_err(err)?;
            let planted: Vec<BellLabel> = (0..n).map(|_| BellLabel::from_index(rng.random_range(0..4))).collect();
            let mut labels = planted.clone();
            let gate = simulate_bilateral(&plan, &mut labels, |_, _, _| {});
            let run = tableau_bilateral_run(&plan, &planted, None, &mut rng).map_err(err)?;
            ensure(gate == run.transcript, || format!("N = {n}, M = {m}"))?;
        }
        Ok(())
    });

    s.check("resource noise moves onto the inputs", || {
        let plan = make_hashing_plan(4, 2, seed).map_err(err)?;
        let (a, b) = noise_moving_histograms(&plan, 0.85, 0.9, 2000, seed)?;
        let pv = chi_square_homogeneity(&a, &b);
        ensure(pv > 1e-3, || format!("χ² p-value {pv:e}: {a:?} vs {b:?}"))
    });

    let mut rng = s.rng(3);
    s.check("Werner label frequencies", || {
        let d = BellDistribution::werner(0.9).map_err(err)?;
        let n = 100_000;
        let e = sample_ensemble(&d, n, &mut rng);
        let mut counts = [0usize; 4];
        for l in &e.labels {
            counts[l.index()] += 1;
        }
        for (c, p) in counts.iter().zip(d.probs()) {
            let sigma = (n as f64 * p * (1.0 - p)).sqrt();
            ensure((*c as f64 - n as f64 * p).abs() <= 5.0 * sigma, || format!("{counts:?}"))?;
        }
        Ok(())
    });

    s.check("safe output count", || {
        let w = BellDistribution::werner(0.95).map_err(err)?;
        let m = safe_output_count(1024, &w, 0.1).map_err(err)?;
        ensure(m == 547, || format!("M = {m}"))?;
        ensure(safe_output_count(1024, &BellDistribution::werner(0.81).map_err(err)?, 0.0).is_err(), || {
            "F = 0.81 accepted".into()
        })
    });

    s.check("decoding improves with more rounds", || {
        let d = BellDistribution::werner(0.95).map_err(err)?;
        let dec = DecoderConfig::default();
        let trials = 150;
        let mut rates = Vec::new();
        for m in [12, 9, 6, 3] {
            let mut ok = 0;
            for t in 0..trials as u64 {
                let protocol = Protocol::random(16, m, seed ^ (t << 4) ^ m as u64).map_err(err)?;
                let mut rng = trial_rng(seed, t, Purpose::Decoder);
                let e = sample_ensemble(&d, 16, &mut rng);
                let tr = protocol.checks.transcript(&e.labels);
                ok += decode_success(&tr, &protocol.checks, &d, &e.labels, &dec, &mut rng).map_err(err)? as usize;
            }
            rates.push(ok as f64 / trials as f64);
        }
        for w in rates.windows(2) {
            let sigma = ((w[0] * (1.0 - w[0]) + w[1] * (1.0 - w[1])) / trials as f64).sqrt();
            ensure(w[1] >= w[0] - 3.0 * sigma, || format!("rates {rates:?}"))?;
        }
        ensure(rates[3] > rates[0], || format!("rates {rates:?}"))
    });

    s.check("noiseless runs are perfect", || {
        let cfg = TrialConfig {
            n: 64,
            m: 30,
            input: BellDistribution::werner(1.0).map_err(err)?,
            execution: Execution::MeasurementBased { p: 1.0 },
            trials: 10,
            seed,
            decoder: DecoderConfig::default(),
        };
        let r = run_trials(&cfg).map_err(err)?;
        ensure(r.decode_success_rate == 1.0 && r.mean_output_fidelity == 1.0, || format!("{r:?}"))
    });

    s.finish()
}

pub fn analytics_suite(seed: u64) -> SuiteReport {
    let mut s = Suite::new("analytics", seed);

    s.check("a1 decreasing on [0.8, 1], zero at q = 1", || {
        for f in [a1_1d, a1_2d] {
            let mut prev = f64::INFINITY;
            for k in 0..=2000 {
                let q = 0.8 + 0.2 * k as f64 / 2000.0;
                let a = f(q).map_err(err)?;
                ensure(a < prev, || format!("not decreasing at q = {q}"))?;
                prev = a;
            }
            ensure(f(1.0).map_err(err)? == 0.0, || "a1(1) != 0".into())?;
        }
        Ok(())
    });

    s.check("cluster yield increasing above threshold", || {
        for d in [Dimension::One, Dimension::Two] {
            let q0 = analytics::q_min_cluster(d).map_err(err)?;
            let mut prev = f64::NEG_INFINITY;
            for k in 0..=1000 {
                let q = q0 + (1.0 - q0) * k as f64 / 1000.0;
                let y = cluster_yield(q, d).map_err(err)?.raw;
                ensure(y > prev, || format!("{d:?} not increasing at q = {q}"))?;
                prev = y;
            }
        }
        Ok(())
    });

    s.check("tolerable noise percentages", || {
        let want = [(Target::Bell, 6.9), (Target::Cluster1d, 4.1), (Target::Cluster2d, 2.5)];
        for (t, pct) in want {
            let r = analytics::threshold_report(t, Convention::PaperProduct);
            let got = (r.tolerable_noise * 1000.0).round() / 10.0;
            ensure((got - pct).abs() < 1e-9, || format!("{t}: {got}%"))?;
        }
        Ok(())
    });

    s.check("feasibility boundary at p_min", || {
        let q_min = analytics::q_min_bell(Convention::PaperProduct);
        let (p_min, _) = p_min_from_qmin(q_min).map_err(err)?;
        let grid = |p: f64| -> Result<bool, String> {
            for k in 0..10_000 {
                if feasibility(p, k as f64 / 9999.0, q_min).map_err(err)? {
                    return Ok(true);
                }
            }
            Ok(false)
        };
        ensure(grid(p_min + 1e-3)?, || "no feasible q above p_min".into())?;
        ensure(!grid(p_min - 1e-3)?, || "feasible q below p_min".into())
    });

    let mut rng = s.rng(1);
    s.check("1D polynomial closed form", || {
        for _ in 0..1000 {
            let q: f64 = rng.random();
            let pt = analytics::p_tilde(q);
            let e = (1.0 - pt) / 3.0;
            let diff = (a1_1d(q).map_err(err)? - 6.0 * e * (pt + e).powi(2)).abs();
            ensure(diff < 1e-12, || format!("q = {q}"))?;
        }
        Ok(())
    });

    s.check("hashing threshold agrees with Monte Carlo", || {
        let f_min = analytics::f_min_hashing();
        let n = 1024;
        let dec = DecoderConfig::default();
        let above = BellDistribution::werner(f_min + 0.05).map_err(err)?;
        let below = BellDistribution::werner(f_min - 0.05).map_err(err)?;
        let m = safe_output_count(n, &above, 0.05).map_err(err)?;
        let rate = |input: BellDistribution| -> Result<f64, String> {
            let cfg = TrialConfig {
                n,
                m,
                input,
                execution: Execution::MeasurementBased { p: 1.0 },
                trials: 40,
                seed,
                decoder: DecoderConfig {
                    impostor_draws: 1000,
                    ..dec
                },
            };
            Ok(run_trials(&cfg).map_err(err)?.decode_success_rate)
        };
        let (hi, lo) = (rate(above)?, rate(below)?);
        ensure(hi >= 0.5 && lo <= 0.05, || format!("success {hi} above, {lo} below"))
    });

    s.finish()
}
