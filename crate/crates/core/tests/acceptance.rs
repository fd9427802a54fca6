//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line
//! (written straight to stdout so it survives output capture); the test
//! fails if any criterion fails.

use std::io::Write;
use std::time::{Duration, Instant};

use mbhash_core::analytics::{
    f_min_hashing, hashing_yield, q_min_bell, q_min_cluster, threshold_report, Convention, Dimension, Target,
};
use mbhash_core::dense::{max_abs_diff, random_density};
use mbhash_core::engine::oracle::{run_with_resources, tableau_bilateral_run};
use mbhash_core::engine::{
    decodable_output_count, run_trials, safe_output_count, simulate_bilateral, BellDistribution, BellLabel,
    DecoderConfig, Execution, ParityChecks, TrialConfig, TrialSummary,
};
use mbhash_core::noise::{compose_ldn, fidelity_exact, ldn_superoperator, verify_noise_exchange};
use mbhash_core::resource::{hashing_resource, make_hashing_plan, Party};
use mbhash_core::rng::{trial_rng, Purpose};
use mbhash_core::selftest::{run_all, SelftestOptions};
use rand::Rng;

type Outcome = Result<String, String>;

fn check(cond: bool, detail: String) -> Outcome {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

struct Harness {
    failed: Vec<usize>,
}

impl Harness {
    fn run(&mut self, id: usize, title: &str, limit: Duration, f: impl FnOnce() -> Outcome) {
        let start = Instant::now();
        let result = f();
        let elapsed = start.elapsed();
        let (pass, mut detail) = match result {
            Ok(d) => (true, d),
            Err(d) => (false, d),
        };
        let in_time = elapsed <= limit;
        if !in_time {
            detail.push_str(&format!("; over time limit {limit:?}"));
        }
        let pass = pass && in_time;
        if !pass {
            self.failed.push(id);
        }
        let tag = if pass { "PASS" } else { "FAIL" };
        let line = format!("{tag} criterion {id:>2} {title}: {detail} [{:.2}s]\n", elapsed.as_secs_f64());
        std::io::stdout().write_all(line.as_bytes()).unwrap();
    }
}

fn trials(n: usize, m: usize, input: BellDistribution, execution: Execution, count: usize, seed: u64) -> TrialSummary {
    run_trials(&TrialConfig {
        n,
        m,
        input,
        execution,
        trials: count,
        seed,
        decoder: DecoderConfig::default(),
    })
    .unwrap()
}

fn c1_hashing_threshold() -> Outcome {
    let f = f_min_hashing();
    check((f - 0.8107).abs() <= 2e-4, format!("F_min = {f:.6}"))
}

fn c2_bell_threshold() -> Outcome {
    let r = threshold_report(Target::Bell, Convention::PaperProduct);
    let e = threshold_report(Target::Bell, Convention::Exact);
    let pct = 100.0 * r.tolerable_noise;
    check(
        (r.q_min - 0.8672).abs() <= 5e-4 && (pct - 6.9).abs() <= 0.1 && (q_min_bell(Convention::Exact) - 0.8646).abs() <= 5e-4,
        format!(
            "paper_product q_min = {:.5}, noise = {pct:.3}%; exact q_min = {:.5}, noise = {:.3}%",
            r.q_min,
            e.q_min,
            100.0 * e.tolerable_noise
        ),
    )
}

fn c3_cluster_thresholds() -> Outcome {
    let q1 = q_min_cluster(Dimension::One).map_err(|e| e.to_string())?;
    let q2 = q_min_cluster(Dimension::Two).map_err(|e| e.to_string())?;
    let t1 = 100.0 * threshold_report(Target::Cluster1d, Convention::PaperProduct).tolerable_noise;
    let t2 = 100.0 * threshold_report(Target::Cluster2d, Convention::PaperProduct).tolerable_noise;
    check(
        (q1 - 0.9204).abs() <= 1e-3 && (q2 - 0.9515).abs() <= 1e-3 && (t1 - 4.1).abs() <= 0.1 && (t2 - 2.5).abs() <= 0.1,
        format!("1D q_min = {q1:.5} ({t1:.3}%), 2D q_min = {q2:.5} ({t2:.3}%)"),
    )
}

fn c4_noise_exchange() -> Outcome {
    let mut rng = trial_rng(4, 0, Purpose::Test);
    let mut checked = 0;
    for _ in 0..100 {
        let rho = random_density(2, &mut rng);
        for _ in 0..10 {
            let p: f64 = rng.random();
            for bell in [(false, false), (false, true), (true, false), (true, true)] {
                if !verify_noise_exchange(p, &rho, bell).map_err(|e| e.to_string())? {
                    return Err(format!("mismatch at p = {p}, projector {bell:?}"));
                }
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} (state, p, projector) cases agree to 1e-12"))
}

fn c5_composition() -> Outcome {
    let mut rng = trial_rng(5, 0, Purpose::Test);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let (p, q): (f64, f64) = (rng.random(), rng.random());
        let lhs = ldn_superoperator(p) * ldn_superoperator(q);
        worst = worst.max(max_abs_diff(&lhs, &ldn_superoperator(compose_ldn(p, q))));
    }
    check(worst <= 1e-12, format!("max deviation {worst:.2e} over 100 (p, q)"))
}

fn c6_cross_implementation() -> Outcome {
    for seed in 0..1000u64 {
        let mut rng = trial_rng(seed, 6, Purpose::Test);
        let n = 2 + (seed as usize % 15);
        let m = rng.random_range(1..n);
        let plan = make_hashing_plan(n, m, seed).map_err(|e| e.to_string())?;
        let planted: Vec<BellLabel> = (0..n).map(|_| BellLabel::from_index(rng.random_range(0..4))).collect();
        let mut labels = planted.clone();
        let gate = simulate_bilateral(&plan, &mut labels, |_, _, _| {});
        let ra = hashing_resource(&plan, Party::A).map_err(|e| e.to_string())?;
        let rb = hashing_resource(&plan, Party::B).map_err(|e| e.to_string())?;
        let run = run_with_resources(&ra, &rb, &planted, None, &mut rng).map_err(|e| e.to_string())?;
        if run.transcript != gate {
            return Err(format!("read-in vs gate-based transcript differs at seed {seed} (N = {n}, M = {m})"));
        }
    }
    for seed in 0..200u64 {
        let mut rng = trial_rng(seed, 66, Purpose::Test);
        let n = 2 + (seed as usize % 7);
        let m = rng.random_range(1..n);
        let plan = make_hashing_plan(n, m, seed).map_err(|e| e.to_string())?;
        let checks = ParityChecks::from_plan(&plan);
        let labels: Vec<BellLabel> = (0..n).map(|_| BellLabel::from_index(rng.random_range(0..4))).collect();
        let run = tableau_bilateral_run(&plan, &labels, None, &mut rng).map_err(|e| e.to_string())?;
        if run.transcript != checks.transcript(&labels) || run.output_labels != checks.output_labels(&labels) {
            return Err(format!("tableau vs labels differ at seed {seed} (N = {n})"));
        }
    }
    Ok("1000 seeds read-in = gate-based (N <= 16); 200 seeds tableau = labels (N <= 8)".into())
}

fn c7_output_fidelity() -> Outcome {
    let (p, q, n) = (0.98, 0.99, 1024);
    let input = BellDistribution::from_ldn(q).map_err(|e| e.to_string())?;
    let effective = BellDistribution::from_ldn(compose_ldn(p, q)).map_err(|e| e.to_string())?;
    let m = safe_output_count(n, &effective, 0.1).map_err(|e| e.to_string())?;
    let s = trials(n, m, input, Execution::MeasurementBased { p }, 400, 2026);
    let predicted = fidelity_exact(p);
    let z = (s.mean_output_fidelity - predicted) / s.fidelity_std_error;
    check(
        z.abs() <= 3.0 && s.decode_success_rate >= 0.95,
        format!(
            "M = {m}, fidelity {:.5} ± {:.5} vs {predicted:.5} (z = {z:.2}), decode success {:.3}",
            s.mean_output_fidelity, s.fidelity_std_error, s.decode_success_rate
        ),
    )
}

fn c8_gate_based_failure() -> Outcome {
    let w = BellDistribution::werner(0.95).map_err(|e| e.to_string())?;
    let mut gate = Vec::new();
    for (n, count) in [(64, 2000), (256, 2000), (1024, 1000)] {
        let m = safe_output_count(n, &w, 0.1).map_err(|e| e.to_string())?;
        gate.push((n, trials(n, m, w, Execution::GateBased { gate_noise: 0.995 }, count, 4)));
    }
    let p = 0.995;
    let pair = BellDistribution::single_particle_ldn(p).map_err(|e| e.to_string())?;
    let effective = w.convolve(&pair).convolve(&pair);
    let mut mb = Vec::new();
    for n in [64, 256, 1024] {
        let m = safe_output_count(n, &effective, 0.1).map_err(|e| e.to_string())?;
        mb.push((n, trials(n, m, w, Execution::MeasurementBased { p }, 400, 4)));
    }
    let increasing = gate.windows(2).all(|x| x[1].1.output_error_rate() > x[0].1.output_error_rate());
    let mut flat = true;
    for (i, a) in mb.iter().enumerate() {
        for b in &mb[i + 1..] {
            let sigma = (a.1.fidelity_std_error.powi(2) + b.1.fidelity_std_error.powi(2)).sqrt();
            flat &= (a.1.mean_output_fidelity - b.1.mean_output_fidelity).abs() <= 3.0 * sigma;
        }
    }
    let gate_str: Vec<String> = gate
        .iter()
        .map(|(n, s)| format!("N={n}: {:.4}±{:.4}", s.output_error_rate(), s.fidelity_std_error))
        .collect();
    let mb_str: Vec<String> = mb
        .iter()
        .map(|(n, s)| format!("N={n}: {:.5}±{:.5}", s.mean_output_fidelity, s.fidelity_std_error))
        .collect();
    check(
        increasing && flat,
        format!(
            "gate-based error rate [{}]; measurement-based fidelity [{}] vs {:.5}",
            gate_str.join(", "),
            mb_str.join(", "),
            fidelity_exact(p)
        ),
    )
}

fn c9_yield_trend() -> Outcome {
    let w = BellDistribution::werner(0.95).map_err(|e| e.to_string())?;
    let asymptotic = hashing_yield(0.95).map_err(|e| e.to_string())?.raw;
    let n = 1024;
    let m = decodable_output_count(n, &w, 200, 0.95, 1, &DecoderConfig::default()).map_err(|e| e.to_string())?;
    let ratio = m as f64 / n as f64;
    check(
        (asymptotic - 0.6344).abs() < 1e-4 && ratio >= asymptotic - 0.15 && ratio <= asymptotic,
        format!("M/N = {m}/{n} = {ratio:.4}, 1 - S(W) = {asymptotic:.4}"),
    )
}

fn c10_resource_size() -> Outcome {
    let mut tested = 0;
    for n in 2..=24 {
        for m in 1..n {
            let plan = make_hashing_plan(n, m, (n * 100 + m) as u64).map_err(|e| e.to_string())?;
            for party in [Party::A, Party::B] {
                let r = hashing_resource(&plan, party).map_err(|e| e.to_string())?;
                if r.n_qubits() != n + m {
                    return Err(format!("N = {n}, M = {m}: {} qubits", r.n_qubits()));
                }
                tested += 1;
            }
        }
    }
    Ok(format!("{tested} resources, all with N + M qubits"))
}

fn c11_selftest() -> Outcome {
    let report = run_all(&SelftestOptions::default());
    let summary: Vec<String> = report
        .suites
        .iter()
        .map(|s| format!("{} {}/{} ({:.2}s)", s.name, s.checks - s.failures.len(), s.checks, s.elapsed.as_secs_f64()))
        .collect();
    let failures: Vec<String> = report.suites.iter().flat_map(|s| s.failures.clone()).collect();
    let mut detail = summary.join(", ");
    if !failures.is_empty() {
        detail.push_str(&format!("; failures: {}", failures.join(" | ")));
    }
    check(report.passed(), detail)
}

#[test]
fn acceptance() {
    let mut h = Harness { failed: Vec::new() };
    let s = Duration::from_secs;
    h.run(1, "hashing fidelity threshold", s(1), c1_hashing_threshold);
    h.run(2, "Bell-pair noise threshold", s(1), c2_bell_threshold);
    h.run(3, "cluster-state thresholds", s(1), c3_cluster_thresholds);
    h.run(4, "noise exchange", s(5), c4_noise_exchange);
    h.run(5, "LDN composition", s(5), c5_composition);
    h.run(6, "cross-implementation equivalence", s(120), c6_cross_implementation);
    h.run(7, "Monte Carlo output fidelity", s(300), c7_output_fidelity);
    h.run(8, "gate-based failure trend", s(600), c8_gate_based_failure);
    h.run(9, "yield trend", s(300), c9_yield_trend);
    h.run(10, "resource size", s(1), c10_resource_size);
    h.run(11, "property suites", s(60), c11_selftest);
    assert!(h.failed.is_empty(), "failed criteria: {:?}", h.failed);
}
