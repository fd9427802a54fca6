use rand::Rng;
use rayon::prelude::*;

use crate::gf2::BitVec;
use crate::noise::{draw_pauli, ldn_single_qubit_distribution};
use crate::resource::{make_hashing_plan, HashingPlan};
use crate::rng::{trial_rng, Purpose};

use super::checks::{simulate_bilateral, ParityChecks};
use super::decode::{decode_success, DecoderConfig};
use super::ensemble::{sample_ensemble, BellDiagonalEnsemble, BellDistribution, BellLabel};
use super::EngineError;

/// A plan together with its linear description.
#[derive(Debug, Clone)]
pub struct Protocol {
    pub plan: HashingPlan,
    pub checks: ParityChecks,
}

impl Protocol {
    pub fn new(plan: HashingPlan) -> Self {
        let checks = ParityChecks::from_plan(&plan);
        Self { plan, checks }
    }

    pub fn random(n: usize, m: usize, seed: u64) -> Result<Self, EngineError> {
        Ok(Self::new(make_hashing_plan(n, m, seed)?))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PurificationOutcome {
    /// The decoder identified the true input string.
    pub decoded: bool,
    pub surviving_outputs: usize,
    /// Per output: `Φ+` after the correction implied by the true inputs.
    pub output_good: Vec<bool>,
    pub transcript: BitVec,
}

impl PurificationOutcome {
    pub fn output_fidelity(&self) -> f64 {
        if self.output_good.is_empty() {
            return 0.0;
        }
        self.output_good.iter().filter(|&&g| g).count() as f64 / self.output_good.len() as f64
    }
}

/// Label flip from `D(p)` acting on both particles of a pair.
fn pair_noise<R: Rng + ?Sized>(dist: &[f64; 4], rng: &mut R) -> BellLabel {
    BellLabel::from_pauli(draw_pauli(dist, rng)) ^ BellLabel::from_pauli(draw_pauli(dist, rng))
}

fn check_sizes(protocol: &Protocol, ensemble: &BellDiagonalEnsemble) -> Result<(), EngineError> {
    if ensemble.len() != protocol.plan.n_pairs() {
        return Err(EngineError::SizeMismatch {
            expected: protocol.plan.n_pairs(),
            found: ensemble.len(),
        });
    }
    Ok(())
}

/// Gate-based hashing: bilateral CNOTs on the label representation, with
/// `D(gate_noise)` on all four particles after each bilateral gate.
pub fn run_gate_based<R: Rng + ?Sized>(
    protocol: &Protocol,
    ensemble: &BellDiagonalEnsemble,
    gate_noise: f64,
    decoder: &DecoderConfig,
    rng: &mut R,
) -> Result<PurificationOutcome, EngineError> {
    check_sizes(protocol, ensemble)?;
    let dist = ldn_single_qubit_distribution(gate_noise)?;
    let mut labels = ensemble.labels.clone();
    let transcript = if gate_noise < 1.0 {
        simulate_bilateral(&protocol.plan, &mut labels, |l, c, t| {
            l[c] = l[c] ^ pair_noise(&dist, rng);
            l[t] = l[t] ^ pair_noise(&dist, rng);
        })
    } else {
        simulate_bilateral(&protocol.plan, &mut labels, |_, _, _| {})
    };
    let predicted = protocol.checks.output_labels(&ensemble.labels);
    let output_good = protocol
        .plan
        .surviving_pairs()
        .iter()
        .zip(&predicted)
        .map(|(&i, &p)| labels[i] == p)
        .collect();
    let decoded = decode_success(&transcript, &protocol.checks, &ensemble.distribution, &ensemble.labels, decoder, rng)?;
    Ok(PurificationOutcome {
        decoded,
        surviving_outputs: protocol.plan.n_output(),
        output_good,
        transcript,
    })
}

/// Measurement-based hashing with resource noise `D(p)` per particle.
///
/// The resource noise on the input ports is moved onto the incoming pairs
/// (their parameter becomes `p·q`), the plan then runs noiselessly, and the
/// resource noise on the outputs is applied last.
pub fn run_measurement_based<R: Rng + ?Sized>(
    protocol: &Protocol,
    ensemble: &BellDiagonalEnsemble,
    p: f64,
    decoder: &DecoderConfig,
    rng: &mut R,
) -> Result<PurificationOutcome, EngineError> {
    check_sizes(protocol, ensemble)?;
    let dist = ldn_single_qubit_distribution(p)?;
    let noisy_inputs: Vec<BellLabel> = ensemble.labels.iter().map(|&l| l ^ pair_noise(&dist, rng)).collect();
    let mut labels = noisy_inputs.clone();
    let transcript = simulate_bilateral(&protocol.plan, &mut labels, |_, _, _| {});
    let predicted = protocol.checks.output_labels(&noisy_inputs);
    let output_good = protocol
        .plan
        .surviving_pairs()
        .iter()
        .zip(&predicted)
        .map(|(&i, &pred)| (labels[i] ^ pair_noise(&dist, rng)) == pred)
        .collect();
    let pair = BellDistribution::single_particle_ldn(p)?;
    let prior = ensemble.distribution.convolve(&pair).convolve(&pair);
    let decoded = decode_success(&transcript, &protocol.checks, &prior, &noisy_inputs, decoder, rng)?;
    Ok(PurificationOutcome {
        decoded,
        surviving_outputs: protocol.plan.n_output(),
        output_good,
        transcript,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Execution {
    MeasurementBased { p: f64 },
    GateBased { gate_noise: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialConfig {
    pub n: usize,
    pub m: usize,
    /// Distribution of the incoming pairs.
    pub input: BellDistribution,
    pub execution: Execution,
    pub trials: usize,
    pub seed: u64,
    pub decoder: DecoderConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialSummary {
    pub trials: usize,
    pub decode_successes: usize,
    pub decode_success_rate: f64,
    /// Mean over trials of the fraction of good outputs.
    pub mean_output_fidelity: f64,
    /// Standard error of `mean_output_fidelity` across trials.
    pub fidelity_std_error: f64,
}

impl TrialSummary {
    pub fn output_error_rate(&self) -> f64 {
        1.0 - self.mean_output_fidelity
    }
}

/// One trial: its own plan, ensemble and noise streams, all derived from
/// `(seed, trial)`.
pub fn run_trial(config: &TrialConfig, trial: u64) -> Result<PurificationOutcome, EngineError> {
    let plan_seed: u64 = trial_rng(config.seed, trial, Purpose::Plan).random();
    let protocol = Protocol::random(config.n, config.m, plan_seed)?;
    let ensemble = sample_ensemble(&config.input, config.n, &mut trial_rng(config.seed, trial, Purpose::Ensemble));
    let mut rng = trial_rng(config.seed, trial, Purpose::Noise);
    match config.execution {
        Execution::MeasurementBased { p } => run_measurement_based(&protocol, &ensemble, p, &config.decoder, &mut rng),
        Execution::GateBased { gate_noise } => run_gate_based(&protocol, &ensemble, gate_noise, &config.decoder, &mut rng),
    }
}

/// Runs all trials in parallel and folds the results in trial order, so the
/// summary does not depend on scheduling.
pub fn run_trials(config: &TrialConfig) -> Result<TrialSummary, EngineError> {
    if config.trials == 0 {
        return Err(EngineError::NoTrials);
    }
    let outcomes: Vec<PurificationOutcome> = (0..config.trials as u64)
        .into_par_iter()
        .map(|t| run_trial(config, t))
        .collect::<Result<_, _>>()?;
    Ok(summarize(&outcomes))
}

pub fn summarize(outcomes: &[PurificationOutcome]) -> TrialSummary {
    let t = outcomes.len();
    let successes = outcomes.iter().filter(|o| o.decoded).count();
    let fids: Vec<f64> = outcomes.iter().map(PurificationOutcome::output_fidelity).collect();
    let mean = fids.iter().sum::<f64>() / t as f64;
    let var = if t > 1 {
        fids.iter().map(|f| (f - mean).powi(2)).sum::<f64>() / (t - 1) as f64
    } else {
        0.0
    };
    TrialSummary {
        trials: t,
        decode_successes: successes,
        decode_success_rate: successes as f64 / t as f64,
        mean_output_fidelity: mean,
        fidelity_std_error: (var / t as f64).sqrt(),
    }
}

/// Largest `M` whose noiseless measurement-based decode success rate is at
/// least `threshold`, found by bisection on `M ∈ [1, N−1]`.
pub fn decodable_output_count(
    n: usize,
    input: &BellDistribution,
    trials: usize,
    threshold: f64,
    seed: u64,
    decoder: &DecoderConfig,
) -> Result<usize, EngineError> {
    let rate = |m: usize| -> Result<f64, EngineError> {
        let cfg = TrialConfig {
            n,
            m,
            input: *input,
            execution: Execution::MeasurementBased { p: 1.0 },
            trials,
            seed,
            decoder: *decoder,
        };
        Ok(run_trials(&cfg)?.decode_success_rate)
    };
    if rate(1)? < threshold {
        return Ok(0);
    }
    let (mut lo, mut hi) = (1, n - 1);
    if rate(hi)? >= threshold {
        return Ok(hi);
    }
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if rate(mid)? >= threshold {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::ensemble::sample_ensemble;

    fn cfg(execution: Execution, f: f64) -> TrialConfig {
        TrialConfig {
            n: 64,
            m: 20,
            input: BellDistribution::werner(f).unwrap(),
            execution,
            trials: 20,
            seed: 7,
            decoder: DecoderConfig::default(),
        }
    }

    #[test]
    fn noiseless_runs_are_perfect() {
        for exec in [Execution::MeasurementBased { p: 1.0 }, Execution::GateBased { gate_noise: 1.0 }] {
            let s = run_trials(&cfg(exec, 1.0)).unwrap();
            assert_eq!(s.decode_success_rate, 1.0);
            assert_eq!(s.mean_output_fidelity, 1.0);
        }
    }

    #[test]
    fn gate_and_measurement_transcripts_agree_without_noise() {
        let d = BellDistribution::werner(0.8).unwrap();
        for seed in 0..20 {
            let protocol = Protocol::random(16, 5, seed).unwrap();
            let e = sample_ensemble(&d, 16, &mut trial_rng(seed, 0, Purpose::Test));
            let mut rng = trial_rng(seed, 1, Purpose::Test);
            let dec = DecoderConfig::default();
            let g = run_gate_based(&protocol, &e, 1.0, &dec, &mut rng).unwrap();
            let m = run_measurement_based(&protocol, &e, 1.0, &dec, &mut rng).unwrap();
            assert_eq!(g.transcript, m.transcript);
            assert_eq!(g.transcript, protocol.checks.transcript(&e.labels));
            assert!(g.output_good.iter().all(|&x| x));
        }
    }

    #[test]
    fn summaries_are_reproducible() {
        let c = cfg(Execution::MeasurementBased { p: 0.97 }, 0.95);
        assert_eq!(run_trials(&c).unwrap(), run_trials(&c).unwrap());
    }

    #[test]
    fn size_mismatch_is_rejected() {
        let protocol = Protocol::random(8, 3, 0).unwrap();
        let e = sample_ensemble(&BellDistribution::werner(1.0).unwrap(), 7, &mut trial_rng(0, 0, Purpose::Test));
        let r = run_gate_based(&protocol, &e, 1.0, &DecoderConfig::default(), &mut trial_rng(0, 0, Purpose::Test));
        assert!(matches!(r, Err(EngineError::SizeMismatch { .. })));
    }
}
