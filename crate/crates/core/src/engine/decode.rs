//! Maximum-likelihood decoding of hashing transcripts.
//!
//! Small ensembles are decoded exactly by branch-and-bound enumeration of
//! every label string within a relative likelihood cutoff of the most likely
//! string. Large ensembles cannot be enumerated; there, success is scored
//! with full knowledge of the true string:
//!
//! 1. the true string must satisfy every parity check;
//! 2. none of `impostor_draws` strings sampled from the prior may be a
//!    different consistent string that is at least as likely;
//! 3. the number of such impostors expected for random parity checks of the
//!    same ranks must be small: success is drawn with probability `e^{-E}`.
//!
//! Step 2 alone almost never fires once more than a few dozen checks are
//! revealed, so step 3 carries the finite-size information.

use rand::seq::index::sample as sample_indices;
use rand::Rng;
use rand_distr::{Binomial, Distribution};

use crate::gf2::BitVec;
use crate::resource::ParityType;

use super::checks::ParityChecks;
use super::ensemble::{label_bits, BellDistribution, BellLabel};
use super::EngineError;

/// Largest ensemble handled by exhaustive enumeration.
pub const MAX_EXHAUSTIVE_PAIRS: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecoderConfig {
    /// Relative likelihood below which strings are not enumerated.
    pub cutoff: f64,
    /// Prior samples tested as impostors by the large-N criterion.
    pub impostor_draws: usize,
    /// Ensembles up to this size are decoded exhaustively.
    pub exhaustive_max_pairs: usize,
}

impl Default for DecoderConfig {
    fn default() -> Self {
        Self {
            cutoff: 1e-6,
            impostor_draws: 10_000,
            exhaustive_max_pairs: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Decoded {
    Unique(Vec<BellLabel>),
    /// Two or more consistent strings share the highest likelihood.
    Ambiguous,
    /// No enumerated string satisfies the transcript.
    Inconsistent,
}

fn check_transcript(transcript: &BitVec, checks: &ParityChecks) -> Result<(), EngineError> {
    if transcript.len() != checks.n_rounds() {
        return Err(EngineError::TranscriptLength {
            expected: checks.n_rounds(),
            found: transcript.len(),
        });
    }
    Ok(())
}

/// Exhaustive maximum-likelihood decoding for `N ≤ MAX_EXHAUSTIVE_PAIRS`.
pub fn decode_ml(
    transcript: &BitVec,
    checks: &ParityChecks,
    distribution: &BellDistribution,
    cutoff: f64,
) -> Result<Decoded, EngineError> {
    check_transcript(transcript, checks)?;
    let n = checks.n_pairs();
    if n > MAX_EXHAUSTIVE_PAIRS {
        return Err(EngineError::TooLargeForExhaustive(n));
    }
    // Syndrome contribution of each label bit as a bit mask over rounds.
    let rounds = checks.n_rounds();
    let mut col_a = vec![0u64; n];
    let mut col_b = vec![0u64; n];
    for (r, (ty, row)) in checks.rounds().iter().enumerate() {
        let cols = match ty {
            ParityType::Amplitude => &mut col_a,
            ParityType::Phase => &mut col_b,
        };
        for i in row.iter_ones() {
            cols[i] |= 1 << r;
        }
    }
    let target: u64 = (0..rounds).filter(|&r| transcript.get(r)).map(|r| 1u64 << r).sum();

    let mut options: Vec<(usize, f64)> = (0..4)
        .filter(|&i| distribution.probs()[i] > 0.0)
        .map(|i| (i, distribution.probs()[i].ln()))
        .collect();
    options.sort_by(|x, y| y.1.total_cmp(&x.1));
    let max_log = options[0].1;
    let floor = n as f64 * max_log + cutoff.ln();

    struct Search<'a> {
        n: usize,
        options: &'a [(usize, f64)],
        col_a: &'a [u64],
        col_b: &'a [u64],
        target: u64,
        max_log: f64,
        floor: f64,
        current: Vec<usize>,
        best: Option<(f64, Vec<usize>)>,
        tie: bool,
    }

    impl Search<'_> {
        fn run(&mut self, i: usize, logp: f64, syndrome: u64) {
            if logp + (self.n - i) as f64 * self.max_log < self.floor {
                return;
            }
            if let Some((best, _)) = &self.best {
                if logp + (self.n - i) as f64 * self.max_log < best - 1e-9 {
                    return;
                }
            }
            if i == self.n {
                if syndrome != self.target {
                    return;
                }
                match &self.best {
                    Some((best, _)) if (logp - best).abs() <= 1e-9 => self.tie = true,
                    Some((best, _)) if logp < *best => {}
                    _ => {
                        self.best = Some((logp, self.current.clone()));
                        self.tie = false;
                    }
                }
                return;
            }
            for k in 0..self.options.len() {
                let (label, lp) = self.options[k];
                let mut s = syndrome;
                if label & 2 != 0 {
                    s ^= self.col_a[i];
                }
                if label & 1 != 0 {
                    s ^= self.col_b[i];
                }
                self.current.push(label);
                self.run(i + 1, logp + lp, s);
                self.current.pop();
            }
        }
    }

    let mut search = Search {
        n,
        options: &options,
        col_a: &col_a,
        col_b: &col_b,
        target,
        max_log,
        floor,
        current: Vec::with_capacity(n),
        best: None,
        tie: false,
    };
    search.run(0, 0.0, 0);
    Ok(match search.best {
        None => Decoded::Inconsistent,
        Some(_) if search.tie => Decoded::Ambiguous,
        Some((_, s)) => Decoded::Unique(s.into_iter().map(BellLabel::from_index).collect()),
    })
}

/// `ln Σ_{j ≤ w} C(n, j) r^j`.
fn ln_weight_count(n: usize, w: usize, ln_r: f64) -> f64 {
    let mut ln_c = 0.0;
    let mut terms = Vec::with_capacity(w.min(n) + 1);
    for j in 0..=w.min(n) {
        terms.push(ln_c + j as f64 * ln_r);
        ln_c += ((n - j) as f64).ln() - ((j + 1) as f64).ln();
    }
    let m = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    m + terms.iter().map(|t| (t - m).exp()).sum::<f64>().ln()
}

/// Expected number of consistent strings of weight at most `w`, other than
/// the truth, for random checks of ranks `k_a` and `k_b`.
pub fn expected_impostors(n: usize, w: usize, wa: usize, wb: usize, k_a: usize, k_b: usize) -> f64 {
    let ln2 = std::f64::consts::LN_2;
    let ln_tot = ln_weight_count(n, w, 3f64.ln());
    // Same a-part: the wa sites with a = 1 take either b; the others may
    // add b-flips within the remaining weight budget.
    let ln_same_a = wa as f64 * ln2 + ln_weight_count(n - wa, w - wa, 0.0);
    let ln_same_b = wb as f64 * ln2 + ln_weight_count(n - wb, w - wb, 0.0);
    let k = (k_a + k_b) as f64;
    let rest = 1.0 - (ln_same_a - ln_tot).exp() - (ln_same_b - ln_tot).exp() + (-ln_tot).exp();
    let both = if rest > 0.0 {
        (ln_tot + rest.ln() - k * ln2).exp()
    } else {
        0.0
    };
    // ln(A − 1) without forming A.
    let ln_minus_one = |ln_x: f64| ln_x + (-(-ln_x).exp()).ln_1p();
    let only_b = ln_minus_one(ln_same_a) - k_b as f64 * ln2;
    let only_a = ln_minus_one(ln_same_b) - k_a as f64 * ln2;
    both + only_b.exp() + only_a.exp()
}

/// Large-N success criterion for Werner priors; see the module docs.
pub fn genie_decodes<R: Rng + ?Sized>(
    transcript: &BitVec,
    checks: &ParityChecks,
    distribution: &BellDistribution,
    truth: &[BellLabel],
    impostor_draws: usize,
    rng: &mut R,
) -> Result<bool, EngineError> {
    check_transcript(transcript, checks)?;
    let n = checks.n_pairs();
    if truth.len() != n {
        return Err(EngineError::SizeMismatch {
            expected: n,
            found: truth.len(),
        });
    }
    if !distribution.is_werner(1e-12) {
        return Err(EngineError::NotWerner);
    }
    let (ta, tb) = label_bits(truth);
    if checks.transcript_bits(&ta, &tb) != *transcript {
        return Ok(false);
    }
    let f = distribution.fidelity();
    let w = truth.iter().filter(|l| !l.is_phi_plus()).count();
    if f >= 1.0 {
        return Ok(true);
    }
    if f <= 0.25 {
        // Errors are at least as likely as Φ+: the typical set is everything.
        return Ok(false);
    }

    // Sampled impostors: only strings with weight ≤ w are at least as likely.
    let binom = Binomial::new(n as u64, 1.0 - f).expect("valid binomial");
    let rounds = checks.rounds();
    for _ in 0..impostor_draws {
        let w2 = binom.sample(rng) as usize;
        if w2 > w {
            continue;
        }
        let sites = sample_indices(rng, n, w2);
        let labels: Vec<(usize, BellLabel)> = sites
            .iter()
            .map(|i| (i, BellLabel::from_index(rng.random_range(1..4))))
            .collect();
        if labels.len() == w && labels.iter().all(|&(i, l)| truth[i] == l) {
            continue;
        }
        let consistent = rounds.iter().enumerate().all(|(r, (ty, row))| {
            let parity = labels.iter().fold(false, |acc, &(i, l)| {
                let bit = match ty {
                    ParityType::Amplitude => l.a,
                    ParityType::Phase => l.b,
                };
                acc ^ (bit && row.get(i))
            });
            parity == transcript.get(r)
        });
        if consistent {
            return Ok(false);
        }
    }

    let wa = truth.iter().filter(|l| l.a).count();
    let wb = truth.iter().filter(|l| l.b).count();
    let e = expected_impostors(n, w, wa, wb, checks.k_a(), checks.k_b());
    Ok(rng.random::<f64>() < (-e).exp())
}

/// `true` when the transcript identifies the true string: exact ML for small
/// ensembles, the large-N criterion otherwise.
pub fn decode_success<R: Rng + ?Sized>(
    transcript: &BitVec,
    checks: &ParityChecks,
    distribution: &BellDistribution,
    truth: &[BellLabel],
    config: &DecoderConfig,
    rng: &mut R,
) -> Result<bool, EngineError> {
    if checks.n_pairs() <= config.exhaustive_max_pairs.min(MAX_EXHAUSTIVE_PAIRS) {
        Ok(match decode_ml(transcript, checks, distribution, config.cutoff)? {
            Decoded::Unique(est) => est == truth,
            _ => false,
        })
    } else {
        genie_decodes(transcript, checks, distribution, truth, config.impostor_draws, rng)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::ensemble::sample_ensemble;
    use crate::resource::{make_hashing_plan, HashingPlan, Round};
    use crate::rng::{trial_rng, Purpose};

    #[test]
    fn zero_error_string() {
        let plan = make_hashing_plan(10, 4, 1).unwrap();
        let checks = ParityChecks::from_plan(&plan);
        let d = BellDistribution::werner(0.95).unwrap();
        let t = BitVec::zeros(checks.n_rounds());
        assert_eq!(
            decode_ml(&t, &checks, &d, 1e-6).unwrap(),
            Decoded::Unique(vec![BellLabel::PHI_PLUS; 10])
        );
    }

    /// Consistent strings of weight ≤ 2, by brute force.
    fn consistent_low_weight(checks: &ParityChecks, t: &BitVec, n: usize) -> Vec<Vec<BellLabel>> {
        let mut out = Vec::new();
        let mut push = |s: Vec<BellLabel>| {
            if checks.transcript(&s) == *t {
                out.push(s);
            }
        };
        push(vec![BellLabel::PHI_PLUS; n]);
        for i in 0..n {
            for li in 1..4 {
                let mut s = vec![BellLabel::PHI_PLUS; n];
                s[i] = BellLabel::from_index(li);
                push(s.clone());
                for j in i + 1..n {
                    for lj in 1..4 {
                        let mut s2 = s.clone();
                        s2[j] = BellLabel::from_index(lj);
                        push(s2);
                    }
                }
            }
        }
        out
    }

    #[test]
    fn matches_brute_force_on_planted_strings() {
        let d = BellDistribution::werner(0.97).unwrap();
        let weight = |s: &[BellLabel]| s.iter().filter(|l| !l.is_phi_plus()).count();
        let mut recovered = 0;
        for seed in 0..40u64 {
            let plan = make_hashing_plan(12, 3, seed).unwrap();
            let checks = ParityChecks::from_plan(&plan);
            let mut truth = vec![BellLabel::PHI_PLUS; 12];
            truth[(seed % 12) as usize] = BellLabel::from_index(1 + (seed % 3) as usize);
            let t = checks.transcript(&truth);
            let cands = consistent_low_weight(&checks, &t, 12);
            let best = cands.iter().map(|c| weight(c)).min().unwrap();
            let best_set: Vec<_> = cands.iter().filter(|c| weight(c) == best).collect();
            let expected = if best_set.len() == 1 {
                Decoded::Unique(best_set[0].clone())
            } else {
                Decoded::Ambiguous
            };
            let got = decode_ml(&t, &checks, &d, 1e-6).unwrap();
            assert_eq!(got, expected, "seed {seed}");
            recovered += (got == Decoded::Unique(truth)) as usize;
        }
        assert!(recovered > 0);
    }

    #[test]
    fn degenerate_checks_are_ambiguous() {
        // Pairs 0 and 2 enter the single amplitude check symmetrically.
        let plan = HashingPlan::from_rounds(
            3,
            vec![Round {
                subset: vec![0],
                parity_type: ParityType::Amplitude,
                target: 2,
            }],
            0,
        )
        .unwrap();
        let checks = ParityChecks::from_plan(&plan);
        let d = BellDistribution::werner(0.9).unwrap();
        let truth = [BellLabel::new(true, false), BellLabel::PHI_PLUS, BellLabel::PHI_PLUS];
        let t = checks.transcript(&truth);
        assert_eq!(decode_ml(&t, &checks, &d, 1e-6).unwrap(), Decoded::Ambiguous);
    }

    #[test]
    fn transcript_length_checked() {
        let plan = make_hashing_plan(6, 2, 0).unwrap();
        let checks = ParityChecks::from_plan(&plan);
        let d = BellDistribution::werner(0.9).unwrap();
        assert!(matches!(
            decode_ml(&BitVec::zeros(3), &checks, &d, 1e-6),
            Err(EngineError::TranscriptLength { .. })
        ));
    }

    #[test]
    fn impostor_estimate_behaves() {
        // Enough checks: essentially no impostors; too few: many.
        assert!(expected_impostors(1024, 20, 14, 13, 300, 300) < 1e-10);
        assert!(expected_impostors(1024, 60, 40, 40, 100, 100) > 1e3);
        // Only the truth has weight 0.
        assert_eq!(expected_impostors(100, 0, 0, 0, 10, 10), 0.0);
    }

    #[test]
    fn genie_rejects_inconsistent_truth() {
        let plan = make_hashing_plan(64, 20, 3).unwrap();
        let checks = ParityChecks::from_plan(&plan);
        let d = BellDistribution::werner(0.95).unwrap();
        let mut rng = trial_rng(3, 0, Purpose::Test);
        let e = sample_ensemble(&d, 64, &mut rng);
        let mut t = checks.transcript(&e.labels);
        t.flip(0);
        assert!(!genie_decodes(&t, &checks, &d, &e.labels, 100, &mut rng).unwrap());
    }
}
