use crate::gf2::{BitMatrix, BitVec};
use crate::resource::{HashingPlan, ParityType};

use super::ensemble::{label_bits, BellLabel};

/// Linear description of a hashing plan over the `2N` input label bits.
///
/// Amplitude and phase bits never mix under bilateral CNOTs, so each
/// round's parity is a form over the `a` bits or over the `b` bits, and so
/// are the final labels of the surviving pairs.
#[derive(Debug, Clone)]
pub struct ParityChecks {
    n: usize,
    rounds: Vec<(ParityType, BitVec)>,
    out_a: Vec<BitVec>,
    out_b: Vec<BitVec>,
    rank_a: usize,
    rank_b: usize,
}

impl ParityChecks {
    pub fn from_plan(plan: &HashingPlan) -> Self {
        let n = plan.n_pairs();
        let mut a: Vec<BitVec> = (0..n).map(|i| BitVec::unit(n, i)).collect();
        let mut b = a.clone();
        let mut rounds = Vec::with_capacity(plan.rounds().len());
        for r in plan.rounds() {
            let t = r.target;
            match r.parity_type {
                // CNOT(s → t): a_t ^= a_s, b_s ^= b_t
                ParityType::Amplitude => {
                    let mut acc = a[t].clone();
                    for &s in &r.subset {
                        acc.xor_assign(&a[s]);
                        xor_into(&mut b, s, t);
                    }
                    a[t] = acc.clone();
                    rounds.push((ParityType::Amplitude, acc));
                }
                // CNOT(t → s): a_s ^= a_t, b_t ^= b_s
                ParityType::Phase => {
                    let mut acc = b[t].clone();
                    for &s in &r.subset {
                        acc.xor_assign(&b[s]);
                        xor_into(&mut a, s, t);
                    }
                    b[t] = acc.clone();
                    rounds.push((ParityType::Phase, acc));
                }
            }
        }
        let survivors = plan.surviving_pairs();
        let out_a = survivors.iter().map(|&i| a[i].clone()).collect();
        let out_b = survivors.iter().map(|&i| b[i].clone()).collect();
        let rank_of = |ty| {
            let rows: Vec<BitVec> = rounds.iter().filter(|(t, _)| *t == ty).map(|(_, r)| r.clone()).collect();
            BitMatrix::from_rows(n, rows).rank()
        };
        let rank_a = rank_of(ParityType::Amplitude);
        let rank_b = rank_of(ParityType::Phase);
        Self {
            n,
            rounds,
            out_a,
            out_b,
            rank_a,
            rank_b,
        }
    }

    pub fn n_pairs(&self) -> usize {
        self.n
    }

    pub fn n_rounds(&self) -> usize {
        self.rounds.len()
    }

    pub fn n_outputs(&self) -> usize {
        self.out_a.len()
    }

    pub fn rounds(&self) -> &[(ParityType, BitVec)] {
        &self.rounds
    }

    /// Rank of the amplitude checks.
    pub fn k_a(&self) -> usize {
        self.rank_a
    }

    /// Rank of the phase checks.
    pub fn k_b(&self) -> usize {
        self.rank_b
    }

    /// Parity bits the plan reveals for the given input labels.
    pub fn transcript(&self, labels: &[BellLabel]) -> BitVec {
        let (a, b) = label_bits(labels);
        self.transcript_bits(&a, &b)
    }

    pub fn transcript_bits(&self, a: &BitVec, b: &BitVec) -> BitVec {
        let mut out = BitVec::zeros(self.rounds.len());
        for (i, (ty, row)) in self.rounds.iter().enumerate() {
            let v = match ty {
                ParityType::Amplitude => row.dot(a),
                ParityType::Phase => row.dot(b),
            };
            out.set(i, v);
        }
        out
    }

    /// Final labels of the surviving pairs after a noiseless run.
    pub fn output_labels(&self, labels: &[BellLabel]) -> Vec<BellLabel> {
        let (a, b) = label_bits(labels);
        self.out_a
            .iter()
            .zip(&self.out_b)
            .map(|(fa, fb)| BellLabel::new(fa.dot(&a), fb.dot(&b)))
            .collect()
    }
}

/// `v[dst] ^= v[src]` for `dst != src`.
fn xor_into(v: &mut [BitVec], dst: usize, src: usize) {
    let (d, s) = if dst < src {
        let (lo, hi) = v.split_at_mut(src);
        (&mut lo[dst], &hi[0])
    } else {
        let (lo, hi) = v.split_at_mut(dst);
        (&mut hi[0], &lo[src])
    };
    d.xor_assign(s);
}

/// Runs a plan on concrete labels with bilateral CNOTs. `after_gate(labels,
/// control, target)` is called after every two-qubit gate, for example to
/// inject gate noise. Returns the transcript and leaves the final labels in
/// `labels`.
pub fn simulate_bilateral(
    plan: &HashingPlan,
    labels: &mut [BellLabel],
    mut after_gate: impl FnMut(&mut [BellLabel], usize, usize),
) -> BitVec {
    assert_eq!(labels.len(), plan.n_pairs(), "one label per pair");
    let mut transcript = BitVec::zeros(plan.rounds().len());
    for (i, r) in plan.rounds().iter().enumerate() {
        let t = r.target;
        for &s in &r.subset {
            let (c, tg) = match r.parity_type {
                ParityType::Amplitude => (s, t),
                ParityType::Phase => (t, s),
            };
            labels[tg].a ^= labels[c].a;
            labels[c].b ^= labels[tg].b;
            after_gate(labels, c, tg);
        }
        let bit = match r.parity_type {
            ParityType::Amplitude => labels[t].a,
            ParityType::Phase => labels[t].b,
        };
        transcript.set(i, bit);
    }
    transcript
}
