//! Reproducible per-trial random streams.
//!
//! Every stream is a ChaCha8 keystream keyed by the master seed and a purpose
//! tag, with the trial id selecting the 64-bit stream number. Trials can run
//! in any order or on any thread and still draw identical numbers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type TrialRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Purpose {
    Plan,
    Ensemble,
    Noise,
    Measurement,
    Decoder,
    Test,
}

impl Purpose {
    fn tag(self) -> u64 {
        match self {
            Purpose::Plan => 0x706c_616e,
            Purpose::Ensemble => 0x656e_7365,
            Purpose::Noise => 0x6e6f_6973,
            Purpose::Measurement => 0x6d65_6173,
            Purpose::Decoder => 0x6465_636f,
            Purpose::Test => 0x7465_7374,
        }
    }
}

pub fn trial_rng(master_seed: u64, trial: u64, purpose: Purpose) -> TrialRng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&master_seed.to_le_bytes());
    key[8..16].copy_from_slice(&purpose.tag().to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(trial);
    rng
}
